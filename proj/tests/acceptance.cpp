// Acceptance harness: one PASS/FAIL line per criterion.
// Usage: acceptance [--only N] [--cli PATH --scenarios DIR --work DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "nullplane/entropy.hpp"
#include "nullplane/stdsubspace.hpp"

using namespace nullplane;
using entropy::BMTState;
using nullcut::CutProfile;
using nullcut::TransverseBump;
using numerics::kTwoPi;
using numerics::QuadratureSpec;
using numerics::SmoothBump;
using numerics::SmoothFn1D;
using oneparticle::DirectIntegralVector;
using oneparticle::MassShellParams;
using oneparticle::ThinTerm;
using oneparticle::ThinTestFunction;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct Options {
    int only = 0;
    std::string cli, scenarios, work;
};

SmoothFn1D bump(double c, double w, int order, double a = 1.0) {
    return SmoothFn1D{{{1.0, SmoothBump{c, w, a, order}}}};
}

ThinTestFunction separable(SmoothFn1D u, SmoothFn1D v) { return ThinTestFunction{{ThinTerm{u, {v}, {}}}}; }

CutProfile profile(double base, double c, double w, double coef, bool nonneg = false) {
    return CutProfile(base, {TransverseBump{coef, {SmoothBump{c, w, 1.0, 0}}}}, nonneg);
}

double rel_dist(const DirectIntegralVector& a, const DirectIntegralVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.fibres.size(); ++k)
        for (std::size_t j = 0; j < a.fibres[k].values.size(); ++j) {
            num += a.nodes[k].weight * std::norm(a.fibres[k].values[j] - b.fibres[k].values[j]);
            den += a.nodes[k].weight * std::norm(b.fibres[k].values[j]);
        }
    return std::sqrt(num / den);
}

std::vector<BMTState> states() {
    return {
        BMTState{separable(bump(0.6, 1.0, 1), bump(0.0, 1.0, 0))},
        BMTState{ThinTestFunction{{ThinTerm{bump(0.8, 0.7, 0), {bump(0.1, 0.9, 0)}, {}},
                                   ThinTerm{bump(0.3, 0.6, 1, 0.7), {bump(-0.2, 0.6, 0)}, {}}}}},
        // Sheared: the x_+ profile rides on a transverse bump.
        BMTState{ThinTestFunction{{ThinTerm{bump(0.4, 0.8, 0, 1.3), {bump(0.0, 1.2, 0)}, profile(0.0, 0.2, 0.9, 0.6)}}}},
    };
}

// 1 ----------------------------------------------------------------------------
Outcome superadditivity(const QuadratureSpec& spec) {
    Outcome o;
    const std::vector<std::pair<CutProfile, CutProfile>> pairs{
        {profile(0.0, -0.3, 0.6, 1.0), profile(0.1, 0.4, 0.7, -0.8)},
        {profile(0.2, 0.0, 0.8, 0.0), profile(0.0, 0.1, 0.9, 1.5)},
        {profile(-0.2, -0.5, 0.5, 2.0), profile(0.3, 0.5, 0.6, -1.2)},
        {CutProfile(0.1, {TransverseBump{1.0, {SmoothBump{-0.4, 0.4, 1.0, 0}}}, TransverseBump{1.0, {SmoothBump{0.5, 0.4, 1.0, 0}}}}),
         profile(0.35, 0.0, 0.7, 0.0)},
        {profile(0.5, 0.0, 1.0, -1.5), profile(0.0, 0.2, 0.5, 1.0)},
    };
    double worst = 0.0;
    for (const auto& s : states())
        for (const auto& [c1, c2] : pairs) {
            auto r = entropy::superadditivity_check(s, c1, c2, spec);
            double rel = std::abs(r.residual) / r.max_S();
            worst = std::max(worst, rel);
            o.require(r.max_S() > 0.0 && std::abs(r.residual) <= 1e-8 * r.max_S(), "residual");
        }
    o.detail << "max |residual|/max S = " << worst << " over 15 cases";
    return o;
}

// 2 ----------------------------------------------------------------------------
struct Config {
    BMTState state;
    CutProfile c, a;
};

std::vector<Config> configs() {
    auto s = states();
    return {
        {s[0], CutProfile{}, CutProfile::constant(1.0, true)},
        {s[1], profile(0.1, 0.2, 0.7, 0.5), profile(0.5, -0.1, 0.8, 1.0, true)},
        {s[2], profile(-0.2, 0.0, 0.6, 0.4), profile(0.3, 0.3, 0.7, 0.8, true)},
        {s[1], profile(0.0, -0.3, 0.5, -0.6), profile(1.0, 0.0, 0.9, 0.5, true)},
    };
}

Outcome qnec(const QuadratureSpec& spec) {
    Outcome o;
    double min_s2 = 1e300, max_dev = 0.0;
    int checked = 0;
    for (const auto& cfg : configs()) {
        std::vector<double> t;
        for (int i = 0; i < 21; ++i) t.push_back(-1.5 + 0.15 * i);
        auto r = entropy::qnec_sweep(cfg.state, cfg.c, cfg.a, t, spec);
        min_s2 = std::min(min_s2, r.min_S_double_prime);
        max_dev = std::max(max_dev, r.max_fd_deviation);
        for (const auto& row : r.rows) checked += row.fd_checked && row.strict;
        o.require(r.qnec_holds, "S'' >= -1e-10");
        o.require(r.fd_consistent, "finite differences");
    }
    o.detail << "min S'' = " << min_s2 << ", max FD deviation = " << max_dev << " (" << checked
             << " strict rows)";
    return o;
}

// 3 ----------------------------------------------------------------------------
Outcome anec(const QuadratureSpec& spec) {
    Outcome o;
    MassShellParams params{1.0, 2};
    double ab = 0.0, cb = 0.0;
    for (const auto& cfg : configs()) {
        auto r = entropy::anec_identity(cfg.state, cfg.c, cfg.a, params, spec);
        ab = std::max(ab, r.residual_ab());
        cb = std::max(cb, r.residual_cb());
        o.require(r.route_b > 0.0, "nontrivial");
        o.require(r.residual_ab() <= 1e-6, "a vs b");
        o.require(r.residual_cb() <= 1e-4, "c vs b");
    }
    o.detail << "max |a-b|/b = " << ab << ", max |c-b|/b = " << cb;
    return o;
}

// 4 ----------------------------------------------------------------------------
Outcome zero_mode(const QuadratureSpec& spec) {
    Outcome o;
    MassShellParams params{1.0, 2};
    auto bad = oneparticle::zero_mode_diagnose(separable(bump(0.0, 1.0, 0), bump(0.0, 1.0, 0)), params, spec);
    double min_ratio = 1e300;
    for (double rate : bad.growth_rates) min_ratio = std::min(min_ratio, rate / bad.zero_mode_weight);
    o.require(!bad.zero_mean() && min_ratio >= 0.9, "growth");
    auto good = oneparticle::zero_mode_diagnose(separable(bump(0.0, 0.5, 1, 0.5), bump(0.0, 1.0, 0)), params, spec);
    double change = 0.0;
    for (double n : good.truncated_norms) change = std::max(change, std::abs(n - good.truncated_norms.front()));
    o.require(good.zero_mean() && change <= 1e-8, "zero-mean change");
    o.detail << "min growth / |g^(0)|^2 = " << min_ratio << ", zero-mean change = " << change;
    return o;
}

// 5 ----------------------------------------------------------------------------
Outcome momentum_measure(const QuadratureSpec& spec) {
    Outcome o;
    const std::vector<ThinTestFunction> fns{
        separable(bump(0.0, 1.0, 1), bump(0.0, 1.0, 0)),       separable(bump(0.5, 0.6, 1), bump(0.1, 0.8, 0)),
        separable(bump(-0.3, 1.2, 1, 0.8), bump(0.2, 0.5, 0)), separable(bump(1.0, 0.8, 1), bump(-0.2, 1.1, 0)),
        separable(bump(0.2, 0.7, 1, 1.5), bump(0.0, 0.7, 0)),  separable(bump(-0.5, 0.9, 1), bump(0.3, 0.9, 0)),
    };
    double worst = 0.0;
    for (double m : {1.0, 0.1, 0.0})
        for (const auto& g : fns) {
            MassShellParams params{m, 2};
            double a = oneparticle::theta_coordinate_norm2(oneparticle::fourier_restrict(g, params, spec));
            double b = oneparticle::mass_shell_norm2(g, params, spec);
            double rel = std::abs(a - b) / b;
            worst = std::max(worst, rel);
            o.require(rel <= 1e-6, "m = " + std::to_string(m));
        }
    o.detail << "max relative deviation = " << worst << " over 18 cases";
    return o;
}

// 6 ----------------------------------------------------------------------------
Outcome covariance(const QuadratureSpec& spec) {
    Outcome o;
    MassShellParams params{1.0, 2};
    auto g = separable(bump(0.5, 0.6, 1), bump(0.1, 0.8, 0));
    const std::vector<CutProfile> cuts{profile(0.2, 0.0, 0.7, 0.5), profile(-0.3, 0.3, 0.5, 0.4),
                                       CutProfile(0.1, {TransverseBump{0.5, {SmoothBump{-0.4, 0.5, 1.0, 0}}},
                                                        TransverseBump{-0.3, {SmoothBump{0.4, 0.5, 1.0, 0}}}})};
    auto spatial = oneparticle::spatial_restrict(g, params, spec);
    auto from_momentum = oneparticle::to_spatial(oneparticle::fourier_restrict(g, params, spec), spec);
    double worst = 0.0;
    for (const auto& c : cuts) {
        auto target = oneparticle::to_spatial(oneparticle::fourier_restrict(g.translated_by(c), params, spec), spec);
        for (const auto* v : {&spatial, &from_momentum}) {
            double d = rel_dist(nullcut::distorted_translate(*v, c), target);
            worst = std::max(worst, d);
            o.require(d <= 1e-6, "translated vector");
        }
    }
    o.detail << "max relative deviation = " << worst << " over 3 profiles, 2 routes";
    return o;
}

// 7 ----------------------------------------------------------------------------
nullcut::NullCutVector gaussian_vector(const QuadratureSpec& spec, const CutProfile& cut) {
    MassShellParams params{1.0, 2};
    auto v = oneparticle::spatial_restrict(separable(bump(0.0, 1.0, 1), bump(0.0, 1.0, 0)), params, spec);
    v.origin.reset();
    for (std::size_t k = 0; k < v.nodes.size(); ++k) {
        double x = v.nodes[k].point[0];
        v.fibres[k] = fibre::gaussian_fibre(spec, 1.0 + 0.3 * x, 0.7, 1.5 - x, std::cos(x));
    }
    return nullcut::make_nullcut_vector(v, cut);
}

DirectIntegralVector fd_generator(const nullcut::NullCutVector& v, const CutProfile& c, const QuadratureSpec& spec) {
    const double eps = 1e-4;
    auto plus = nullcut::modular_flow_nullcut(v, c, eps, spec);
    auto minus = nullcut::modular_flow_nullcut(v, c, -eps, spec);
    auto out = v.vec;
    for (std::size_t k = 0; k < out.fibres.size(); ++k) {
        out.fibres[k].source.reset();
        for (std::size_t j = 0; j < out.fibres[k].values.size(); ++j)
            out.fibres[k].values[j] =
                (plus.vec.fibres[k].values[j] - minus.vec.fibres[k].values[j]) / numerics::cplx(0.0, 2.0 * eps);
    }
    return out;
}

Outcome generator(const QuadratureSpec& spec) {
    Outcome o;
    double worst = 0.0;
    for (const auto& c : {profile(0.3, 0.0, 0.8, -1.0), profile(0.0, 0.2, 0.6, 1.5), profile(-0.5, -0.3, 0.9, 0.7)}) {
        auto v = gaussian_vector(spec, c);
        double d = rel_dist(fd_generator(v, c, spec), nullcut::modular_generator_apply(v, c, spec));
        worst = std::max(worst, d);
        o.require(d <= 5e-3, "generator");
    }
    double shift_dev = 0.0;
    for (double s : {0.25, 0.6}) {
        auto v = gaussian_vector(spec, CutProfile{});
        auto flat = fd_generator(v, CutProfile{}, spec);
        auto shifted = fd_generator(v, CutProfile::constant(s), spec);
        // logDelta_{N_0} + 2 pi s P, P = e^{-theta'} fibre-wise.
        auto want = flat;
        for (std::size_t k = 0; k < want.fibres.size(); ++k)
            for (int j = 0; j < v.vec.grid.size; ++j)
                want.fibres[k].values[j] += kTwoPi * s * std::exp(-v.vec.grid.node(j)) * v.vec.fibres[k].values[j];
        double d = rel_dist(shifted, want);
        shift_dev = std::max(shift_dev, d);
        o.require(d <= 1e-3, "constant shift");
    }
    o.detail << "max generator deviation = " << worst << ", constant-shift deviation = " << shift_dev;
    return o;
}

// 8 ----------------------------------------------------------------------------
Outcome hsmi(const QuadratureSpec& spec) {
    Outcome o;
    MassShellParams params{1.0, 2};
    auto g = separable(bump(3.0, 1.0, 1), bump(0.0, 1.0, 0));
    const std::vector<std::pair<CutProfile, CutProfile>> pairs{
        {profile(0.2, 0.3, 0.8, -1.0), profile(1.0, -0.2, 0.9, 1.5)},
        {CutProfile::constant(0.0), profile(0.5, 0.0, 1.0, 2.0)},
        {profile(-1.0, 0.0, 0.5, 3.0), CutProfile::constant(1.5)},
    };
    double min_margin = 1e300;
    int leaks = 0;
    for (const auto& [c1, c2] : pairs) {
        auto r = nullcut::hsmi_support_witness(c1, c2, g, {0.0, 0.05, 0.2, 1.0}, params, spec);
        o.require(r.positive(), "positive");
        o.require(r.non_decreasing(), "non-decreasing");
        for (double m : r.margins) min_margin = std::min(min_margin, m);
        for (bool in : r.fibre_flow_in_window) leaks += !in;
    }
    o.detail << "min margin = " << min_margin << "; fibre flow left the theta' window at " << leaks
             << " of 12 (pair, s) points";
    return o;
}

// 9 ----------------------------------------------------------------------------
Outcome subspace_lab(const QuadratureSpec& spec) {
    using namespace stdsubspace;
    Outcome o;
    double rel_max = 0.0, ent_max = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int n = 1 + i % 6;
        auto h = make_subspace(random_spanning(n, 1000 + 17 * i));
        rel_max = std::max(rel_max, verify_modular_relations(h).max());
        CVec v = remove_unit_spectrum(h, h.basis * RVec::LinSpaced(n, -1.0, 0.7 + 0.1 * i).cast<std::complex<double>>());
        double direct = -(v.dot(h.log_delta() * v)).real();
        ent_max = std::max(ent_max, std::abs(entropy_cutting(h, v) - direct));
    }
    o.require(rel_max <= 1e-8, "modular relations");
    o.require(ent_max <= 1e-8, "entropy formula");

    auto h = make_subspace(random_spanning(2, 3));
    auto k = make_subspace(random_spanning(2, 11));
    auto tr = trotter_translation(h, k, 0.3, {8, 16, 32, 64, 128, 256});
    o.require(tr.observed_order >= 0.9, "Trotter order");

    SmoothFn1D kf = bump(2.0, 1.0, 1);
    double exact = fibre::halfline_entropy(kf, 0.0, spec), prev = 1e300;
    std::ostringstream devs;
    for (int n : {64, 128, 256}) {
        auto m = truncated_halfline_model(n, spec.theta_cutoff);
        double dev = std::abs(entropy_cutting(m.subspace, sample_fibre(m, kf)) - exact);
        o.require(dev <= prev, "truncated fibre monotone");
        devs << (n == 64 ? "" : ", ") << dev;
        prev = dev;
    }
    o.detail << "max relation residual = " << rel_max << ", max entropy deviation = " << ent_max
             << ", Trotter order = " << tr.observed_order << ", truncated deviations = " << devs.str();
    return o;
}

// 10 ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const Options& opt) {
    Outcome o;
    if (opt.cli.empty() || opt.scenarios.empty() || opt.work.empty()) {
        o.require(false, "needs --cli, --scenarios and --work");
        return o;
    }
    int files = 0, scenarios = 0;
    std::vector<fs::path> list;
    for (const auto& e : fs::directory_iterator(opt.scenarios))
        if (e.path().extension() == ".json") list.push_back(e.path());
    std::sort(list.begin(), list.end());
    for (const auto& sc : list) {
        ++scenarios;
        const fs::path base = fs::path(opt.work) / sc.stem();
        std::vector<fs::path> runs{base / "run1", base / "run2"};
        for (const auto& r : runs) {
            fs::remove_all(r);
            std::string cmd = "\"" + opt.cli + "\" run \"" + sc.string() + "\" --out \"" + r.string() + "\" > \"" +
                              r.string() + ".log\" 2>&1";
            fs::create_directories(r.parent_path());
            int rc = std::system(cmd.c_str());
            o.require(rc == 0, sc.stem().string() + " exit status");
        }
        for (const auto& e : fs::recursive_directory_iterator(runs[0])) {
            if (!e.is_regular_file()) continue;
            auto rel = fs::relative(e.path(), runs[0]);
            ++files;
            o.require(fs::exists(runs[1] / rel) && slurp(e.path()) == slurp(runs[1] / rel),
                      (sc.stem() / rel).string() + " differs");
        }
        int second = 0;
        for (const auto& e : fs::recursive_directory_iterator(runs[1])) second += e.is_regular_file();
        int first = 0;
        for (const auto& e : fs::recursive_directory_iterator(runs[0])) first += e.is_regular_file();
        o.require(first == second && first > 0, sc.stem().string() + " file sets");
    }
    o.detail << scenarios << " scenarios, " << files << " files compared byte for byte";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "missing value for %s\n", a.c_str());
                std::exit(2);
            }
            return argv[++i];
        };
        if (a == "--only") opt.only = std::stoi(next());
        else if (a == "--cli") opt.cli = next();
        else if (a == "--scenarios") opt.scenarios = next();
        else if (a == "--work") opt.work = next();
        else {
            std::fprintf(stderr, "unknown argument %s\n", a.c_str());
            return 2;
        }
    }
    QuadratureSpec spec;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"superadditivity saturation", [&] { return superadditivity(spec); }},
        {"QNEC", [&] { return qnec(spec); }},
        {"ANEC integral identity", [&] { return anec(spec); }},
        {"zero-mode growth", [&] { return zero_mode(spec); }},
        {"coordinate unitarity", [&] { return momentum_measure(spec); }},
        {"covariance of distorted translations", [&] { return covariance(spec); }},
        {"modular generator decomposition", [&] { return generator(spec); }},
        {"HSMI geometry", [&] { return hsmi(spec); }},
        {"standard-subspace lab", [&] { return subspace_lab(spec); }},
        {"determinism", [&] { return determinism(opt); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (opt.only != 0 && opt.only != id) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.require(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !r.pass;
        std::printf("%s %2d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    r.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
