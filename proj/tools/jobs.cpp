#include "jobs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "nullplane/fibre.hpp"
#include "nullplane/stdsubspace.hpp"

namespace nullplane::cli {

using entropy::BMTState;
using nullcut::CutProfile;
using numerics::kTwoPi;
using numerics::QuadratureSpec;
using oneparticle::DirectIntegralVector;

const char* status_name(JobStatus s) {
    switch (s) {
        case JobStatus::ok: return "ok";
        case JobStatus::violation: return "identity-violation";
        case JobStatus::invalid: return "invalid";
        case JobStatus::error: return "error";
    }
    return "error";
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

struct Ctx {
    const Scenario& sc;
    const JobSpec& job;
    double scale;
    QuadratureSpec spec;
    JobResult out;

    const Json& raw() const { return job.raw; }
    std::string where() const { return "job " + job.name; }
    double num(const char* key, double fallback) const { return number_or(raw(), key, fallback, where()); }
    bool flag(const char* key, bool fallback) const {
        return raw().contains(key) ? raw().at(key).get<bool>() : fallback;
    }
    int integer(const char* key, int fallback) const {
        return raw().contains(key) ? raw().at(key).get<int>() : fallback;
    }
    const CutProfile& profile(const char* key) const { return sc.profiles.at(raw().at(key).get<std::string>()); }
    std::optional<CutProfile> maybe_profile(const char* key) const {
        if (!raw().contains(key)) return std::nullopt;
        return profile(key);
    }
    const oneparticle::ThinTestFunction& function(const char* key) const {
        return sc.functions.at(raw().at(key).get<std::string>());
    }

    // Records a residual and fails the job when it exceeds tol.
    void check(const std::string& name, double residual, double tol) {
        out.residuals[name] = residual;
        if (!(residual <= tol)) fail(name + " residual " + fmt(residual) + " exceeds " + fmt(tol));
    }
    // Lower bounds: value must be >= bound.
    void check_min(const std::string& name, double value, double bound) {
        out.residuals[name] = value;
        if (!(value >= bound)) fail(name + " = " + fmt(value) + " is below " + fmt(bound));
    }
    void fail(const std::string& why) {
        out.status = JobStatus::violation;
        out.message += (out.message.empty() ? "" : "; ") + why;
    }
    void file(const std::string& suffix, std::string content) {
        out.files.push_back({job.output + suffix, std::move(content)});
    }
};

std::string per_fibre_dat(const std::vector<entropy::FibreEntropy>& rows) {
    std::string s;
    for (const auto& f : rows) {
        for (double x : f.x_perp) s += fmt(x) + " ";
        s += fmt(f.entropy) + "\n";
    }
    return s;
}

double rel_dist(const DirectIntegralVector& a, const DirectIntegralVector& b) {
    numerics::KahanSum<double> num, den;
    for (std::size_t k = 0; k < a.fibres.size(); ++k)
        for (std::size_t j = 0; j < a.fibres[k].values.size(); ++j) {
            num.add(a.nodes[k].weight * std::norm(a.fibres[k].values[j] - b.fibres[k].values[j]));
            den.add(a.nodes[k].weight * std::norm(b.fibres[k].values[j]));
        }
    return den.value() > 0.0 ? std::sqrt(num.value() / den.value()) : std::sqrt(num.value());
}

double rel_gap(double a, double b) {
    const double d = std::abs(a - b), m = std::max(std::abs(a), std::abs(b));
    return m > 0.0 ? d / m : 0.0;
}

void entropy_job(Ctx& x) {
    const BMTState st{x.function("state")};
    const CutProfile c = x.profile("cut");
    const auto a = x.maybe_profile("deformation");
    const double t = x.num("t", 0.0);
    const CutProfile cut = a ? c + a->scaled(t) : c;

    auto rep = entropy::nullcut_entropy(st, cut, x.spec);
    x.out.results["t"] = t;
    x.out.results["S"] = rep.S;
    x.out.results["quadrature_error"] = rep.quadrature_error;
    x.out.results["transverse_nodes"] = rep.per_fibre.size();
    x.check_min("S", rep.S, -1e-12 * x.scale);
    if (a) {
        auto d = entropy::entropy_derivatives(st, c, *a, t, x.spec);
        x.out.results["S_prime"] = d.S_prime;
        x.out.results["S_double_prime"] = d.S_double_prime;
        x.out.results["qnec_margin"] = d.S_double_prime / kTwoPi;
        const double e = entropy::energy_null_cut(st, *a, cut, x.spec);
        x.out.results["energy"] = e;
        x.check("energy_relation", rel_gap(-d.S_prime / numerics::kPi, e), 1e-8 * x.scale);
        x.check_min("S_double_prime", d.S_double_prime, -1e-10 * x.scale);
    }
    x.file("_per_fibre.dat", per_fibre_dat(rep.per_fibre));
}

void qnec_job(Ctx& x) {
    const BMTState st{x.function("state")};
    const CutProfile c = x.profile("cut"), a = x.profile("deformation");
    const auto t = grid(x.raw(), "t_grid", x.where());
    const bool fd = x.flag("fd_check", true);
    const double fd_tol = x.num("fd_tolerance", 1e-4) * x.scale;
    auto r = entropy::qnec_sweep(st, c, a, t, x.spec, fd ? x.num("fd_step", 1e-3) : 0.0, fd_tol);

    std::string csv = "t,S,S_prime,S_double_prime,qnec_margin\n", s, s1, s2;
    int strict = 0;
    for (const auto& row : r.rows) {
        csv += fmt(row.t) + "," + fmt(row.S) + "," + fmt(row.S_prime) + "," + fmt(row.S_double_prime) + "," +
               fmt(row.qnec_margin) + "\n";
        s += fmt(row.t) + " " + fmt(row.S) + "\n";
        s1 += fmt(row.t) + " " + fmt(row.S_prime) + "\n";
        s2 += fmt(row.t) + " " + fmt(row.S_double_prime) + "\n";
        strict += row.strict;
    }
    x.out.results["points"] = r.rows.size();
    x.out.results["strict_points"] = strict;
    x.out.results["fd_checked"] = fd && std::any_of(r.rows.begin(), r.rows.end(), [](auto& q) { return q.fd_checked; });

    const double pf_t = x.num("per_fibre_t", 0.0);
    auto rep = entropy::nullcut_entropy(st, c + a.scaled(pf_t), x.spec);
    x.out.results["per_fibre_t"] = pf_t;
    x.out.results["transverse_nodes"] = rep.per_fibre.size();
    x.out.results["quadrature_error"] = rep.quadrature_error;

    x.check_min("min_S_double_prime", r.min_S_double_prime, -1e-10 * x.scale);
    if (fd) x.check("max_fd_deviation", r.max_fd_deviation, fd_tol);

    x.file(".csv", csv);
    x.file("_S.dat", s);
    x.file("_S_prime.dat", s1);
    x.file("_S_double_prime.dat", s2);
    x.file("_per_fibre.dat", per_fibre_dat(rep.per_fibre));
}

void anec_job(Ctx& x) {
    const BMTState st{x.function("state")};
    auto r = entropy::anec_identity(st, x.profile("cut"), x.profile("deformation"), x.sc.params, x.spec);
    x.out.results["route_a"] = r.route_a;
    x.out.results["route_b"] = r.route_b;
    x.out.results["route_c"] = r.route_c;
    x.out.results["t_min"] = r.t_min;
    x.out.results["t_max"] = r.t_max;
    x.out.results["reduced"] = r.reduced;
    x.check_min("route_b", r.route_b, 0.0);
    x.check("a_vs_b", r.residual_ab(), x.num("tolerance_ab", 1e-6) * x.scale);
    x.check("c_vs_b", r.residual_cb(), x.num("tolerance_cb", 1e-4) * x.scale);
}

void superadd_job(Ctx& x) {
    const BMTState st{x.function("state")};
    auto r = entropy::superadditivity_check(st, x.profile("cut1"), x.profile("cut2"), x.spec);
    x.out.results["S_union"] = r.S_union;
    x.out.results["S_intersection"] = r.S_intersection;
    x.out.results["S1"] = r.S1;
    x.out.results["S2"] = r.S2;
    x.out.results["residual"] = r.residual;
    const double m = r.max_S();
    x.check("relative_residual", m > 0.0 ? std::abs(r.residual) / m : std::abs(r.residual),
            x.num("tolerance", 1e-8) * x.scale);
}

DirectIntegralVector gaussian_family(Ctx& x) {
    const int tdim = x.sc.params.transverse_dim();
    nullcut::Box box(tdim, {-1.0, 1.0});
    if (x.raw().contains("box"))
        for (int d = 0; d < tdim; ++d) box[d] = {x.raw()["box"][d][0].get<double>(), x.raw()["box"][d][1].get<double>()};
    Json f = x.raw().contains("fibre") ? x.raw().at("fibre") : Json::object();
    const std::string w = x.where() + ".fibre";
    const double center = number_or(f, "center", 1.0, w), width = number_or(f, "width", 0.7, w),
                 k = number_or(f, "wavenumber", 1.5, w), tilt = number_or(f, "tilt", 0.3, w);
    DirectIntegralVector v;
    v.representation = oneparticle::Representation::spatial;
    v.params = x.sc.params;
    v.grid = numerics::ThetaGrid::from_spec(x.spec);
    v.box = box;
    v.nodes = oneparticle::spatial_nodes(box, x.spec);
    for (const auto& n : v.nodes) {
        double sx = 0.0;
        for (double p : n.point) sx += p;
        v.fibres.push_back(fibre::gaussian_fibre(x.spec, center + tilt * sx, width, k - sx, std::cos(sx)));
    }
    return v;
}

void modular_job(Ctx& x) {
    const CutProfile c = x.profile("cut");
    const double s = x.num("s", 0.1);
    const auto v = nullcut::make_nullcut_vector(gaussian_family(x), c);
    auto flow = [&](const nullcut::NullCutVector& u, double t) { return nullcut::modular_flow_nullcut(u, c, t, x.spec); };

    const auto fs = flow(v, s);
    const double n0 = v.vec.norm();
    x.out.results["norm"] = n0;
    x.out.results["s"] = s;
    x.check("unitarity", std::abs(fs.vec.norm() - n0) / n0, 1e-6 * x.scale);
    x.check("group_law", rel_dist(flow(flow(v, 0.5 * s), 0.5 * s).vec, fs.vec), 1e-6 * x.scale);
    x.check("inverse", rel_dist(flow(fs, -s).vec, v.vec), 1e-6 * x.scale);

    // T_C Delta_0^{is} T_C^{-1}
    auto back = nullcut::make_nullcut_vector(nullcut::distorted_translate(v.vec, c.scaled(-1.0)), CutProfile{});
    auto conj = nullcut::distorted_translate(nullcut::modular_flow_nullcut(back, CutProfile{}, s, x.spec).vec, c);
    x.check("conjugation", rel_dist(conj, fs.vec), 1e-10 * x.scale);

    const double eps = 1e-4;
    auto plus = flow(v, eps), minus = flow(v, -eps);
    auto fd = v.vec;
    for (std::size_t k = 0; k < fd.fibres.size(); ++k) {
        fd.fibres[k].source.reset();
        for (std::size_t j = 0; j < fd.fibres[k].values.size(); ++j)
            fd.fibres[k].values[j] =
                (plus.vec.fibres[k].values[j] - minus.vec.fibres[k].values[j]) / numerics::cplx(0.0, 2.0 * eps);
    }
    x.check("generator", rel_dist(fd, nullcut::modular_generator_apply(v, c, x.spec)), 5e-3 * x.scale);
}

void hsmi_job(Ctx& x) {
    const auto s = grid(x.raw(), "s_grid", x.where());
    auto r = nullcut::hsmi_support_witness(x.profile("cut1"), x.profile("cut2"), x.function("function"), s,
                                           x.sc.params, x.spec);
    std::string csv = "s,margin,fibre_flow_in_window\n";
    double min_margin = r.margins.empty() ? 0.0 : r.margins.front(), max_drop = 0.0;
    int leaks = 0;
    for (std::size_t i = 0; i < r.s_values.size(); ++i) {
        csv += fmt(r.s_values[i]) + "," + fmt(r.margins[i]) + "," + (r.fibre_flow_in_window[i] ? "1" : "0") + "\n";
        min_margin = std::min(min_margin, r.margins[i]);
        leaks += !r.fibre_flow_in_window[i];
    }
    // Margins are only compared in s order.
    std::vector<std::pair<double, double>> sorted;
    for (std::size_t i = 0; i < r.s_values.size(); ++i) sorted.push_back({r.s_values[i], r.margins[i]});
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& p, auto& q) { return p.first < q.first; });
    for (std::size_t i = 1; i < sorted.size(); ++i) max_drop = std::max(max_drop, sorted[i - 1].second - sorted[i].second);
    x.out.results["points"] = r.s_values.size();
    x.out.results["fibre_flow_left_window"] = leaks;
    x.out.residuals["min_margin"] = min_margin;
    x.out.residuals["max_decrease"] = max_drop;
    if (!r.positive()) x.fail("min_margin = " + fmt(min_margin) + " is not positive");
    if (!(max_drop <= 0.0)) x.fail("max_decrease residual " + fmt(max_drop) + ": margins decrease with s");
    x.file(".csv", csv);
}

void subspace_job(Ctx& x) {
    using namespace stdsubspace;
    const int count = x.integer("count", 20), fixed = x.integer("dimension", 0), seed = x.integer("seed", 1000);
    std::string csv = "index,dimension,relation_residual,entropy_deviation\n";
    double rel_max = 0.0, ent_max = 0.0;
    for (int i = 0; i < count; ++i) {
        const int n = fixed > 0 ? fixed : 1 + i % 6;
        auto h = make_subspace(random_spanning(n, static_cast<unsigned>(seed + 17 * i)));
        const double rel = verify_modular_relations(h).max();
        CVec v = remove_unit_spectrum(
            h, h.basis * RVec::LinSpaced(n, -1.0, 0.7 + 0.1 * (i % 20)).cast<std::complex<double>>());
        const double direct = -(v.dot(h.log_delta() * v)).real();
        const double ent = std::abs(entropy_cutting(h, v) - direct);
        rel_max = std::max(rel_max, rel);
        ent_max = std::max(ent_max, ent);
        csv += std::to_string(i) + "," + std::to_string(n) + "," + fmt(rel) + "," + fmt(ent) + "\n";
    }
    x.check("modular_relations", rel_max, 1e-8 * x.scale);
    x.check("entropy_formula", ent_max, 1e-8 * x.scale);

    auto h = make_subspace(random_spanning(2, static_cast<unsigned>(seed + 3)));
    auto k = make_subspace(random_spanning(2, static_cast<unsigned>(seed + 11)));
    auto tr = trotter_translation(h, k, x.num("trotter_t", 0.3), {8, 16, 32, 64, 128, 256});
    x.out.results["trotter_errors"] = tr.errors;
    x.check_min("trotter_order", tr.observed_order, 0.9);

    if (x.flag("truncated_fibre", true)) {
        const numerics::SmoothFn1D kf{{{1.0, numerics::SmoothBump{2.0, 1.0, 1.0, 1}}}};
        const double exact = fibre::halfline_entropy(kf, 0.0, x.spec);
        std::vector<double> devs;
        double worst_rise = 0.0;
        for (int n : {64, 128, 256}) {
            auto m = truncated_halfline_model(n, x.spec.theta_cutoff);
            devs.push_back(std::abs(entropy_cutting(m.subspace, sample_fibre(m, kf)) - exact));
            if (devs.size() > 1) worst_rise = std::max(worst_rise, devs.back() - devs[devs.size() - 2]);
        }
        x.out.results["truncated_points"] = {64, 128, 256};
        x.out.results["truncated_deviations"] = devs;
        x.check("truncated_rise", worst_rise, 0.0);
    }
    x.file(".csv", csv);
}

void zero_mode_job(Ctx& x) {
    std::vector<double> cutoffs{8.0, 9.0, 10.0, 11.0, 12.0};
    if (x.raw().contains("cutoffs")) cutoffs = grid(x.raw(), "cutoffs", x.where());
    auto r = oneparticle::zero_mode_diagnose(x.function("function"), x.sc.params, x.spec, cutoffs);
    std::string csv = "cutoff,truncated_norm\n";
    for (std::size_t i = 0; i < r.cutoffs.size(); ++i) csv += fmt(r.cutoffs[i]) + "," + fmt(r.truncated_norms[i]) + "\n";
    x.out.results["zero_mean"] = r.zero_mean();
    x.out.results["term_integrals"] = r.term_integrals;
    x.out.results["zero_mode_weight"] = r.zero_mode_weight;
    x.out.results["growth_rates"] = r.growth_rates;
    if (r.zero_mean()) {
        double change = 0.0;
        for (double n : r.truncated_norms) change = std::max(change, std::abs(n - r.truncated_norms.front()));
        x.check("norm_change", change, 1e-8 * x.scale);
    } else {
        double ratio = 1e300;
        for (double g : r.growth_rates) ratio = std::min(ratio, g / r.zero_mode_weight);
        x.check_min("growth_ratio", ratio, 0.9);
    }
    x.file(".csv", csv);
}

}  // namespace

JobResult run_job(const Scenario& sc, const JobSpec& job, double tol_scale) {
    Ctx x{sc, job, tol_scale, sc.quad.scaled_tolerances(tol_scale), {}};
    try {
        if (job.kind == "entropy") entropy_job(x);
        else if (job.kind == "qnec-sweep") qnec_job(x);
        else if (job.kind == "anec") anec_job(x);
        else if (job.kind == "superadd") superadd_job(x);
        else if (job.kind == "modular-check") modular_job(x);
        else if (job.kind == "hsmi-witness") hsmi_job(x);
        else if (job.kind == "subspace-lab") subspace_job(x);
        else if (job.kind == "zero-mode") zero_mode_job(x);
        else throw ScenarioError("unknown job kind '" + job.kind + "'");
    } catch (const ScenarioError& e) {
        return {JobStatus::invalid, e.what(), Json::object(), x.out.residuals, {}};
    } catch (const ProfileOrderViolation& e) {
        return {JobStatus::invalid, e.what(), Json::object(), x.out.residuals, {}};
    } catch (const std::exception& e) {
        return {JobStatus::error, e.what(), Json::object(), x.out.residuals, {}};
    }
    return x.out;
}

}  // namespace nullplane::cli
