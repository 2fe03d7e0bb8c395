#include "scenario.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <cctype>
#include <iterator>
#include <set>
#include <sstream>

namespace nullplane::cli {

using nullcut::CutProfile;
using nullcut::TransverseBump;
using numerics::SmoothBump;
using numerics::SmoothFn1D;
using oneparticle::ThinTerm;
using oneparticle::ThinTestFunction;

const std::vector<std::pair<std::string, std::string>>& job_kinds() {
    static const std::vector<std::pair<std::string, std::string>> kinds{
        {"entropy", "null-cut relative entropy of a coherent state, per-fibre breakdown"},
        {"qnec-sweep", "S, S', S'' along C + tA with finite-difference cross-checks"},
        {"anec", "three routes to the averaged null energy"},
        {"superadd", "strong superadditivity residual for two cuts"},
        {"modular-check", "null-cut modular flow: unitarity, group law, generator"},
        {"hsmi-witness", "support margins of witnesses under the C1 modular flow"},
        {"subspace-lab", "finite-dimensional standard subspaces: modular relations, entropy, Trotter"},
        {"zero-mode", "truncated-norm growth of thin test functions near p_- = 0"},
    };
    return kinds;
}

namespace {

constexpr double kMaxMagnitude = 1e3;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ScenarioError(where + ": " + what);
}

void allow_keys(const Json& j, const std::set<std::string>& keys, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) fail(where, "unknown field '" + k + "'");
}

std::string hash_bytes(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

int integer(const Json& j, const std::string& key, int fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail(where, "'" + key + "' must be an integer");
    return v.get<int>();
}

SmoothBump parse_bump(const Json& j, const std::string& where, double* coefficient) {
    allow_keys(j, {"center", "half_width", "amplitude", "order", "coefficient"}, where);
    SmoothBump b;
    b.center = number(j, "center", where);
    b.half_width = number(j, "half_width", where);
    b.amplitude = number_or(j, "amplitude", 1.0, where);
    b.derivative_order = integer(j, "order", 0, where);
    if (coefficient) *coefficient = number_or(j, "coefficient", 1.0, where);
    try {
        b.validate();
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    return b;
}

SmoothFn1D parse_fn(const Json& j, const std::string& where) {
    SmoothFn1D f;
    const Json list = j.is_array() ? j : Json::array({j});
    if (list.empty()) fail(where, "needs at least one bump");
    for (std::size_t i = 0; i < list.size(); ++i) {
        double c = 1.0;
        auto b = parse_bump(list[i], where + "[" + std::to_string(i) + "]", &c);
        f.terms.push_back({c, b});
    }
    return f;
}

}  // namespace

double number(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(where, "missing '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) fail(where, "'" + key + "' must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x) || std::abs(x) > kMaxMagnitude)
        fail(where, "'" + key + "' must be finite with magnitude at most 1e3");
    return x;
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

std::vector<double> grid(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(where, "missing '" + key + "'");
    const auto& g = j.at(key);
    std::vector<double> out;
    if (g.is_array()) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number() || !std::isfinite(g[i].get<double>()) || std::abs(g[i].get<double>()) > kMaxMagnitude)
                fail(where, "'" + key + "' entries must be finite numbers with magnitude at most 1e3");
            out.push_back(g[i].get<double>());
        }
    } else if (g.is_object()) {
        const std::string w = where + "." + key;
        allow_keys(g, {"from", "to", "points"}, w);
        double a = number(g, "from", w), b = number(g, "to", w);
        int n = integer(g, "points", 0, w);
        if (n < 1 || n > 100000) fail(w, "'points' must be between 1 and 100000");
        if (n == 1) return {a};
        for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? b : a + (b - a) * i / (n - 1));
    } else {
        fail(where, "'" + key + "' must be a list or {from, to, points}");
    }
    if (out.empty()) fail(where, "'" + key + "' is empty");
    return out;
}

namespace {

void parse_params(const Json& j, Scenario& s) {
    if (j.contains("params")) {
        const auto& p = j.at("params");
        allow_keys(p, {"mass", "spacetime_dim"}, "params");
        s.params.mass = number_or(p, "mass", 1.0, "params");
        s.params.spacetime_dim = integer(p, "spacetime_dim", 2, "params");
    }
    try {
        s.params.validate();
    } catch (const std::exception& e) {
        fail("params", e.what());
    }
    // Tensor grids grow as points^(D-1); larger D is out of reach anyway.
    if (s.params.spacetime_dim > 4) fail("params", "spacetime_dim must be at most 4");
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        const std::string w = "quadrature";
        allow_keys(q, {"compact_rule", "theta_cutoff", "theta_points", "transverse_points_per_dim", "abs_tol",
                       "rel_tol", "momentum_cutoff"},
                   w);
        auto& spec = s.quad;
        spec.compact_rule = integer(q, "compact_rule", spec.compact_rule, w);
        spec.theta_cutoff = number_or(q, "theta_cutoff", spec.theta_cutoff, w);
        spec.theta_points = integer(q, "theta_points", spec.theta_points, w);
        spec.transverse_points_per_dim = integer(q, "transverse_points_per_dim", spec.transverse_points_per_dim, w);
        spec.abs_tol = number_or(q, "abs_tol", spec.abs_tol, w);
        spec.rel_tol = number_or(q, "rel_tol", spec.rel_tol, w);
        spec.momentum_cutoff = number_or(q, "momentum_cutoff", spec.momentum_cutoff, w);
    }
    if (s.quad.theta_points > 65536 || s.quad.transverse_points_per_dim > 4096 || s.quad.compact_rule > 4096)
        fail("quadrature", "grid sizes are capped at theta_points 65536, transverse_points_per_dim 4096, compact_rule 4096");
    try {
        s.quad.validate();
    } catch (const std::exception& e) {
        fail("quadrature", e.what());
    }
}

CutProfile parse_profile(const std::string& name, const Json& all, std::map<std::string, CutProfile>& done,
                         std::set<std::string>& visiting, int tdim) {
    if (auto it = done.find(name); it != done.end()) return it->second;
    const std::string where = "profiles." + name;
    if (!all.contains(name)) fail(where, "undefined profile");
    if (visiting.count(name)) fail(where, "profile definitions form a cycle");
    visiting.insert(name);
    const auto& j = all.at(name);
    if (!j.is_object()) fail(where, "expected an object");
    auto ref = [&](const Json& r) {
        if (!r.is_string()) fail(where, "profile references must be names");
        return parse_profile(r.get<std::string>(), all, done, visiting, tdim);
    };
    auto list = [&](const char* key) {
        const auto& l = j.at(key);
        if (!l.is_array() || l.size() < 2) fail(where, std::string("'") + key + "' needs at least two names");
        std::vector<CutProfile> out;
        for (const auto& r : l) out.push_back(ref(r));
        return out;
    };
    const bool nonneg = j.contains("nonneg") && j.at("nonneg").is_boolean() && j.at("nonneg").get<bool>();
    if (j.contains("nonneg") && !j.at("nonneg").is_boolean()) fail(where, "'nonneg' must be true or false");
    CutProfile p;
    try {
        if (j.contains("constant")) {
            allow_keys(j, {"constant", "nonneg"}, where);
            p = CutProfile::constant(number(j, "constant", where), nonneg);
        } else if (j.contains("min") || j.contains("max") || j.contains("sum")) {
            const char* key = j.contains("min") ? "min" : j.contains("max") ? "max" : "sum";
            allow_keys(j, {key, "nonneg"}, where);
            auto parts = list(key);
            p = parts[0];
            for (std::size_t i = 1; i < parts.size(); ++i)
                p = std::string(key) == "min"   ? CutProfile::min(p, parts[i])
                    : std::string(key) == "max" ? CutProfile::max(p, parts[i])
                                                : p + parts[i];
            if (nonneg) p = p.with_nonneg_flag();
        } else if (j.contains("scale")) {
            allow_keys(j, {"scale", "by", "nonneg"}, where);
            p = ref(j.at("scale")).scaled(number(j, "by", where));
            if (nonneg) p = p.with_nonneg_flag();
        } else {
            allow_keys(j, {"base", "bumps", "nonneg"}, where);
            std::vector<TransverseBump> bumps;
            if (j.contains("bumps")) {
                const auto& bl = j.at("bumps");
                if (!bl.is_array()) fail(where, "'bumps' must be a list");
                for (std::size_t i = 0; i < bl.size(); ++i) {
                    const std::string w = where + ".bumps[" + std::to_string(i) + "]";
                    allow_keys(bl[i], {"coefficient", "factors"}, w);
                    TransverseBump tb;
                    tb.coefficient = number_or(bl[i], "coefficient", 1.0, w);
                    if (!bl[i].contains("factors") || !bl[i].at("factors").is_array())
                        fail(w, "'factors' must be a list with one bump per transverse coordinate");
                    const auto& fs = bl[i].at("factors");
                    if (static_cast<int>(fs.size()) != tdim)
                        fail(w, "needs " + std::to_string(tdim) + " factor(s), one per transverse coordinate");
                    for (std::size_t d = 0; d < fs.size(); ++d)
                        tb.factors.push_back(parse_bump(fs[d], w + ".factors[" + std::to_string(d) + "]", nullptr));
                    bumps.push_back(std::move(tb));
                }
            }
            p = CutProfile(number_or(j, "base", 0.0, where), std::move(bumps), nonneg);
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    visiting.erase(name);
    done[name] = p;
    return p;
}

ThinTestFunction parse_function(const std::string& name, const Json& j, const Scenario& s, int tdim) {
    const std::string where = "functions." + name;
    allow_keys(j, {"terms"}, where);
    if (!j.contains("terms") || !j.at("terms").is_array()) fail(where, "'terms' must be a list");
    ThinTestFunction g;
    const auto& terms = j.at("terms");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string w = where + ".terms[" + std::to_string(i) + "]";
        const auto& t = terms[i];
        allow_keys(t, {"u", "v", "shift"}, w);
        if (!t.contains("u")) fail(w, "missing 'u'");
        ThinTerm term;
        term.u = parse_fn(t.at("u"), w + ".u");
        if (tdim > 0) {
            if (!t.contains("v") || !t.at("v").is_array() || static_cast<int>(t.at("v").size()) != tdim)
                fail(w, "'v' must list " + std::to_string(tdim) + " transverse factor(s)");
            for (int d = 0; d < tdim; ++d) term.v.push_back(parse_fn(t.at("v")[d], w + ".v[" + std::to_string(d) + "]"));
        }
        if (t.contains("shift")) {
            if (!t.at("shift").is_string()) fail(w, "'shift' must name a profile");
            auto it = s.profiles.find(t.at("shift").get<std::string>());
            if (it == s.profiles.end()) fail(w, "undefined profile '" + t.at("shift").get<std::string>() + "'");
            term.shift = it->second;
        }
        g.terms.push_back(std::move(term));
    }
    try {
        g.validate(tdim);
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    return g;
}

struct KindRules {
    std::set<std::string> required, optional;
    std::set<std::string> function_refs, profile_refs, nonneg_refs;
};

const std::map<std::string, KindRules>& rules() {
    static const std::map<std::string, KindRules> r{
        {"entropy", {{"state", "cut"}, {"deformation", "t"}, {"state"}, {"cut", "deformation"}, {"deformation"}}},
        {"qnec-sweep",
         {{"state", "cut", "deformation", "t_grid"},
          {"fd_check", "fd_step", "fd_tolerance", "per_fibre_t"},
          {"state"},
          {"cut", "deformation"},
          {"deformation"}}},
        {"anec",
         {{"state", "cut", "deformation"}, {"tolerance_ab", "tolerance_cb"}, {"state"}, {"cut", "deformation"},
          {"deformation"}}},
        {"superadd", {{"state", "cut1", "cut2"}, {"tolerance"}, {"state"}, {"cut1", "cut2"}, {}}},
        {"modular-check", {{"cut"}, {"s", "box", "fibre"}, {}, {"cut"}, {}}},
        {"hsmi-witness", {{"function", "cut1", "cut2", "s_grid"}, {}, {"function"}, {"cut1", "cut2"}, {}}},
        {"subspace-lab", {{}, {"dimension", "count", "seed", "trotter_t", "truncated_fibre"}, {}, {}, {}}},
        {"zero-mode", {{"function"}, {"cutoffs"}, {"function"}, {}, {}}},
    };
    return r;
}

bool valid_stem(const std::string& s) {
    if (s.empty() || s == "summary" || s[0] == '.') return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

JobSpec parse_job(const Json& j, std::size_t index, const Scenario& s, std::set<std::string>& names,
                  std::set<std::string>& outputs) {
    std::string where = "jobs[" + std::to_string(index) + "]";
    if (!j.is_object()) fail(where, "expected an object");
    if (!j.contains("kind") || !j.at("kind").is_string()) fail(where, "missing 'kind'");
    if (!j.contains("name") || !j.at("name").is_string()) fail(where, "missing 'name'");
    JobSpec job;
    job.kind = j.at("kind").get<std::string>();
    job.name = j.at("name").get<std::string>();
    where += " (" + job.name + ")";
    auto rit = rules().find(job.kind);
    if (rit == rules().end()) fail(where, "unknown job kind '" + job.kind + "'");
    if (!names.insert(job.name).second) fail(where, "duplicate job name");
    const auto& rule = rit->second;
    std::set<std::string> allowed{"kind", "name", "output"};
    allowed.insert(rule.required.begin(), rule.required.end());
    allowed.insert(rule.optional.begin(), rule.optional.end());
    allow_keys(j, allowed, where);
    for (const auto& k : rule.required)
        if (!j.contains(k)) fail(where, "missing '" + k + "'");
    job.output = j.contains("output") && j.at("output").is_string() ? j.at("output").get<std::string>() : job.name;
    if (!valid_stem(job.output)) fail(where, "output stem '" + job.output + "' must use letters, digits, '_', '-', '.'");
    if (!outputs.insert(job.output).second) fail(where, "output stem '" + job.output + "' is used twice");
    for (const auto& k : rule.function_refs) {
        if (!j.contains(k)) continue;
        if (!j.at(k).is_string() || !s.functions.count(j.at(k).get<std::string>()))
            fail(where, "'" + k + "' refers to undefined function '" + j.at(k).dump() + "'");
    }
    for (const auto& k : rule.profile_refs) {
        if (!j.contains(k)) continue;
        if (!j.at(k).is_string() || !s.profiles.count(j.at(k).get<std::string>()))
            fail(where, "'" + k + "' refers to undefined profile " + j.at(k).dump());
    }
    for (const auto& k : rule.nonneg_refs)
        if (j.contains(k) && !s.profiles.at(j.at(k).get<std::string>()).nonneg_flag())
            fail(where, "deformation profile '" + j.at(k).get<std::string>() + "' must be declared \"nonneg\": true");

    // Numeric fields.
    if (j.contains("t")) number(j, "t", where);
    if (j.contains("t_grid")) grid(j, "t_grid", where);
    if (j.contains("per_fibre_t")) number(j, "per_fibre_t", where);
    for (const char* k : {"fd_step", "fd_tolerance", "tolerance_ab", "tolerance_cb", "tolerance"})
        if (j.contains(k) && !(number(j, k, where) > 0.0)) fail(where, std::string("'") + k + "' must be > 0");
    for (const char* k : {"fd_check", "truncated_fibre"})
        if (j.contains(k) && !j.at(k).is_boolean()) fail(where, std::string("'") + k + "' must be true or false");
    if (j.contains("s_grid"))
        for (double x : grid(j, "s_grid", where))
            if (x < 0.0) fail(where, "'s_grid' values must be >= 0");
    if (j.contains("s")) number(j, "s", where);
    if (j.contains("cutoffs")) {
        auto c = grid(j, "cutoffs", where);
        if (c.size() < 2) fail(where, "'cutoffs' needs at least two values");
        for (std::size_t i = 0; i < c.size(); ++i)
            if (!(c[i] > 0.0) || (i > 0 && !(c[i] > c[i - 1]))) fail(where, "'cutoffs' must be positive and increasing");
    }
    if (j.contains("dimension")) {
        int d = integer(j, "dimension", 0, where);
        if (d < 1 || d > 6) fail(where, "'dimension' must be between 1 and 6");
    }
    if (j.contains("count")) {
        int n = integer(j, "count", 0, where);
        if (n < 1 || n > 1000) fail(where, "'count' must be between 1 and 1000");
    }
    if (j.contains("seed") && integer(j, "seed", 0, where) < 0) fail(where, "'seed' must be >= 0");
    if (j.contains("trotter_t")) number(j, "trotter_t", where);
    if (j.contains("box")) {
        const auto& b = j.at("box");
        const int tdim = s.params.spacetime_dim - 1;
        if (!b.is_array() || static_cast<int>(b.size()) != tdim) fail(where, "'box' needs one [lo, hi] per coordinate");
        for (const auto& r : b)
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number() ||
                !(r[1].get<double>() > r[0].get<double>()) || std::abs(r[0].get<double>()) > kMaxMagnitude ||
                std::abs(r[1].get<double>()) > kMaxMagnitude)
                fail(where, "'box' entries must be [lo, hi] with lo < hi");
    }
    if (j.contains("fibre")) {
        const auto& f = j.at("fibre");
        allow_keys(f, {"center", "width", "wavenumber", "tilt"}, where + ".fibre");
        if (f.contains("width") && !(number(f, "width", where + ".fibre") > 0.0)) fail(where, "fibre width must be > 0");
        for (const char* k : {"center", "wavenumber", "tilt"}) number_or(f, k, 0.0, where + ".fibre");
    }
    job.raw = j;
    return job;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path + ": cannot open file");
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    Json j;
    try {
        j = Json::parse(bytes);
    } catch (const Json::parse_error& e) {
        throw ScenarioError(path + ": " + e.what());
    }
    Scenario s;
    s.hash = hash_bytes(bytes);
    allow_keys(j, {"name", "params", "quadrature", "functions", "profiles", "jobs"}, "scenario");
    s.name = j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : path;
    parse_params(j, s);
    const int tdim = s.params.spacetime_dim - 1;

    if (j.contains("profiles")) {
        const auto& ps = j.at("profiles");
        if (!ps.is_object()) fail("profiles", "expected an object");
        std::set<std::string> visiting;
        for (const auto& [name, v] : ps.items()) parse_profile(name, ps, s.profiles, visiting, tdim);
    }
    if (j.contains("functions")) {
        const auto& fs = j.at("functions");
        if (!fs.is_object()) fail("functions", "expected an object");
        for (const auto& [name, v] : fs.items()) s.functions[name] = parse_function(name, v, s, tdim);
    }
    if (j.contains("jobs")) {
        const auto& js = j.at("jobs");
        if (!js.is_array()) fail("jobs", "expected a list");
        std::set<std::string> names, outputs;
        for (std::size_t i = 0; i < js.size(); ++i) s.jobs.push_back(parse_job(js[i], i, s, names, outputs));
    }
    return s;
}

}  // namespace nullplane::cli
