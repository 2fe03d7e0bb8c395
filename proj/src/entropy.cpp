#include "nullplane/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nullplane/fibre.hpp"

namespace nullplane::entropy {

using numerics::KahanSum;
using numerics::kPi;
using numerics::kTwoPi;
using numerics::SmoothBump;
using numerics::SmoothFn1D;

namespace {

// Finite differences in t divide quadrature noise by step^2, so fibre integrals are
// pushed close to round-off.
QuadratureSpec tight(const QuadratureSpec& spec) {
    QuadratureSpec t = spec;
    t.abs_tol = std::min(spec.abs_tol, 1e-16);
    t.rel_tol = std::min(spec.rel_tol, 1e-13);
    return t;
}

// int_{lo}^inf k^2
double tail_energy(const SmoothFn1D& k, double lo, const QuadratureSpec& spec) {
    auto s = k.support();
    if (!s) return 0.0;
    double a = std::max(lo, s->first);
    if (!(s->second > a)) return 0.0;
    return numerics::integrate_1d(
               [&](double x) {
                   double v = k.value(x);
                   return v * v;
               },
               a, s->second, spec, k.breakpoints())
        .value;
}

template <class F>
double transverse_sum(const TransverseQuadrature& grid, F&& per_node) {
    std::vector<double> vals(grid.points.size());
    numerics::parallel_for(vals.size(), [&](std::size_t k) { vals[k] = per_node(k); });
    KahanSum<double> acc;
    for (std::size_t k = 0; k < vals.size(); ++k) acc.add(grid.weights[k] * vals[k]);
    return acc.value();
}

void require_nonneg_profile(const CutProfile& a, const TransverseQuadrature& grid, const char* what) {
    if (!a.nonneg_flag()) {
        std::ostringstream os;
        os << what << ": the deformation profile must carry the nonnegativity flag";
        throw ProfileOrderViolation(os.str());
    }
    a.require_nonneg(grid.points, what);
}

int half_points(int p) { return std::max(16, (p / 32) * 16); }

double second_derivative_on(const BMTState& state, const CutProfile& c, const CutProfile& a, double t,
                            const TransverseQuadrature& grid) {
    return kPi * transverse_sum(grid, [&](std::size_t k) {
        const auto& x = grid.points[k];
        double ak = a(x);
        if (ak == 0.0) return 0.0;
        double hv = state.h.fibre_source(x).value(c(x) + t * ak);
        return ak * ak * hv * hv;
    });
}

}  // namespace

void BMTState::validate(int transverse_dim) const { h.validate(transverse_dim); }

double BMTState::primitive(double x_plus, const std::vector<double>& x_perp, const QuadratureSpec& spec) const {
    return numerics::primitive(h.fibre_source(x_perp), x_plus, spec);
}

ThinTestFunction BMTState::reduced(const CutProfile& c, double w) const {
    if (!(w > 0.0)) throw Error("BMTState::reduced: compensator width must be positive");
    ThinTestFunction out = h;
    const SmoothBump unit{-1.5 * w, 0.5 * w, 1.0, 0};
    const double unit_integral = unit.integral();
    for (const auto& t : h.terms) {
        if (t.u.structurally_zero_mean()) continue;
        double m = t.u.zero_mode();
        if (m == 0.0) continue;
        oneparticle::ThinTerm comp;
        comp.u = SmoothFn1D{{{-m / unit_integral, unit}}};
        comp.v = t.v;
        comp.shift = c;
        out.terms.push_back(std::move(comp));
    }
    return out;
}

cplx weyl_overlap(const DirectIntegralVector& xi, const DirectIntegralVector& eta) {
    return std::exp(-0.5 * (xi.norm2() + eta.norm2()) + xi.inner(eta));
}

TransverseQuadrature entropy_grid(const BMTState& state, const std::vector<const CutProfile*>& profiles,
                                  int points_per_dim) {
    auto box = state.h.transverse_support();
    if (!box) return {};
    const int dims = static_cast<int>(box->size());
    std::vector<std::vector<double>> bps(dims);
    for (const auto& t : state.h.terms) {
        for (int d = 0; d < dims && d < static_cast<int>(t.v.size()); ++d) {
            auto b = t.v[d].breakpoints();
            bps[d].insert(bps[d].end(), b.begin(), b.end());
        }
        if (t.shift)
            for (int d = 0; d < dims; ++d) {
                auto b = t.shift->breakpoints(d);
                bps[d].insert(bps[d].end(), b.begin(), b.end());
            }
    }
    for (const auto* p : profiles)
        for (int d = 0; d < dims; ++d) {
            auto b = p->breakpoints(d);
            bps[d].insert(bps[d].end(), b.begin(), b.end());
        }
    return nullcut::transverse_quadrature(*box, points_per_dim, bps);
}

double nullcut_entropy_on(const BMTState& state, const CutProfile& c, const TransverseQuadrature& grid,
                          const QuadratureSpec& spec) {
    const auto q = tight(spec);
    return transverse_sum(grid, [&](std::size_t k) {
        const auto& x = grid.points[k];
        return fibre::halfline_entropy(state.h.fibre_source(x), c(x), q);
    });
}

EntropyReport nullcut_entropy(const BMTState& state, const CutProfile& c, const QuadratureSpec& spec) {
    EntropyReport r;
    const auto grid = entropy_grid(state, {&c}, spec.transverse_points_per_dim);
    if (grid.points.empty()) return r;
    const auto q = tight(spec);
    r.per_fibre.resize(grid.points.size());
    numerics::parallel_for(grid.points.size(), [&](std::size_t k) {
        const auto& x = grid.points[k];
        r.per_fibre[k] = {x, grid.weights[k], fibre::halfline_entropy(state.h.fibre_source(x), c(x), q)};
    });
    KahanSum<double> acc;
    for (const auto& f : r.per_fibre) acc.add(f.weight * f.entropy);
    r.S = acc.value();
    const auto coarse = entropy_grid(state, {&c}, half_points(spec.transverse_points_per_dim));
    r.quadrature_error = std::abs(r.S - nullcut_entropy_on(state, c, coarse, spec));
    return r;
}

Derivatives entropy_derivatives_on(const BMTState& state, const CutProfile& c, const CutProfile& a, double t,
                                   const TransverseQuadrature& grid, const QuadratureSpec& spec) {
    const auto q = tight(spec);
    Derivatives d;
    d.S_prime = -kPi * transverse_sum(grid, [&](std::size_t k) {
        const auto& x = grid.points[k];
        double ak = a(x);
        if (ak == 0.0) return 0.0;
        return ak * tail_energy(state.h.fibre_source(x), c(x) + t * ak, q);
    });
    d.S_double_prime = second_derivative_on(state, c, a, t, grid);
    return d;
}

Derivatives entropy_derivatives(const BMTState& state, const CutProfile& c, const CutProfile& a, double t,
                                const QuadratureSpec& spec) {
    const auto grid = entropy_grid(state, {&c, &a}, spec.transverse_points_per_dim);
    if (grid.points.empty()) return {};
    require_nonneg_profile(a, grid, "entropy_derivatives");
    return entropy_derivatives_on(state, c, a, t, grid, spec);
}

double energy_null_cut(const BMTState& state, const CutProfile& a, const CutProfile& c, const QuadratureSpec& spec) {
    const auto grid = entropy_grid(state, {&c, &a}, spec.transverse_points_per_dim);
    if (grid.points.empty()) return 0.0;
    require_nonneg_profile(a, grid, "energy_null_cut");
    const auto q = tight(spec);
    return transverse_sum(grid, [&](std::size_t k) {
        const auto& x = grid.points[k];
        double ak = a(x);
        if (ak == 0.0) return 0.0;
        return ak * tail_energy(state.h.fibre_source(x), c(x), q);
    });
}

QnecReport qnec_sweep(const BMTState& state, const CutProfile& c, const CutProfile& a,
                      const std::vector<double>& t_grid, const QuadratureSpec& spec, double fd_step,
                      double fd_rel_tol) {
    QnecReport r;
    const auto grid = entropy_grid(state, {&c, &a}, spec.transverse_points_per_dim);
    if (!grid.points.empty()) require_nonneg_profile(a, grid, "qnec_sweep");
    auto entropy_at = [&](double t) {
        if (grid.points.empty()) return 0.0;
        return nullcut_entropy_on(state, c + a.scaled(t), grid, spec);
    };
    double max_s2 = 0.0;
    for (double t : t_grid) {
        QnecRow row{};
        row.t = t;
        row.S = entropy_at(t);
        Derivatives d;
        if (!grid.points.empty()) d = entropy_derivatives_on(state, c, a, t, grid, spec);
        row.S_prime = d.S_prime;
        row.S_double_prime = d.S_double_prime;
        row.qnec_margin = d.S_double_prime / kTwoPi;
        row.strict = d.S_double_prime > 1e-10;
        max_s2 = std::max(max_s2, d.S_double_prime);
        r.rows.push_back(row);
    }
    r.min_S_double_prime = r.rows.empty() ? 0.0 : r.rows.front().S_double_prime;
    for (auto& row : r.rows) {
        r.min_S_double_prime = std::min(r.min_S_double_prime, row.S_double_prime);
        if (row.S_double_prime < -1e-10) r.qnec_holds = false;
    }
    if (max_s2 == 0.0 || fd_step <= 0.0) return r;
    for (auto& row : r.rows) {
        auto second = [&](double h) {
            return (entropy_at(row.t + h) - 2.0 * row.S + entropy_at(row.t - h)) / (h * h);
        };
        const double coarse = second(fd_step), fine = second(0.5 * fd_step);
        row.S_double_prime_fd = (4.0 * fine - coarse) / 3.0;
        row.fd_checked = true;
        const double diff = std::abs(row.S_double_prime_fd - row.S_double_prime);
        const bool edge = row.S_double_prime < 1e-3 * max_s2;
        row.fd_deviation = edge ? diff / max_s2 : diff / std::abs(row.S_double_prime);
        r.max_fd_deviation = std::max(r.max_fd_deviation, row.fd_deviation);
        if (row.fd_deviation > fd_rel_tol) r.fd_consistent = false;
    }
    return r;
}

double AnecReport::residual_ab() const {
    return route_b == 0.0 ? std::abs(route_a) : std::abs(route_a - route_b) / std::abs(route_b);
}

double AnecReport::residual_cb() const {
    return route_b == 0.0 ? std::abs(route_c) : std::abs(route_c - route_b) / std::abs(route_b);
}

AnecReport anec_identity(const BMTState& state, const CutProfile& c, const CutProfile& a,
                         const MassShellParams& params, const QuadratureSpec& spec) {
    AnecReport r;
    const BMTState red{state.reduced(c)};
    r.reduced = red.h.terms.size() != state.h.terms.size();
    const auto grid = entropy_grid(red, {&c, &a}, spec.transverse_points_per_dim);
    if (grid.points.empty()) return r;
    require_nonneg_profile(a, grid, "anec_identity");
    const auto q = tight(spec);

    // (b)
    r.route_b = 0.5 * transverse_sum(grid, [&](std::size_t k) {
        const auto& x = grid.points[k];
        double ak = a(x);
        if (ak == 0.0) return 0.0;
        return ak * tail_energy(red.h.fibre_source(x), -1e300, q);
    });
    if (r.route_b == 0.0) return r;

    // (a): the window where C + tA sweeps across supp h, padded by 20% on each side.
    std::vector<double> edges;
    double t_lo = 1e300, t_hi = -1e300;
    for (const auto& x : grid.points) {
        double ak = a(x);
        if (ak <= 0.0) continue;
        const auto src = red.h.fibre_source(x);
        auto s = src.support();
        if (!s) continue;
        // Every bump edge: supports far apart leave narrow pulses in t.
        for (double b : src.breakpoints()) edges.push_back((b - c(x)) / ak);
        t_lo = std::min(t_lo, (s->first - c(x)) / ak);
        t_hi = std::max(t_hi, (s->second - c(x)) / ak);
    }
    const double pad = 0.2 * (t_hi - t_lo);
    r.t_min = t_lo - pad;
    r.t_max = t_hi + pad;
    // Integrate in u = (t - t_min) / scale so that the window spans 64 units whatever its width.
    const double scale = (r.t_max - r.t_min) / 64.0;
    for (auto& e : edges) e = (e - r.t_min) / scale;
    QuadratureSpec tq = spec;
    tq.abs_tol = 1e-14 * r.route_b;
    tq.rel_tol = 1e-11;
    auto integral = numerics::integrate_1d(
        [&](double u) {
            return second_derivative_on(red, c, a, r.t_min + scale * u, grid);
        },
        0.0, 64.0, tq, edges);
    r.route_a = scale * integral.value / kTwoPi;

    // (c): U_A(s) acts fibre-wise as the distorted translation by sA.
    const auto hv = oneparticle::spatial_restrict(red.h, params, spec);
    auto im_derivative = [&](double ds) {
        cplx up = weyl_overlap(hv, nullcut::distorted_translate(hv, a.scaled(ds)));
        cplx down = weyl_overlap(hv, nullcut::distorted_translate(hv, a.scaled(-ds)));
        return (up - down).imag() / (2.0 * ds);
    };
    const double ds = 1e-3;
    r.route_c = (4.0 * im_derivative(0.5 * ds) - im_derivative(ds)) / 3.0;
    return r;
}

double SuperaddReport::max_S() const { return std::max({S_union, S_intersection, S1, S2}); }

SuperaddReport superadditivity_check(const BMTState& state, const CutProfile& c1, const CutProfile& c2,
                                     const QuadratureSpec& spec) {
    SuperaddReport r;
    // One grid for all four cuts: the identity then holds node by node.
    const auto grid = entropy_grid(state, {&c1, &c2}, spec.transverse_points_per_dim);
    if (grid.points.empty()) return r;
    r.S_union = nullcut_entropy_on(state, CutProfile::min(c1, c2), grid, spec);
    r.S_intersection = nullcut_entropy_on(state, CutProfile::max(c1, c2), grid, spec);
    r.S1 = nullcut_entropy_on(state, c1, grid, spec);
    r.S2 = nullcut_entropy_on(state, c2, grid, spec);
    r.residual = (r.S_union + r.S_intersection) - (r.S1 + r.S2);
    return r;
}

}  // namespace nullplane::entropy
