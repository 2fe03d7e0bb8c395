#include "nullplane/fibre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullplane::fibre {

using numerics::KahanSum;
using numerics::kPi;
using numerics::kTwoPi;

double FibreVector::norm2() const { return numerics::grid_norm2(values, grid) / kTwoPi; }

double FibreVector::norm() const { return std::sqrt(norm2()); }

cplx FibreVector::inner(const FibreVector& other) const {
    if (!(grid == other.grid)) throw RepresentationMismatch("FibreVector::inner: grids differ");
    return numerics::grid_inner(values, other.values, grid) / kTwoPi;
}

IntervalSubspaceTag::IntervalSubspaceTag(double lo, double hi) : a(lo), b(hi) {
    if (!(lo < hi)) throw std::invalid_argument("IntervalSubspaceTag: need a < b");
}

bool IntervalSubspaceTag::contains_support(const SmoothFn1D& g) const {
    auto s = g.support();
    return !s || (s->first >= a && s->second <= b);
}

void check_window(const std::vector<cplx>& values, const QuadratureSpec& spec, const char* what) {
    double leak = 1e3 * spec.abs_tol;
    double l = std::norm(values.front()), r = std::norm(values.back());
    if (l > leak || r > leak) {
        std::ostringstream os;
        os << what << ": intensity at the theta' window ends (" << l << ", " << r << ") exceeds "
           << leak;
        throw BoundaryLeak(os.str());
    }
}

FibreVector zero_fibre(const QuadratureSpec& spec) {
    FibreVector f;
    f.grid = ThetaGrid::from_spec(spec);
    f.values.assign(f.grid.size, 0.0);
    f.source = SmoothFn1D{};
    return f;
}

std::vector<cplx> sample_transform(const SmoothFn1D& g, const ThetaGrid& grid) {
    std::vector<cplx> v(grid.size);
    if (g.empty()) return v;
    for (int j = 0; j < grid.size; ++j) v[j] = g.fourier(std::exp(-grid.node(j)));
    return v;
}

FibreVector make_fibre(const SmoothFn1D& g, const QuadratureSpec& spec) {
    double zm = g.zero_mode();
    if (std::abs(zm) > spec.abs_tol) {
        std::ostringstream os;
        os << "make_fibre: integral of g is " << zm;
        throw ZeroModePresent(os.str());
    }
    FibreVector f;
    f.grid = ThetaGrid::from_spec(spec);
    f.values = sample_transform(g, f.grid);
    f.source = g;
    check_window(f.values, spec, "make_fibre");
    return f;
}

FibreVector gaussian_fibre(const QuadratureSpec& spec, double center, double width, double wavenumber,
                           double amplitude) {
    FibreVector f;
    f.grid = ThetaGrid::from_spec(spec);
    f.values.resize(f.grid.size);
    for (int j = 0; j < f.grid.size; ++j) {
        double x = f.grid.node(j);
        double u = (x - center) / width;
        f.values[j] = amplitude * std::exp(-0.5 * u * u) * std::polar(1.0, wavenumber * x);
    }
    check_window(f.values, spec, "gaussian_fibre");
    return f;
}

FibreVector fibre_from_primitive(const SmoothFn1D& G, const QuadratureSpec& spec) {
    SmoothFn1D g = G;
    for (auto& t : g.terms) {
        if (t.bump.derivative_order != 0)
            throw std::invalid_argument("fibre_from_primitive: primitive must consist of order-0 bumps");
        t.bump.derivative_order = 1;
    }
    return make_fibre(g, spec);
}

double symplectic_form(const SmoothFn1D& g, const SmoothFn1D& f, const QuadratureSpec& spec) {
    if (std::abs(g.zero_mode()) > spec.abs_tol || std::abs(f.zero_mode()) > spec.abs_tol)
        throw ZeroModePresent("symplectic_form: both arguments must have zero mean");
    auto sf = f.support();
    auto sg = g.support();
    if (!sf || !sg) return 0.0;
    // G vanishes left of supp g and, having zero total, right of it too.
    double lo = std::max(sf->first, sg->first), hi = std::min(sf->second, sg->second);
    if (!(hi > lo)) return 0.0;
    QuadratureSpec inner = spec.scaled_tolerances(1e-2);
    std::vector<double> cuts = f.breakpoints();
    auto gb = g.breakpoints();
    cuts.insert(cuts.end(), gb.begin(), gb.end());
    auto r = numerics::integrate_1d(
        [&](double x) { return numerics::primitive(g, x, inner) * f.value(x); }, lo, hi, spec, cuts);
    return 0.5 * r.value;
}

namespace {

double relative_l2(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    KahanSum<double> num, den;
    for (std::size_t j = 0; j < a.size(); ++j) {
        num.add(std::norm(a[j] - b[j]));
        den.add(std::norm(b[j]));
    }
    return den.value() > 0 ? std::sqrt(num.value() / den.value()) : std::sqrt(num.value());
}

// Shift theta' -> theta' - alpha, refusing to drop significant intensity off the window.
std::vector<cplx> shift_checked(const std::vector<cplx>& v, const ThetaGrid& grid, double alpha,
                                const QuadratureSpec& spec, const char* what) {
    if (alpha == 0.0) return v;
    double leak = 1e3 * spec.abs_tol;
    double lost = 0.0;
    for (int j = 0; j < grid.size; ++j) {
        double moved = grid.node(j) + alpha;
        if (moved > grid.hi() || moved < grid.lo) lost = std::max(lost, std::norm(v[j]));
    }
    if (lost > leak) {
        std::ostringstream os;
        os << what << ": shift by " << alpha << " pushes intensity " << lost << " out of the window";
        throw BoundaryLeak(os.str());
    }
    return numerics::lagrange_shift(v, grid, alpha);
}

// Without a witness: gap between the six-point shift and a four-point one.
double shift_error_estimate(const std::vector<cplx>& v, const ThetaGrid& grid, double alpha,
                            const std::vector<cplx>& shifted) {
    return relative_l2(shifted, numerics::lagrange_shift(v, grid, alpha, 4));
}

void apply_phase(std::vector<cplx>& v, const ThetaGrid& grid, double t) {
    if (t == 0.0) return;
    for (int j = 0; j < grid.size; ++j) v[j] *= std::polar(1.0, t * std::exp(-grid.node(j)));
}

}  // namespace

FibreVector u1_act(const FibreVector& xi, double alpha, double t, const QuadratureSpec& spec) {
    FibreVector out;
    out.grid = xi.grid;
    out.values = shift_checked(xi.values, xi.grid, alpha, spec, "u1_act");
    apply_phase(out.values, out.grid, t);
    out.interpolation_error = xi.interpolation_error;
    if (xi.source) {
        out.source = xi.source->dilated(alpha).translated(t);
        if (alpha != 0.0)
            out.interpolation_error += relative_l2(out.values, sample_transform(*out.source, out.grid));
    } else if (alpha != 0.0) {
        out.interpolation_error += shift_error_estimate(xi.values, xi.grid, alpha,
                                                        numerics::lagrange_shift(xi.values, xi.grid, alpha));
    }
    return out;
}

FibreVector modular_flow_halfline(const FibreVector& xi, double s, double a, const QuadratureSpec& spec) {
    if (s == 0.0) return xi;
    FibreVector out;
    out.grid = xi.grid;
    out.values = xi.values;
    apply_phase(out.values, out.grid, -a);
    const std::vector<cplx> before = out.values;
    out.values = shift_checked(out.values, out.grid, -kTwoPi * s, spec, "modular_flow_halfline");
    const std::vector<cplx> shifted = out.values;
    apply_phase(out.values, out.grid, a);
    out.interpolation_error = xi.interpolation_error;
    if (xi.source) {
        out.source = xi.source->translated(-a).dilated(-kTwoPi * s).translated(a);
        out.interpolation_error += relative_l2(out.values, sample_transform(*out.source, out.grid));
    } else {
        out.interpolation_error += shift_error_estimate(before, out.grid, -kTwoPi * s, shifted);
    }
    return out;
}

double halfline_entropy(const SmoothFn1D& k, double t, const QuadratureSpec& spec) {
    auto s = k.support();
    if (!s) return 0.0;
    double lo = std::max(t, s->first), hi = s->second;
    if (!(hi > lo)) return 0.0;
    auto r = numerics::integrate_1d(
        [&](double x) {
            double v = k.value(x);
            return (x - t) * v * v;
        },
        lo, hi, spec, k.breakpoints());
    return kPi * r.value;
}

}  // namespace nullplane::fibre
