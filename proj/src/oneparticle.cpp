#include "nullplane/oneparticle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullplane::oneparticle {

using numerics::KahanSum;
using numerics::kPi;
using numerics::kTwoPi;
using CMat = Eigen::MatrixXcd;

void MassShellParams::validate() const {
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw Error("mass must be finite and >= 0");
    if (spacetime_dim < 2) throw Error("spacetime dimension D must be >= 2");
}

double omega(const std::vector<double>& p_perp, const MassShellParams& params) {
    double s = params.mass * params.mass;
    for (double p : p_perp) s += p * p;
    if (s == 0.0) throw ZeroMassZeroMomentum("omega: m = 0 at p_perp = 0");
    return std::sqrt(s);
}

// ---- thin test functions -------------------------------------------------

namespace {

double transverse_factor(const ThinTerm& t, const std::vector<double>& x) {
    double c = 1.0;
    for (std::size_t d = 0; d < t.v.size() && c != 0.0; ++d) c *= t.v[d].value(x[d]);
    return c;
}

std::optional<Box> term_box(const ThinTerm& t) {
    Box b;
    for (const auto& v : t.v) {
        auto s = v.support();
        if (!s) return std::nullopt;
        b.push_back(*s);
    }
    return b;
}

double min_half_width(const SmoothFn1D& f) {
    double w = 1e300;
    for (const auto& t : f.terms)
        if (t.coefficient != 0.0) w = std::min(w, t.bump.half_width);
    return w;
}

// Range of the shift profile over the transverse support of a term.
std::pair<double, double> shift_range(const ThinTerm& t) {
    if (!t.shift) return {0.0, 0.0};
    auto box = term_box(t);
    if (!box) return {0.0, 0.0};
    auto q = nullcut::transverse_quadrature(*box, 64);
    double lo = 1e300, hi = -1e300;
    for (const auto& x : q.points) {
        double s = (*t.shift)(x);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

// Transverse quadrature for a shifted term, resolving the phases e^{-i x.p_perp}
// for |p_perp| <= p_perp_max and e^{i s(x) p_-} for p_- <= p_minus_max.
nullcut::TransverseQuadrature shifted_quadrature(const ThinTerm& t, double p_perp_max, double p_minus_max) {
    auto box = *term_box(t);
    auto [slo, shi] = shift_range(t);
    int panels = 4;
    for (const auto& [lo, hi] : box) {
        double phase = (hi - lo) * p_perp_max + (shi - slo) * p_minus_max;
        panels = std::max(panels, static_cast<int>(std::ceil(phase / 12.0)));
    }
    std::vector<std::vector<double>> bps(box.size());
    for (std::size_t d = 0; d < box.size(); ++d) bps[d] = t.v[d].breakpoints();
    return nullcut::transverse_quadrature(box, 16 * panels, bps);
}

double effective_pminus_max(const ThinTerm& t, double theta_cutoff) {
    return std::min(std::exp(theta_cutoff), 400.0 / min_half_width(t.u));
}

// ghat(p_minus[j], p_perp[k]) for all pairs.
CMat momentum_table(const ThinTestFunction& g, const std::vector<std::vector<double>>& p_perp,
                    const std::vector<double>& p_minus, double theta_cutoff) {
    const int K = static_cast<int>(p_perp.size()), J = static_cast<int>(p_minus.size());
    CMat out = CMat::Zero(K, J);
    for (const auto& t : g.terms) {
        if (t.u.empty()) continue;
        Eigen::VectorXcd uhat(J);
        for (int j = 0; j < J; ++j) uhat(j) = t.u.fourier(p_minus[j]);
        if (!t.shift) {
            Eigen::VectorXcd vt(K);
            for (int k = 0; k < K; ++k) {
                cplx c = 1.0;
                for (std::size_t d = 0; d < t.v.size(); ++d) c *= std::conj(t.v[d].fourier(p_perp[k][d]));
                vt(k) = c;
            }
            out += vt * uhat.transpose();
            continue;
        }
        double pp_max = 0.0;
        for (const auto& p : p_perp)
            for (double c : p) pp_max = std::max(pp_max, std::abs(c));
        auto q = shifted_quadrature(t, pp_max, effective_pminus_max(t, theta_cutoff));
        std::vector<int> live;
        std::vector<double> amp;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
            double a = q.weights[i] * transverse_factor(t, q.points[i]);
            if (a != 0.0) {
                live.push_back(static_cast<int>(i));
                amp.push_back(a);
            }
        }
        const int X = static_cast<int>(live.size());
        if (X == 0) continue;
        CMat E(K, X), P(X, J);
        numerics::parallel_for(static_cast<std::size_t>(X), [&](std::size_t ii) {
            const auto& x = q.points[live[ii]];
            for (int k = 0; k < K; ++k) {
                double ph = 0.0;
                for (std::size_t d = 0; d < x.size(); ++d) ph -= x[d] * p_perp[k][d];
                E(k, ii) = std::polar(amp[ii], ph);
            }
            double s = (*t.shift)(x);
            for (int j = 0; j < J; ++j) P(ii, j) = std::polar(1.0, s * p_minus[j]);
        });
        CMat T = E * P;
        out += T * uhat.asDiagonal();
    }
    return out;
}

void term_box_union(Box& acc, const Box& b) {
    if (acc.empty()) {
        acc = b;
        return;
    }
    for (std::size_t d = 0; d < acc.size(); ++d) {
        acc[d].first = std::min(acc[d].first, b[d].first);
        acc[d].second = std::max(acc[d].second, b[d].second);
    }
}

Box default_box(int dims) { return Box(dims, {-1.0, 1.0}); }

ThinTestFunction boosted(const ThinTestFunction& g, double alpha, double t) {
    ThinTestFunction out = g;
    for (auto& term : out.terms) {
        term.u = term.u.dilated(alpha).translated(t);
        if (term.shift) term.shift = term.shift->scaled(std::exp(alpha));
    }
    return out;
}

}  // namespace

void ThinTestFunction::validate(int tdim) const {
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (static_cast<int>(t.v.size()) != tdim) {
            std::ostringstream os;
            os << "thin test function term " << i << " has " << t.v.size() << " transverse factors, expected "
               << tdim;
            throw Error(os.str());
        }
        for (const auto& b : t.u.terms) b.bump.validate();
        for (const auto& v : t.v)
            for (const auto& b : v.terms) b.bump.validate();
        if (t.shift && t.shift->dims() > tdim) throw Error("thin test function shift uses too many coordinates");
    }
}

int ThinTestFunction::transverse_dim() const { return terms.empty() ? 0 : static_cast<int>(terms.front().v.size()); }

bool ThinTestFunction::zero_mode_flag(double tol) const {
    for (const auto& t : terms) {
        bool nontrivial = !t.u.empty() && std::all_of(t.v.begin(), t.v.end(), [](const SmoothFn1D& v) { return !v.empty(); });
        if (nontrivial && std::abs(t.u.zero_mode()) > tol) return false;
    }
    return true;
}

double ThinTestFunction::value(double x_plus, const std::vector<double>& x_perp) const {
    double s = 0.0;
    for (const auto& t : terms) {
        double c = transverse_factor(t, x_perp);
        if (c == 0.0) continue;
        double sh = t.shift ? (*t.shift)(x_perp) : 0.0;
        s += c * t.u.value(x_plus - sh);
    }
    return s;
}

SmoothFn1D ThinTestFunction::fibre_source(const std::vector<double>& x_perp) const {
    SmoothFn1D out;
    for (const auto& t : terms) {
        double c = transverse_factor(t, x_perp);
        if (c == 0.0) continue;
        double sh = t.shift ? (*t.shift)(x_perp) : 0.0;
        auto piece = t.u.translated(sh).scaled(c);
        out.terms.insert(out.terms.end(), piece.terms.begin(), piece.terms.end());
    }
    return out;
}

std::optional<Box> ThinTestFunction::transverse_support() const {
    Box acc;
    for (const auto& t : terms) {
        if (t.u.empty()) continue;
        auto b = term_box(t);
        if (b) term_box_union(acc, *b);
    }
    if (acc.empty()) return std::nullopt;
    return acc;
}

std::optional<std::pair<double, double>> ThinTestFunction::plus_support() const {
    double lo = 1e300, hi = -1e300;
    for (const auto& t : terms) {
        auto s = t.u.support();
        if (!s || !term_box(t)) continue;
        auto [a, b] = shift_range(t);
        lo = std::min(lo, s->first + a);
        hi = std::max(hi, s->second + b);
    }
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

ThinTestFunction ThinTestFunction::translated_by(const CutProfile& c) const {
    ThinTestFunction out = *this;
    for (auto& t : out.terms) t.shift = t.shift ? *t.shift + c : c;
    return out;
}

cplx ThinTestFunction::fourier(double p_minus, const std::vector<double>& p_perp, const QuadratureSpec& spec) const {
    return momentum_table(*this, {p_perp}, {p_minus}, spec.theta_cutoff)(0, 0);
}

// ---- direct integral vectors --------------------------------------------

double DirectIntegralVector::norm2() const {
    KahanSum<double> s;
    for (std::size_t k = 0; k < nodes.size(); ++k) s.add(nodes[k].weight * fibres[k].norm2());
    return s.value();
}

bool DirectIntegralVector::same_layout(const DirectIntegralVector& o) const {
    if (representation != o.representation || !(grid == o.grid) || nodes.size() != o.nodes.size()) return false;
    for (std::size_t k = 0; k < nodes.size(); ++k)
        if (nodes[k].point != o.nodes[k].point || nodes[k].weight != o.nodes[k].weight) return false;
    return true;
}

cplx DirectIntegralVector::inner(const DirectIntegralVector& o) const {
    if (!same_layout(o)) throw RepresentationMismatch("DirectIntegralVector::inner: layouts differ");
    KahanSum<cplx> s;
    for (std::size_t k = 0; k < nodes.size(); ++k) s.add(nodes[k].weight * fibres[k].inner(o.fibres[k]));
    return s.value();
}

double DirectIntegralVector::max_interpolation_error() const {
    double e = 0.0;
    for (const auto& f : fibres) e = std::max(e, f.interpolation_error);
    return e;
}

namespace {

struct Axis {
    std::vector<double> nodes;
    double weight = 0.0;
};

Axis momentum_axis(const Box& box, const MassShellParams& params, const QuadratureSpec& spec) {
    double r = 0.0;
    for (const auto& [lo, hi] : box) r = std::max({r, std::abs(lo), std::abs(hi)});
    r += 0.25;
    const double dp = kPi / r;
    const double cutoff = spec.momentum_cutoff;
    Axis a;
    a.weight = dp / kTwoPi;
    const bool offset = params.mass == 0.0;
    if (cutoff / dp > 1e5) {
        std::ostringstream os;
        os << "momentum grid would need " << 2.0 * cutoff / dp << " nodes per axis; shrink the box or momentum_cutoff";
        throw Error(os.str());
    }
    const int kmax = static_cast<int>(std::floor(cutoff / dp));
    for (int k = -kmax - 1; k <= kmax; ++k) {
        double p = offset ? (k + 0.5) * dp : k * dp;
        if (std::abs(p) <= cutoff) a.nodes.push_back(p);
    }
    return a;
}

std::vector<TransverseNode> tensor_nodes(const std::vector<std::vector<double>>& axes,
                                         const std::vector<std::vector<double>>& weights) {
    const std::size_t dims = axes.size();
    std::vector<TransverseNode> out;
    std::vector<std::size_t> idx(dims, 0);
    while (true) {
        TransverseNode n;
        n.weight = 1.0;
        for (std::size_t d = 0; d < dims; ++d) {
            n.point.push_back(axes[d][idx[d]]);
            n.weight *= weights[d][idx[d]];
        }
        out.push_back(std::move(n));
        int d = static_cast<int>(dims) - 1;
        while (d >= 0 && ++idx[d] == axes[d].size()) idx[d--] = 0;
        if (d < 0) break;
    }
    return out;
}

std::vector<std::vector<double>> points_of(const std::vector<TransverseNode>& nodes) {
    std::vector<std::vector<double>> p;
    p.reserve(nodes.size());
    for (const auto& n : nodes) p.push_back(n.point);
    return p;
}

void require_rep(const DirectIntegralVector& v, Representation r, const char* what) {
    if (v.representation != r) {
        std::ostringstream os;
        os << what << ": expected the " << (r == Representation::momentum ? "momentum" : "spatial")
           << " representation";
        throw RepresentationMismatch(os.str());
    }
}

struct SpatialAxis {
    std::vector<double> nodes, weights;
    double lo = 0.0, width = 0.0;  // panel geometry
    int panels = 1;
};

SpatialAxis spatial_axis(double lo, double hi, const QuadratureSpec& spec) {
    SpatialAxis a;
    a.panels = std::max(1, spec.transverse_points_per_dim / 16);
    a.lo = lo;
    a.width = (hi - lo) / a.panels;
    numerics::composite_nodes(lo, hi, a.panels, a.nodes, a.weights);
    return a;
}

// Inverse transverse transform on one axis: w_k e^{i x p_k}.
CMat inverse_matrix(const std::vector<double>& x, const Axis& p) {
    CMat m(x.size(), p.nodes.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < p.nodes.size(); ++k) m(i, k) = std::polar(p.weight, x[i] * p.nodes[k]);
    return m;
}

// Forward transform on one axis: the samples on each panel define their degree-15
// interpolant, which is integrated against e^{-i x p} on an oversampled rule.
CMat forward_matrix(const SpatialAxis& a, const std::vector<double>& p) {
    const auto& gl = numerics::gauss_legendre(16);
    std::vector<double> bary(16);
    for (int i = 0; i < 16; ++i) {
        double prod = 1.0;
        for (int j = 0; j < 16; ++j)
            if (j != i) prod *= gl.nodes[i] - gl.nodes[j];
        bary[i] = 1.0 / prod;
    }
    double pmax = 0.0;
    for (double q : p) pmax = std::max(pmax, std::abs(q));
    const int sub = std::max(2, static_cast<int>(std::ceil(pmax * a.width / 12.0)));
    CMat f = CMat::Zero(p.size(), a.nodes.size());
    for (int pan = 0; pan < a.panels; ++pan) {
        const double plo = a.lo + pan * a.width;
        std::vector<double> y, w;
        numerics::composite_nodes(plo, plo + a.width, sub, y, w);
        Eigen::MatrixXd lag(y.size(), 16);
        for (std::size_t m = 0; m < y.size(); ++m) {
            const double t = 2.0 * (y[m] - plo) / a.width - 1.0;
            int hit = -1;
            double den = 0.0;
            for (int i = 0; i < 16; ++i) {
                if (t == gl.nodes[i]) hit = i;
                else den += bary[i] / (t - gl.nodes[i]);
            }
            for (int i = 0; i < 16; ++i)
                lag(m, i) = hit >= 0 ? (i == hit ? 1.0 : 0.0) : bary[i] / (t - gl.nodes[i]) / den;
        }
        CMat e(p.size(), y.size());
        for (std::size_t k = 0; k < p.size(); ++k)
            for (std::size_t m = 0; m < y.size(); ++m) e(k, m) = std::polar(w[m], -y[m] * p[k]);
        f.middleCols(pan * 16, 16) = e * lag.cast<cplx>();
    }
    return f;
}

// Applies one matrix per transverse axis to the fibre samples, axes in order.
std::vector<FibreVector> modewise(const std::vector<FibreVector>& fibres, const std::vector<int>& shape,
                                  const std::vector<CMat>& mats, const ThetaGrid& grid) {
    const int J = grid.size;
    std::vector<int> cur = shape;
    std::vector<cplx> data(fibres.size() * J);
    for (std::size_t n = 0; n < fibres.size(); ++n)
        std::copy(fibres[n].values.begin(), fibres[n].values.end(), data.begin() + n * J);
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    for (std::size_t d = 0; d < mats.size(); ++d) {
        long pre = 1, post = J;
        for (std::size_t e = 0; e < d; ++e) pre *= cur[e];
        for (std::size_t e = d + 1; e < cur.size(); ++e) post *= cur[e];
        const long B = cur[d], A = mats[d].rows();
        std::vector<cplx> next(pre * A * post);
        for (long q = 0; q < pre; ++q) {
            Eigen::Map<const RowMat> in(data.data() + q * B * post, B, post);
            Eigen::Map<RowMat> out(next.data() + q * A * post, A, post);
            out.noalias() = mats[d] * in;
        }
        data.swap(next);
        cur[d] = static_cast<int>(A);
    }
    double interp = 0.0;
    for (const auto& f : fibres) interp = std::max(interp, f.interpolation_error);
    const std::size_t count = data.size() / J;
    std::vector<FibreVector> out(count);
    for (std::size_t n = 0; n < count; ++n) {
        out[n].grid = grid;
        out[n].values.assign(data.begin() + n * J, data.begin() + (n + 1) * J);
        out[n].interpolation_error = interp;
    }
    return out;
}

}  // namespace

std::vector<TransverseNode> momentum_nodes(const Box& box, const MassShellParams& params,
                                           const QuadratureSpec& spec) {
    auto a = momentum_axis(box, params, spec);
    std::vector<std::vector<double>> axes(box.size(), a.nodes), ws(box.size(), std::vector<double>(a.nodes.size(), a.weight));
    return tensor_nodes(axes, ws);
}

std::vector<TransverseNode> spatial_nodes(const Box& box, const QuadratureSpec& spec) {
    std::vector<std::vector<double>> axes, ws;
    for (const auto& [lo, hi] : box) {
        auto a = spatial_axis(lo, hi, spec);
        axes.push_back(a.nodes);
        ws.push_back(a.weights);
    }
    return tensor_nodes(axes, ws);
}

DirectIntegralVector fourier_restrict(const ThinTestFunction& g, const MassShellParams& params,
                                      const QuadratureSpec& spec) {
    params.validate();
    spec.validate();
    g.validate(params.transverse_dim());
    for (std::size_t i = 0; i < g.terms.size(); ++i) {
        double zm = g.terms[i].u.zero_mode();
        if (std::abs(zm) > spec.abs_tol) {
            std::ostringstream os;
            os.precision(17);
            os << "fourier_restrict: term " << i << " has int u dx_+ = " << zm;
            throw ZeroModePresent(os.str());
        }
    }
    DirectIntegralVector v;
    v.representation = Representation::momentum;
    v.params = params;
    v.grid = ThetaGrid::from_spec(spec);
    v.box = g.transverse_support().value_or(default_box(params.transverse_dim()));
    v.nodes = momentum_nodes(v.box, params, spec);
    v.origin = g;
    std::vector<double> pm(v.grid.size);
    for (int j = 0; j < v.grid.size; ++j) pm[j] = std::exp(-v.grid.node(j));
    CMat table = momentum_table(g, points_of(v.nodes), pm, spec.theta_cutoff);
    v.fibres.resize(v.nodes.size());
    for (std::size_t k = 0; k < v.nodes.size(); ++k) {
        auto& f = v.fibres[k];
        f.grid = v.grid;
        f.values.resize(v.grid.size);
        for (int j = 0; j < v.grid.size; ++j) f.values[j] = table(static_cast<Eigen::Index>(k), j);
        fibre::check_window(f.values, spec, "fourier_restrict");
    }
    return v;
}

DirectIntegralVector spatial_restrict(const ThinTestFunction& g, const MassShellParams& params,
                                      const QuadratureSpec& spec, std::optional<Box> box) {
    params.validate();
    spec.validate();
    g.validate(params.transverse_dim());
    DirectIntegralVector v;
    v.representation = Representation::spatial;
    v.params = params;
    v.grid = ThetaGrid::from_spec(spec);
    v.box = box ? *box : g.transverse_support().value_or(default_box(params.transverse_dim()));
    v.nodes = spatial_nodes(v.box, spec);
    v.origin = g;
    v.fibres.resize(v.nodes.size());
    numerics::parallel_for(v.nodes.size(), [&](std::size_t k) {
        v.fibres[k] = fibre::make_fibre(g.fibre_source(v.nodes[k].point), spec);
    });
    return v;
}

DirectIntegralVector to_spatial(const DirectIntegralVector& v, const QuadratureSpec& spec) {
    require_rep(v, Representation::momentum, "to_spatial");
    DirectIntegralVector out;
    out.representation = Representation::spatial;
    out.params = v.params;
    out.grid = v.grid;
    out.box = v.box;
    out.origin = v.origin;
    out.nodes = spatial_nodes(v.box, spec);
    const auto p = momentum_axis(v.box, v.params, spec);
    std::vector<CMat> mats;
    std::vector<int> shape;
    for (const auto& [lo, hi] : v.box) {
        mats.push_back(inverse_matrix(spatial_axis(lo, hi, spec).nodes, p));
        shape.push_back(static_cast<int>(p.nodes.size()));
    }
    if (v.nodes.size() != momentum_nodes(v.box, v.params, spec).size())
        throw RepresentationMismatch("to_spatial: momentum grid does not match the quadrature spec");
    out.fibres = modewise(v.fibres, shape, mats, v.grid);
    if (v.origin)
        for (std::size_t k = 0; k < out.nodes.size(); ++k) out.fibres[k].source = v.origin->fibre_source(out.nodes[k].point);
    return out;
}

DirectIntegralVector to_momentum(const DirectIntegralVector& v, const QuadratureSpec& spec) {
    require_rep(v, Representation::spatial, "to_momentum");
    DirectIntegralVector out;
    out.representation = Representation::momentum;
    out.params = v.params;
    out.grid = v.grid;
    out.box = v.box;
    out.origin = v.origin;
    out.nodes = momentum_nodes(v.box, v.params, spec);
    const auto p = momentum_axis(v.box, v.params, spec);
    std::vector<CMat> mats;
    std::vector<int> shape;
    for (const auto& [lo, hi] : v.box) {
        auto a = spatial_axis(lo, hi, spec);
        mats.push_back(forward_matrix(a, p.nodes));
        shape.push_back(static_cast<int>(a.nodes.size()));
    }
    if (v.nodes.size() != spatial_nodes(v.box, spec).size())
        throw RepresentationMismatch("to_momentum: spatial grid does not match the quadrature spec");
    out.fibres = modewise(v.fibres, shape, mats, v.grid);
    return out;
}

DirectIntegralVector boost_translate(const DirectIntegralVector& v, double alpha, double a_plus,
                                     const QuadratureSpec& spec) {
    DirectIntegralVector out = v;
    numerics::parallel_for(v.fibres.size(), [&](std::size_t k) {
        out.fibres[k] = fibre::u1_act(v.fibres[k], alpha, a_plus, spec);
    });
    if (v.origin) out.origin = boosted(*v.origin, alpha, a_plus);
    return out;
}

// ---- zero modes and norms -----------------------------------------------

ZeroModeReport zero_mode_diagnose(const ThinTestFunction& g, const MassShellParams& params,
                                  const QuadratureSpec& spec, const std::vector<double>& cutoffs) {
    params.validate();
    g.validate(params.transverse_dim());
    ZeroModeReport r;
    for (std::size_t i = 0; i < g.terms.size(); ++i) {
        double zm = g.terms[i].u.zero_mode();
        r.term_integrals.push_back(zm);
        if (std::abs(zm) > spec.abs_tol) r.offending_terms.push_back(i);
    }
    r.cutoffs = cutoffs;
    std::sort(r.cutoffs.begin(), r.cutoffs.end());
    if (r.cutoffs.empty()) return r;
    const Box box = g.transverse_support().value_or(default_box(params.transverse_dim()));
    auto nodes = momentum_nodes(box, params, spec);
    const double raw = std::pow(kTwoPi, params.transverse_dim());
    auto pts = points_of(nodes);

    // Uniform theta' grid aligned with integer cutoffs, at least as fine as the spec grid.
    const double spec_step = 2.0 * spec.theta_cutoff / (spec.theta_points - 1);
    const int per_unit = static_cast<int>(std::ceil(1.0 / spec_step));
    const double h = 1.0 / per_unit;
    const double tmax = r.cutoffs.back();
    const int half = static_cast<int>(std::ceil(tmax * per_unit));
    std::vector<double> thetas, pm;
    for (int j = -half; j <= half; ++j) {
        thetas.push_back(j * h);
        pm.push_back(std::exp(-j * h));
    }
    CMat table = momentum_table(g, pts, pm, tmax);
    std::vector<double> dens(thetas.size());
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        KahanSum<double> s;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            s.add(raw * nodes[k].weight * std::norm(table(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))));
        dens[j] = s.value();
    }
    CMat at_zero = momentum_table(g, pts, {0.0}, tmax);
    KahanSum<double> zw;
    for (std::size_t k = 0; k < nodes.size(); ++k) zw.add(raw * nodes[k].weight * std::norm(at_zero(static_cast<Eigen::Index>(k), 0)));
    r.zero_mode_weight = zw.value();

    for (double cut : r.cutoffs) {
        const int n = static_cast<int>(std::lround(cut * per_unit));
        KahanSum<double> s;
        for (int j = -n; j <= n; ++j) {
            double w = (j == -n || j == n) ? 0.5 * h : h;
            s.add(w * dens[j + half]);
        }
        r.truncated_norms.push_back(s.value());
    }
    for (std::size_t i = 1; i < r.cutoffs.size(); ++i)
        r.growth_rates.push_back((r.truncated_norms[i] - r.truncated_norms[i - 1]) / (r.cutoffs[i] - r.cutoffs[i - 1]));
    return r;
}

double mass_shell_norm2(const ThinTestFunction& g, const MassShellParams& params, const QuadratureSpec& spec) {
    params.validate();
    g.validate(params.transverse_dim());
    const Box box = g.transverse_support().value_or(default_box(params.transverse_dim()));
    auto nodes = momentum_nodes(box, params, spec);
    const double raw = std::pow(kTwoPi, params.transverse_dim());

    // Transverse factors bound the fibre; nodes far below the peak are skipped.
    std::vector<double> bound(nodes.size(), 0.0);
    for (std::size_t k = 0; k < nodes.size(); ++k)
        for (const auto& t : g.terms) {
            double b = 0.0;
            for (const auto& term : t.u.terms) b += std::abs(term.coefficient * term.bump.amplitude) * 2.0 * term.bump.half_width;
            if (t.shift) {
                for (const auto& v : t.v) {
                    double s = 0.0;
                    for (const auto& term : v.terms) s += std::abs(term.coefficient * term.bump.amplitude) * 2.0 * term.bump.half_width;
                    b *= s;
                }
            } else {
                for (std::size_t d = 0; d < t.v.size(); ++d) b *= std::abs(t.v[d].fourier(nodes[k].point[d]));
            }
            bound[k] += b;
        }
    const double bmax = *std::max_element(bound.begin(), bound.end());

    double umin = 1e300;
    for (const auto& t : g.terms) umin = std::min(umin, min_half_width(t.u));
    const bool any_shift = std::any_of(g.terms.begin(), g.terms.end(), [](const ThinTerm& t) { return t.shift.has_value(); });
    QuadratureSpec tight = spec;
    tight.abs_tol = 1e-14;
    tight.rel_tol = 1e-10;
    tight.compact_rule = 1;
    std::vector<double> per(nodes.size(), 0.0);
    numerics::parallel_for(nodes.size(), [&](std::size_t k) {
        if (bmax == 0.0 || bound[k] < 1e-7 * bmax) return;
        const auto& pp = nodes[k].point;
        const double mp = omega(pp, params);
        std::vector<cplx> vt(g.terms.size(), 1.0);
        for (std::size_t i = 0; i < g.terms.size(); ++i)
            for (std::size_t d = 0; d < g.terms[i].v.size(); ++d) vt[i] *= std::conj(g.terms[i].v[d].fourier(pp[d]));
        auto ghat = [&](double pminus) {
            if (any_shift) return g.fourier(pminus, pp, spec);
            cplx s = 0.0;
            for (std::size_t i = 0; i < g.terms.size(); ++i)
                if (vt[i] != 0.0) s += vt[i] * g.terms[i].u.fourier(pminus);
            return s;
        };
        auto f = [&](double p1) {
            const double om = std::hypot(mp, p1);
            // p_- = (omega - p_1)/sqrt2, written without cancellation for p_1 > 0
            const double pminus = (p1 > 0.0 ? mp * mp / (om + p1) : om - p1) / std::sqrt(2.0);
            return std::norm(ghat(pminus)) / om;
        };
        // Each piece is rescaled to unit length so that it gets its own panel refinement.
        auto piece = [&](double a, double b) {
            auto h = [&](double s) { return f(a + (b - a) * s) * (b - a); };
            return numerics::integrate_1d(h, 0.0, 1.0, tight).value;
        };
        KahanSum<double> acc;
        // p_1 < 0: geometric pieces until p_- is beyond the support of every transform.
        const double stop = 600.0 / umin;
        acc.add(piece(-0.25 * mp, 0.0));
        for (double a = 0.25 * mp; a * std::sqrt(2.0) < stop; a *= 2.0) acc.add(piece(-2.0 * a, -a));
        // p_1 > 0: geometric pieces, then the tail through p_1 = c tau / (1 - tau).
        acc.add(piece(0.0, 0.25 * mp));
        double a = 0.25 * mp;
        for (int j = 0; j < 20; ++j, a *= 2.0) acc.add(piece(a, 2.0 * a));
        auto tail = [&](double tau) {
            if (tau >= 1.0) return 0.0;
            const double p1 = a / (1.0 - tau);
            return f(p1) * a / ((1.0 - tau) * (1.0 - tau));
        };
        acc.add(numerics::integrate_1d(tail, 0.0, 1.0, tight).value);
        per[k] = raw * nodes[k].weight * acc.value();
    });
    KahanSum<double> s;
    for (double x : per) s.add(x);
    return s.value();
}

double theta_coordinate_norm2(const DirectIntegralVector& v) {
    require_rep(v, Representation::momentum, "theta_coordinate_norm2");
    return std::pow(kTwoPi, v.params.spacetime_dim) * v.norm2();
}

}  // namespace nullplane::oneparticle
