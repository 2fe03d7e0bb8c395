#include "nullplane/stdsubspace.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace nullplane::stdsubspace {

using cplx = std::complex<double>;
using numerics::kTwoPi;

namespace {

constexpr double kRankTol = 1e-8;

int numerical_rank(const RMat& m) {
    if (m.cols() == 0) return 0;
    Eigen::JacobiSVD<RMat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > kRankTol * s(0)) ++r;
    return r;
}

RMat times_i(const RMat& r) {
    const int n = r.rows() / 2;
    RMat out(r.rows(), r.cols());
    out.topRows(n) = -r.bottomRows(n);
    out.bottomRows(n) = r.topRows(n);
    return out;
}

RMat orthonormal_columns(const RMat& m, int rank) {
    Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeFullU);
    return svd.matrixU().leftCols(rank);
}

RMat sym_function(const RMat& sym, double power) {
    Eigen::SelfAdjointEigenSolver<RMat> es(sym);
    RVec d = es.eigenvalues().array().pow(power);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double rel(double num, double den) { return den > 0 ? num / den : num; }

}  // namespace

RVec realify(const CVec& v) {
    RVec r(2 * v.size());
    r << v.real(), v.imag();
    return r;
}

CVec complexify(const RVec& v) {
    const int n = v.size() / 2;
    CVec c(n);
    for (int i = 0; i < n; ++i) c(i) = cplx(v(i), v(n + i));
    return c;
}

RMat realify_linear(const CMat& a) {
    const int n = a.rows(), m = a.cols();
    RMat r(2 * n, 2 * m);
    r << a.real(), -a.imag(), a.imag(), a.real();
    return r;
}

CMat complexify_linear(const RMat& r) {
    const int n = r.rows() / 2, m = r.cols() / 2;
    CMat c(n, m);
    c.real() = r.topLeftCorner(n, m);
    c.imag() = r.bottomLeftCorner(n, m);
    return c;
}

RMat realify_antilinear(const CMat& m) {
    const int n = m.rows(), k = m.cols();
    RMat r(2 * n, 2 * k);
    r << m.real(), m.imag(), m.imag(), -m.real();
    return r;
}

CMat complexify_antilinear(const RMat& r) { return complexify_linear(r); }

RMat realified_span(const CMat& columns) {
    RMat r(2 * columns.rows(), columns.cols());
    for (int j = 0; j < columns.cols(); ++j) r.col(j) = realify(columns.col(j));
    return r;
}

double subspace_distance(const RMat& a, const RMat& b) {
    auto proj = [](const RMat& m) {
        int r = numerical_rank(m);
        RMat q = orthonormal_columns(m, r);
        return RMat(q * q.transpose());
    };
    RMat d = proj(a) - proj(b);
    Eigen::SelfAdjointEigenSolver<RMat> es(d);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

CVec StandardSubspaceFD::apply_S(const CVec& v) const {
    return complexify(S_real * realify(v));
}

CMat StandardSubspaceFD::delta_power(cplx z) const {
    CVec d(log_eigs.size());
    for (int i = 0; i < log_eigs.size(); ++i) d(i) = std::exp(z * log_eigs(i));
    return eigvecs * d.asDiagonal() * eigvecs.adjoint();
}

CMat StandardSubspaceFD::log_delta() const {
    return eigvecs * log_eigs.cast<cplx>().asDiagonal() * eigvecs.adjoint();
}

RMat StandardSubspaceFD::real_projector() const {
    RMat q = realified_span(basis);
    return q * q.transpose();
}

namespace {

void fill_spectral(StandardSubspaceFD& h) {
    CMat delta = complexify_linear(h.Delta_real);
    delta = 0.5 * (delta + delta.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(delta);
    h.eigvecs = es.eigenvectors();
    h.log_eigs = es.eigenvalues().array().log();
    h.J_matrix = complexify_antilinear(h.J_real);
}

}  // namespace

StandardSubspaceFD make_subspace(const std::vector<CVec>& spanning) {
    if (spanning.empty()) throw std::invalid_argument("make_subspace: empty spanning set");
    const int n = spanning.front().size();
    for (const auto& v : spanning) {
        if (v.size() != n) throw std::invalid_argument("make_subspace: inconsistent dimensions");
        if (v.norm() == 0.0) throw std::invalid_argument("make_subspace: zero spanning vector");
    }
    RMat m(2 * n, spanning.size());
    for (std::size_t j = 0; j < spanning.size(); ++j) m.col(j) = realify(spanning[j]);
    const int r = numerical_rank(m);
    RMat both(2 * n, 2 * m.cols());
    both << m, times_i(m);
    const int rr = numerical_rank(both);
    if (rr < 2 * r) {
        std::ostringstream os;
        os << "make_subspace: H and iH intersect; rank deficiency " << 2 * r - rr;
        throw NotSeparating(os.str());
    }
    if (rr < 2 * n) {
        std::ostringstream os;
        os << "make_subspace: H + iH misses " << 2 * n - rr << " real dimensions";
        throw NotCyclic(os.str());
    }

    StandardSubspaceFD h;
    h.ambient_dim = n;
    h.spanning = spanning;
    RMat q = orthonormal_columns(m, n);
    h.basis.resize(n, n);
    for (int j = 0; j < n; ++j) h.basis.col(j) = complexify(q.col(j));
    // S(sum c_j f_j) = sum conj(c_j) f_j.
    CMat finv = h.basis.inverse();
    CMat tomita = h.basis * finv.conjugate();
    h.S_real = realify_antilinear(tomita);
    h.Delta_real = h.S_real.transpose() * h.S_real;
    h.Delta_real = 0.5 * (h.Delta_real + h.Delta_real.transpose()).eval();
    h.J_real = h.S_real * sym_function(h.Delta_real, -0.5);
    fill_spectral(h);
    return h;
}

StandardSubspaceFD from_modular_data(const CMat& eigvecs, const RVec& log_eigs, const CMat& J_matrix) {
    StandardSubspaceFD h;
    h.ambient_dim = eigvecs.rows();
    h.eigvecs = eigvecs;
    h.log_eigs = log_eigs;
    h.J_matrix = J_matrix;
    h.J_real = realify_antilinear(J_matrix);
    return h;
}

StandardSubspaceFD symplectic_complement(const StandardSubspaceFD& h) {
    // H' is the real orthogonal complement of iH.
    const int n = h.ambient_dim;
    RMat ih = times_i(realified_span(h.basis));
    Eigen::JacobiSVD<RMat> svd(ih, Eigen::ComputeFullU);
    RMat comp = svd.matrixU().rightCols(2 * n - n);
    std::vector<CVec> span;
    for (int j = 0; j < comp.cols(); ++j) span.push_back(complexify(comp.col(j)));
    return make_subspace(span);
}

double ModularRelationsReport::max() const {
    double m = std::max({involution_S, involution_J, polar, jdj, j_complement, complement_adjoint, symplectic});
    for (double v : invariance) m = std::max(m, v);
    return m;
}

ModularRelationsReport verify_modular_relations(const StandardSubspaceFD& h) {
    if (!h.has_tomita()) throw std::invalid_argument("verify_modular_relations: no Tomita operator");
    ModularRelationsReport r;
    const int n2 = 2 * h.ambient_dim;
    const RMat id = RMat::Identity(n2, n2);
    const double s_norm = h.S_real.norm();
    r.involution_S = (h.S_real * h.S_real - id).norm();
    r.involution_J = (h.J_real * h.J_real - id).norm();
    RMat half = sym_function(h.Delta_real, 0.5);
    r.polar = rel((h.S_real - h.J_real * half).norm(), s_norm);
    RMat inv = sym_function(h.Delta_real, -1.0);
    r.jdj = rel((h.J_real * h.Delta_real * h.J_real - inv).norm(), inv.norm());
    RMat span = realified_span(h.basis);
    const double ts[3] = {0.1, 0.5, 1.0};
    for (int k = 0; k < 3; ++k) {
        CMat moved = h.delta_power(cplx(0.0, ts[k])) * h.basis;
        r.invariance[k] = subspace_distance(realified_span(moved), span);
    }
    StandardSubspaceFD hc = symplectic_complement(h);
    RMat jh(n2, h.ambient_dim);
    for (int j = 0; j < h.ambient_dim; ++j) jh.col(j) = realify(h.apply_J(h.basis.col(j)));
    r.j_complement = subspace_distance(jh, realified_span(hc.basis));
    r.complement_adjoint = rel((hc.S_real - h.S_real.transpose()).norm(), s_norm);
    for (int a = 0; a < hc.basis.cols(); ++a)
        for (int b = 0; b < h.basis.cols(); ++b)
            r.symplectic = std::max(r.symplectic,
                                    std::abs(hc.basis.col(a).dot(h.basis.col(b)).imag()));
    return r;
}

namespace {

// a(lambda) = 1/(1 - lambda), b(lambda) = -1/(2 sinh(L/2)), L = log lambda.
double cut_a(double l) { return 1.0 / (1.0 - std::exp(l)); }
double cut_b(double l) { return -0.5 / std::sinh(0.5 * l); }

}  // namespace

CVec CuttingProjectionFD::apply(const CVec& v) const {
    CVec c = h->eigvecs.adjoint() * v;
    CVec ca(c.size()), cb(c.size());
    for (int i = 0; i < c.size(); ++i) {
        double l = h->log_eigs(i);
        if (std::abs(l) <= unit_tol) {
            ca(i) = cb(i) = 0.0;
        } else {
            ca(i) = cut_a(l) * c(i);
            cb(i) = cut_b(l) * c(i);
        }
    }
    return h->eigvecs * ca + h->apply_J(h->eigvecs * cb);
}

RMat CuttingProjectionFD::real_matrix() const {
    const int n = h->ambient_dim;
    RMat r(2 * n, 2 * n);
    for (int j = 0; j < 2 * n; ++j) {
        RVec e = RVec::Unit(2 * n, j);
        r.col(j) = realify(apply(complexify(e)));
    }
    return r;
}

CVec remove_unit_spectrum(const StandardSubspaceFD& h, const CVec& v, double unit_tol) {
    CVec c = h.eigvecs.adjoint() * v;
    for (int i = 0; i < c.size(); ++i)
        if (std::abs(h.log_eigs(i)) <= unit_tol) c(i) = 0.0;
    return h.eigvecs * c;
}

double entropy_cutting(const StandardSubspaceFD& h, const CVec& psi) {
    constexpr double kUnitTol = 1e-8;
    CVec c = h.eigvecs.adjoint() * psi;
    double singular = 0.0;
    for (int i = 0; i < c.size(); ++i)
        if (std::abs(h.log_eigs(i)) <= kUnitTol) singular += std::norm(c(i));
    singular = std::sqrt(singular);
    if (singular > 1e-6 * std::max(1.0, psi.norm())) {
        std::ostringstream os;
        os << "entropy_cutting: eigenvalue-1 component " << singular;
        throw SingularSpectrum(os.str());
    }
    CVec d(c.size());
    for (int i = 0; i < c.size(); ++i) d(i) = cplx(0.0, h.log_eigs(i)) * c(i);
    CVec phi = h.eigvecs * d;
    CuttingProjectionFD p{&h, kUnitTol};
    // The bracket is linear in its first slot here: Im <x, y> = Im(y^* x) = -Im(x^* y).
    return -psi.dot(p.apply(phi)).imag();
}

TrotterResult trotter_translation(const StandardSubspaceFD& h, const StandardSubspaceFD& k, double t,
                                  const std::vector<int>& n_steps) {
    TrotterResult r;
    CMat gen = h.log_delta() - k.log_delta();
    gen = 0.5 * (gen + gen.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> es(gen);
    CVec ph(es.eigenvalues().size());
    for (int i = 0; i < ph.size(); ++i) ph(i) = std::polar(1.0, t * es.eigenvalues()(i));
    r.limit = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    for (int n : n_steps) {
        CMat step = h.delta_power(cplx(0.0, t / n)) * k.delta_power(cplx(0.0, -t / n));
        CMat prod = CMat::Identity(step.rows(), step.cols());
        for (int i = 0; i < n; ++i) prod = (prod * step).eval();
        Eigen::JacobiSVD<CMat> svd(prod - r.limit);
        r.steps.push_back(n);
        r.errors.push_back(svd.singularValues()(0));
        r.product = prod;
    }
    // Least-squares slope of log(error) against log(n).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (!(r.errors[i] > 0.0)) continue;
        double x = std::log(static_cast<double>(r.steps[i])), y = std::log(r.errors[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++m;
    }
    if (m >= 2) r.observed_order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    return r;
}

std::vector<CVec> random_spanning(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<CVec> v(n, CVec(n));
    for (auto& x : v)
        for (int i = 0; i < n; ++i) x(i) = cplx(nd(rng), nd(rng));
    return v;
}

TruncatedFibreModel truncated_halfline_model(int points, double theta_cutoff) {
    if (points < 8 || points % 2 != 0)
        throw std::invalid_argument("truncated_halfline_model: need an even point count >= 8");
    TruncatedFibreModel m;
    m.points = points;
    m.theta_cutoff = theta_cutoff;
    m.step = 2.0 * theta_cutoff / points;
    CMat v(points, points);
    RVec logs(points);
    const double norm = 1.0 / std::sqrt(static_cast<double>(points));
    for (int col = 0; col < points; ++col) {
        int mode = col - points / 2;
        double kappa = numerics::kPi * (mode + 0.5) / theta_cutoff;
        logs(col) = kTwoPi * kappa;
        for (int j = 0; j < points; ++j) v(j, col) = norm * std::polar(1.0, kappa * (m.step * j));
    }
    m.subspace = from_modular_data(v, logs, CMat::Identity(points, points));
    return m;
}

CVec sample_fibre(const TruncatedFibreModel& m, const numerics::SmoothFn1D& k) {
    CVec v(m.points);
    const double w = std::sqrt(m.step / kTwoPi);
    for (int j = 0; j < m.points; ++j) v(j) = w * k.fourier(std::exp(-m.node(j)));
    return v;
}

}  // namespace nullplane::stdsubspace
