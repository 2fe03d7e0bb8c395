#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nullplane/errors.hpp"
#include "nullplane/numerics.hpp"

namespace nullplane::stdsubspace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Realification: xi = x + iy  <->  (x; y). Real inner product is the plain dot product.
RVec realify(const CVec& v);
CVec complexify(const RVec& v);
// Complex-linear A + iB  ->  [[A, -B], [B, A]].
RMat realify_linear(const CMat& a);
CMat complexify_linear(const RMat& r);
// Antilinear xi -> M conj(xi), M = P + iQ  ->  [[P, Q], [Q, -P]].
RMat realify_antilinear(const CMat& m);
CMat complexify_antilinear(const RMat& r);

// Finite-dimensional standard subspace with modular data.
// Convention: S = J Delta^{1/2}, Delta = S* S.
struct StandardSubspaceFD {
    int ambient_dim = 0;
    std::vector<CVec> spanning;
    // Columns form a real-orthonormal basis of H (empty when built from modular data).
    CMat basis;
    RMat S_real;
    RMat Delta_real;
    RMat J_real;
    // Delta = V diag(exp(log_eigs)) V^*.
    CMat eigvecs;
    RVec log_eigs;
    // J xi = J_matrix * conj(xi).
    CMat J_matrix;

    bool has_tomita() const { return S_real.size() > 0; }
    CVec apply_J(const CVec& v) const { return J_matrix * v.conjugate(); }
    CVec apply_S(const CVec& v) const;
    // Delta^{z} for complex exponent z.
    CMat delta_power(std::complex<double> z) const;
    CMat log_delta() const;
    // Orthogonal projection onto H in the realification.
    RMat real_projector() const;
};

StandardSubspaceFD make_subspace(const std::vector<CVec>& spanning);

// From a unitary eigenbasis of Delta, its log-eigenvalues and J as a matrix acting on
// conjugated vectors. Used where Delta is too ill-conditioned to rebuild from a span.
StandardSubspaceFD from_modular_data(const CMat& eigvecs, const RVec& log_eigs, const CMat& J_matrix);

StandardSubspaceFD symplectic_complement(const StandardSubspaceFD& h);

// Operator-norm distance of the real orthogonal projections onto two real subspaces,
// each given by spanning columns of a realified matrix.
double subspace_distance(const RMat& a, const RMat& b);
RMat realified_span(const CMat& columns);

struct ModularRelationsReport {
    double involution_S = 0.0;    // |S^2 - 1|
    double involution_J = 0.0;    // |J^2 - 1|
    double polar = 0.0;           // |S - J Delta^{1/2}| / |S|
    double jdj = 0.0;             // |J Delta J - Delta^{-1}| / |Delta^{-1}|
    double invariance[3] = {0.0, 0.0, 0.0};  // d(Delta^{it} H, H), t = 0.1, 0.5, 1
    double j_complement = 0.0;    // d(J H, H')
    double complement_adjoint = 0.0;  // |S_{H'} - S^*| / |S|
    double symplectic = 0.0;      // max |Im<xi, eta>|, xi in H', eta in H
    double max() const;
};

ModularRelationsReport verify_modular_relations(const StandardSubspaceFD& h);

// Cutting projection P_H = a(Delta) + J b(Delta) on vectors, eigenvalue-1 part excised.
struct CuttingProjectionFD {
    const StandardSubspaceFD* h;
    double unit_tol = 1e-8;
    CVec apply(const CVec& v) const;
    RMat real_matrix() const;
};

// Im <psi, P_H i log(Delta) psi> with the bracket linear in the first slot;
// equals -<h, log(Delta) h> >= 0 for h in H.
double entropy_cutting(const StandardSubspaceFD& h, const CVec& psi);

// Projects out the eigenvalue-1 spectral subspace of Delta; maps H into H.
CVec remove_unit_spectrum(const StandardSubspaceFD& h, const CVec& v, double unit_tol = 1e-8);

struct TrotterResult {
    CMat product;  // at the largest step count
    CMat limit;    // exp(it(log Delta_H - log Delta_K))
    std::vector<int> steps;
    std::vector<double> errors;
    double observed_order = 0.0;
};

TrotterResult trotter_translation(const StandardSubspaceFD& h, const StandardSubspaceFD& k, double t,
                                  const std::vector<int>& n_steps);

// Random complex spanning set with n vectors in C^n (deterministic in seed).
std::vector<CVec> random_spanning(int n, unsigned seed);

// N-point truncation of the half-line U(1) fibre: anti-periodic theta' grid on
// [-Theta, Theta), log Delta = -2 pi i d/dtheta' diagonal in the Fourier modes,
// J = pointwise conjugation.
struct TruncatedFibreModel {
    int points = 0;
    double theta_cutoff = 0.0;
    double step = 0.0;
    StandardSubspaceFD subspace;
    double node(int j) const { return -theta_cutoff + step * j; }
};

TruncatedFibreModel truncated_halfline_model(int points, double theta_cutoff);

// Samples sqrt(step/2pi) k^(e^{-theta'}) so that the Euclidean norm matches the fibre norm.
CVec sample_fibre(const TruncatedFibreModel& m, const numerics::SmoothFn1D& k);

}  // namespace nullplane::stdsubspace
