#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nullplane/nullcut.hpp"

namespace nullplane::entropy {

using nullcut::CutProfile;
using nullcut::TransverseQuadrature;
using numerics::cplx;
using numerics::QuadratureSpec;
using oneparticle::DirectIntegralVector;
using oneparticle::MassShellParams;
using oneparticle::ThinTestFunction;

// Coherent state omega o beta_h. h need not have zero mean along x_+.
struct BMTState {
    ThinTestFunction h;

    void validate(int transverse_dim) const;
    // G(x_+, x_perp) = int_{-inf}^{x_+} h(y, x_perp) dy
    double primitive(double x_plus, const std::vector<double>& x_perp, const QuadratureSpec& spec) const;
    // h minus a compensator supported in (C - 2w, C - w) that cancels every fibre's
    // integral; identical to h above C.
    ThinTestFunction reduced(const CutProfile& c, double w = 1.0) const;
};

struct FibreEntropy {
    std::vector<double> x_perp;
    double weight;
    double entropy;
};

struct EntropyReport {
    double S = 0.0;
    double S_prime = 0.0;
    double S_double_prime = 0.0;
    std::vector<FibreEntropy> per_fibre;
    // |S - S on a transverse grid with half the points|
    double quadrature_error = 0.0;
    std::map<std::string, double> identity_residuals;
};

// <w(xi) Omega, w(eta) Omega>
cplx weyl_overlap(const DirectIntegralVector& xi, const DirectIntegralVector& eta);

// Transverse grid over supp h with bump edges of h and the given profiles as breakpoints.
TransverseQuadrature entropy_grid(const BMTState& state, const std::vector<const CutProfile*>& profiles,
                                  int points_per_dim);

// pi int dx_perp int_{C}^inf (x_+ - C) h^2 dx_+, fibre by fibre.
EntropyReport nullcut_entropy(const BMTState& state, const CutProfile& c, const QuadratureSpec& spec);
double nullcut_entropy_on(const BMTState& state, const CutProfile& c, const TransverseQuadrature& grid,
                          const QuadratureSpec& spec);

struct Derivatives {
    double S_prime = 0.0;
    double S_double_prime = 0.0;
};

// d/dt and d^2/dt^2 of S(C + tA):
// S' = -pi int A int_{C+tA}^inf h^2,  S'' = pi int A^2 h(C+tA)^2.
Derivatives entropy_derivatives(const BMTState& state, const CutProfile& c, const CutProfile& a, double t,
                                const QuadratureSpec& spec);
Derivatives entropy_derivatives_on(const BMTState& state, const CutProfile& c, const CutProfile& a, double t,
                                   const TransverseQuadrature& grid, const QuadratureSpec& spec);

// int dx_perp A int_C^inf h^2 dx_+
double energy_null_cut(const BMTState& state, const CutProfile& a, const CutProfile& c, const QuadratureSpec& spec);

struct QnecRow {
    double t;
    double S;
    double S_prime;
    double S_double_prime;
    double qnec_margin;  // S'' / 2 pi
    bool strict;         // S'' > 1e-10
    // Richardson second difference of S; only where fd_checked.
    double S_double_prime_fd = 0.0;
    bool fd_checked = false;
    double fd_deviation = 0.0;
};

struct QnecReport {
    std::vector<QnecRow> rows;
    double min_S_double_prime = 0.0;
    double max_fd_deviation = 0.0;
    bool qnec_holds = true;     // every S'' >= -1e-10
    bool fd_consistent = true;  // every check within tolerance
};

// Finite differences use steps h and h/2 (Richardson). Rows with S'' >= 1e-3 max S'' are
// compared relatively (fd_rel_tol); the rest sit next to support edges and are compared
// against fd_rel_tol * max S''.
QnecReport qnec_sweep(const BMTState& state, const CutProfile& c, const CutProfile& a,
                      const std::vector<double>& t_grid, const QuadratureSpec& spec, double fd_step = 1e-3,
                      double fd_rel_tol = 1e-4);

struct AnecReport {
    double route_a = 0.0;  // (1/2 pi) int S''(t) dt
    double route_b = 0.0;  // (1/2) int int A h^2
    double route_c = 0.0;  // Im d/ds <w(h)Omega, w(U_A(s) h)Omega> at s = 0
    double t_min = 0.0;
    double t_max = 0.0;
    bool reduced = false;  // a compensator was needed
    double residual_ab() const;
    double residual_cb() const;
};

// All three routes use the zero-mode reduced function for the cut C.
AnecReport anec_identity(const BMTState& state, const CutProfile& c, const CutProfile& a,
                         const MassShellParams& params, const QuadratureSpec& spec);

struct SuperaddReport {
    double S_union = 0.0;         // cut min(C1, C2)
    double S_intersection = 0.0;  // cut max(C1, C2)
    double S1 = 0.0;
    double S2 = 0.0;
    double residual = 0.0;  // S_union + S_intersection - S1 - S2
    double max_S() const;
};

SuperaddReport superadditivity_check(const BMTState& state, const CutProfile& c1, const CutProfile& c2,
                                     const QuadratureSpec& spec);

}  // namespace nullplane::entropy
