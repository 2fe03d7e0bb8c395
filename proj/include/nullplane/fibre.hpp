#pragma once

#include <optional>
#include <vector>

#include "nullplane/numerics.hpp"

namespace nullplane::fibre {

using numerics::cplx;
using numerics::QuadratureSpec;
using numerics::SmoothFn1D;
using numerics::ThetaGrid;

// One U(1)-current fibre vector sampled in theta' (p = e^{-theta'}).
// Inner product: (1/2pi) int conj(a) b dtheta'.
struct FibreVector {
    ThetaGrid grid;
    std::vector<cplx> values;
    // Position-space witness g with xi = g^(e^{-theta'}).
    std::optional<SmoothFn1D> source;
    // Relative L2 deviation of interpolated samples from samples of the transported
    // witness (without a witness: from a lower-order interpolant); accumulates over
    // successive shifts.
    double interpolation_error = 0.0;

    double norm2() const;
    double norm() const;
    cplx inner(const FibreVector& other) const;
};

struct IntervalSubspaceTag {
    double a;
    double b;
    IntervalSubspaceTag(double lo, double hi);
    bool contains_support(const SmoothFn1D& g) const;
};

FibreVector zero_fibre(const QuadratureSpec& spec);

// Samples of g^(e^{-theta'}) on the grid of spec. Requires int g = 0.
FibreVector make_fibre(const SmoothFn1D& g, const QuadratureSpec& spec);

// Exact samples of the witness on an existing grid, no zero-mode or window checks.
std::vector<cplx> sample_transform(const SmoothFn1D& g, const ThetaGrid& grid);

// Smooth fibre exp(-(theta'-c)^2/(2 w^2)) e^{ik theta'}; not tied to a witness.
FibreVector gaussian_fibre(const QuadratureSpec& spec, double center, double width,
                           double wavenumber, double amplitude = 1.0);

// Current picture: the fibre of g = G' for a primitive G built from order-0 bumps.
FibreVector fibre_from_primitive(const SmoothFn1D& G, const QuadratureSpec& spec);

// (1/2) int G f dx with G the primitive of g.
double symplectic_form(const SmoothFn1D& g, const SmoothFn1D& f, const QuadratureSpec& spec);

// (U(alpha,t) xi)(theta') = e^{it e^{-theta'}} xi(theta' - alpha).
FibreVector u1_act(const FibreVector& xi, double alpha, double t, const QuadratureSpec& spec);

// Delta^{is} of the half-line (a, infinity).
FibreVector modular_flow_halfline(const FibreVector& xi, double s, double a, const QuadratureSpec& spec);

// pi int_t^inf (x - t) k(x)^2 dx.
double halfline_entropy(const SmoothFn1D& k, double t, const QuadratureSpec& spec);

// Throws BoundaryLeak when |values|^2 at either grid end exceeds 1e3 abs_tol.
void check_window(const std::vector<cplx>& values, const QuadratureSpec& spec, const char* what);

}  // namespace nullplane::fibre
