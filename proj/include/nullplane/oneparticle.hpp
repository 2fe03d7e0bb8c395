#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nullplane/cut_profile.hpp"
#include "nullplane/fibre.hpp"
#include "nullplane/numerics.hpp"

namespace nullplane::oneparticle {

using fibre::FibreVector;
using numerics::cplx;
using numerics::QuadratureSpec;
using numerics::SmoothFn1D;
using numerics::ThetaGrid;
using nullcut::Box;
using nullcut::CutProfile;

struct MassShellParams {
    double mass = 1.0;
    int spacetime_dim = 2;  // D; the transverse dimension is D - 1
    int transverse_dim() const { return spacetime_dim - 1; }
    void validate() const;
};

// sqrt(m^2 + |p_perp|^2)
double omega(const std::vector<double>& p_perp, const MassShellParams& params);

// u(x_+ - s(x_perp)) * prod_d v[d](x_d); s = 0 when no shift is given.
struct ThinTerm {
    SmoothFn1D u;
    std::vector<SmoothFn1D> v;
    std::optional<CutProfile> shift;
};

// g(x_+, x_perp) = sum of thin terms; stands for delta(x_-) g.
struct ThinTestFunction {
    std::vector<ThinTerm> terms;

    void validate(int transverse_dim) const;
    int transverse_dim() const;
    // True iff every u integrates to zero exactly.
    bool zero_mode_flag(double tol = 0.0) const;
    double value(double x_plus, const std::vector<double>& x_perp) const;
    // x_+ -> g(x_+, x_perp) as a 1-D bump expansion.
    SmoothFn1D fibre_source(const std::vector<double>& x_perp) const;
    // Transverse support hull; nullopt if g = 0.
    std::optional<Box> transverse_support() const;
    // Hull in x_+ over all transverse points.
    std::optional<std::pair<double, double>> plus_support() const;
    // (x_+, x_perp) -> g(x_+ - C(x_perp), x_perp)
    ThinTestFunction translated_by(const CutProfile& c) const;
    // g^(p_-, p_perp) = int e^{i(x_+ p_- - x_perp.p_perp)} g
    cplx fourier(double p_minus, const std::vector<double>& p_perp, const QuadratureSpec& spec) const;
};

enum class Representation { momentum, spatial };

struct TransverseNode {
    std::vector<double> point;
    double weight = 0.0;
};

// Direct integral over transverse nodes of theta'-fibres. In the momentum
// representation the weights carry (2 pi)^{-(D-1)}, so both representations share
// norm^2 = sum_k w_k |xi_k|^2_fibre.
struct DirectIntegralVector {
    Representation representation = Representation::spatial;
    MassShellParams params;
    ThetaGrid grid;
    // Spatial box the transverse Fourier grids are built for.
    Box box;
    std::vector<TransverseNode> nodes;
    std::vector<FibreVector> fibres;
    std::optional<ThinTestFunction> origin;

    double norm2() const;
    double norm() const { return std::sqrt(norm2()); }
    cplx inner(const DirectIntegralVector& other) const;
    double max_interpolation_error() const;
    bool same_layout(const DirectIntegralVector& other) const;
};

// Trapezoid momentum nodes with spacing pi / R covering |p_d| <= momentum_cutoff;
// offset by half a step when m = 0 so that p_perp = 0 is not a node.
std::vector<TransverseNode> momentum_nodes(const Box& box, const MassShellParams& params,
                                           const QuadratureSpec& spec);
// Gauss-Legendre spatial nodes over the box.
std::vector<TransverseNode> spatial_nodes(const Box& box, const QuadratureSpec& spec);

// Fibres g^(e^{-theta'}, p_perp) on the momentum nodes.
DirectIntegralVector fourier_restrict(const ThinTestFunction& g, const MassShellParams& params,
                                      const QuadratureSpec& spec);
// Same vector built fibre by fibre in the spatial representation: at each spatial
// node the fibre of x_+ -> g(x_+, x_perp).
DirectIntegralVector spatial_restrict(const ThinTestFunction& g, const MassShellParams& params,
                                      const QuadratureSpec& spec, std::optional<Box> box = std::nullopt);

DirectIntegralVector to_spatial(const DirectIntegralVector& v, const QuadratureSpec& spec);
DirectIntegralVector to_momentum(const DirectIntegralVector& v, const QuadratureSpec& spec);

// e^{i a_+ e^{-theta'}} xi(theta' - alpha, .), fibre-wise.
DirectIntegralVector boost_translate(const DirectIntegralVector& v, double alpha, double a_plus,
                                     const QuadratureSpec& spec);

struct ZeroModeReport {
    std::vector<double> term_integrals;
    std::vector<std::size_t> offending_terms;
    std::vector<double> cutoffs;
    // int_{-Theta}^{Theta} dtheta' int dp_perp |g^(e^{-theta'}, p_perp)|^2 per cutoff
    std::vector<double> truncated_norms;
    // Increase of the truncated norm per unit Theta between consecutive cutoffs.
    std::vector<double> growth_rates;
    // int dp_perp |g^(0, p_perp)|^2
    double zero_mode_weight = 0.0;
    bool zero_mean() const { return offending_terms.empty(); }
};

ZeroModeReport zero_mode_diagnose(const ThinTestFunction& g, const MassShellParams& params,
                                  const QuadratureSpec& spec,
                                  const std::vector<double>& cutoffs = {8.0, 9.0, 10.0, 11.0, 12.0});

// int d^{D-1}p_perp int dp_1 / omega |g^(p_-, p_perp)|^2 with p_- = (omega - p_1)/sqrt 2,
// on the momentum nodes of fourier_restrict. Independent of the theta' grid.
double mass_shell_norm2(const ThinTestFunction& g, const MassShellParams& params, const QuadratureSpec& spec);

// int dtheta' d^{D-1}p_perp |g^|^2 of a momentum-representation vector, i.e. (2 pi)^D |v|^2.
double theta_coordinate_norm2(const DirectIntegralVector& v);

}  // namespace nullplane::oneparticle
