#pragma once

#include <vector>

#include "nullplane/cut_profile.hpp"
#include "nullplane/oneparticle.hpp"

namespace nullplane::nullcut {

using oneparticle::DirectIntegralVector;
using numerics::QuadratureSpec;

// Spatial direct-integral vector whose fibre witnesses are claimed to live in
// N_C = {x_+ > C(x_perp)}.
struct NullCutVector {
    DirectIntegralVector vec;
    CutProfile cut;
    // Every fibre with a witness has it supported in [C(x_perp), infinity).
    bool witnesses_localized() const;
};

NullCutVector make_nullcut_vector(DirectIntegralVector spatial, CutProfile cut);

// (T_C xi)(theta', x) = e^{i C(x) e^{-theta'}} xi(theta', x)
DirectIntegralVector distorted_translate(const DirectIntegralVector& v, const CutProfile& c);

// (D_C xi)(theta', x) = xi(theta' - C(x), x)
DirectIntegralVector distorted_dilate(const DirectIntegralVector& v, const CutProfile& c,
                                      const QuadratureSpec& spec);

// Delta^{is} of H(N_C): the half-line flow of each fibre conjugated by the translation
// to C(x). Negative s dilates witnesses away from the cut by e^{2 pi |s|}.
NullCutVector modular_flow_nullcut(const NullCutVector& v, const CutProfile& c, double s,
                                   const QuadratureSpec& spec);

// log Delta of H(N_C) applied fibre-wise: -2 pi i d/dtheta' + 2 pi C(x) e^{-theta'}.
DirectIntegralVector modular_generator_apply(const NullCutVector& v, const CutProfile& c,
                                             const QuadratureSpec& spec);

// Witness map of Delta^{is} for the half-line above the cut value c:
// x_+ -> c + e^{-2 pi s}(x_+ - c).
numerics::SmoothFn1D transport_witness(const numerics::SmoothFn1D& g, double c, double s);

struct HsmiReport {
    std::vector<double> s_values;
    // min over fibres of (lower edge of the transported witness - C2)
    std::vector<double> margins;
    // True where the fibre-level flow also stayed inside the theta' window.
    std::vector<bool> fibre_flow_in_window;
    bool positive() const;
    bool non_decreasing() const;
};

// For each s >= 0 applies Delta_{H(N_C1)}^{-is} to the witnesses of g and measures how
// far they stay above C2.
HsmiReport hsmi_support_witness(const CutProfile& c1, const CutProfile& c2, const oneparticle::ThinTestFunction& g,
                                const std::vector<double>& s_grid, const oneparticle::MassShellParams& params,
                                const QuadratureSpec& spec);

}  // namespace nullplane::nullcut
