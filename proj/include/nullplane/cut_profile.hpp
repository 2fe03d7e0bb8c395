#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "nullplane/numerics.hpp"

namespace nullplane::nullcut {

using numerics::SmoothBump;

// coefficient * prod_d factors[d](x_d)
struct TransverseBump {
    double coefficient = 1.0;
    std::vector<SmoothBump> factors;
    double value(const std::vector<double>& x) const;
};

using Box = std::vector<std::pair<double, double>>;

// Continuous cut profile C(x_perp): constant plus product bumps, closed under
// pointwise min/max, sums and scaling. Immutable; copies share structure.
class CutProfile {
public:
    CutProfile();  // C = 0
    CutProfile(double base, std::vector<TransverseBump> bumps, bool nonneg_flag = false);
    static CutProfile constant(double c, bool nonneg_flag = false);

    double operator()(const std::vector<double>& x) const;
    double at(double x) const { return (*this)(std::vector<double>{x}); }

    bool nonneg_flag() const { return nonneg_; }
    bool is_constant() const;
    // Value outside the variation box.
    double far_value() const;
    // Hull of the region where the profile can differ from far_value(); nullopt if constant.
    std::optional<Box> variation_box() const;
    // Bump edges along one transverse coordinate, sorted and unique.
    std::vector<double> breakpoints(int dim) const;
    // Number of transverse coordinates the bumps use; 0 for a constant profile.
    int dims() const;

    // Throws ProfileOrderViolation if the profile is negative at any of the nodes.
    void require_nonneg(const std::vector<std::vector<double>>& nodes, const char* what) const;

    static CutProfile min(const CutProfile& a, const CutProfile& b);
    static CutProfile max(const CutProfile& a, const CutProfile& b);
    CutProfile operator+(const CutProfile& o) const;
    CutProfile scaled(double c) const;
    // Same profile with the nonnegativity flag set (and checked).
    CutProfile with_nonneg_flag() const;

private:
    struct Node;
    std::shared_ptr<const Node> node_;
    bool nonneg_ = false;
    explicit CutProfile(std::shared_ptr<const Node> n, bool nonneg);
    void check_own_nodes() const;
};

// Tensor Gauss-Legendre nodes (points_per_dim per coordinate) over a box.
struct TransverseQuadrature {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
};
TransverseQuadrature transverse_quadrature(const Box& box, int points_per_dim,
                                           const std::vector<std::vector<double>>& breakpoints = {});

}  // namespace nullplane::nullcut
