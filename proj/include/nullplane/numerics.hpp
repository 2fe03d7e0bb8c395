#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "nullplane/errors.hpp"

namespace nullplane::numerics {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

struct QuadratureSpec {
    int compact_rule = 8;               // Gauss-Legendre panels per unit length
    double theta_cutoff = 12.0;         // theta' window is [-cutoff, cutoff]
    int theta_points = 512;
    int transverse_points_per_dim = 64;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    // Transverse momentum grid: trapezoid nodes on [-cutoff, cutoff].
    double momentum_cutoff = 400.0;

    void validate() const;
    QuadratureSpec scaled_tolerances(double factor) const;
};

// Neumaier-compensated accumulator; summation order is the caller's.
template <class T>
class KahanSum {
public:
    void add(T x) {
        T t = sum_ + x;
        if constexpr (std::is_same_v<T, double>) {
            if (std::abs(sum_) >= std::abs(x))
                comp_ += (sum_ - t) + x;
            else
                comp_ += (x - t) + sum_;
        } else {
            comp_ += componentwise(sum_, x, t);
        }
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    static T componentwise(T s, T x, T t) {
        auto part = [](double a, double b, double c) {
            return std::abs(a) >= std::abs(b) ? (a - c) + b : (b - c) + a;
        };
        return T(part(s.real(), x.real(), t.real()), part(s.imag(), x.imag(), t.imag()));
    }
    T sum_{};
    T comp_{};
};

// Gauss-Legendre rule on [-1,1]; cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// Nodes and weights of a composite 16-point rule on [a,b] with the given panel count.
void composite_nodes(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w);

// Smooth compactly supported bump exp(-1/(1-u^2)), u=(x-center)/half_width.
// Order 1 is the x-derivative of the order-0 bump with the same parameters.
struct SmoothBump {
    double center = 0.0;
    double half_width = 1.0;
    double amplitude = 1.0;
    int derivative_order = 0;

    void validate() const;
    double value(double x) const;
    double lo() const { return center - half_width; }
    double hi() const { return center + half_width; }
    // Fourier transform int e^{ixp} b(x) dx.
    cplx fourier(double p) const;
    // Exact integral over the real line.
    double integral() const;
};

// phi(u) = exp(-1/(1-u^2)) and its derivative.
double bump_profile(double u);
double bump_profile_derivative(double u);
// int_{-1}^{1} e^{iqu} phi(u) du; real and even in q.
double bump_transform(double q);

struct SmoothFn1D {
    struct Term {
        double coefficient = 1.0;
        SmoothBump bump;
    };
    std::vector<Term> terms;

    double value(double x) const;
    cplx fourier(double p) const;
    bool empty() const;
    // Support hull; nullopt if every term is zero.
    std::optional<std::pair<double, double>> support() const;
    std::vector<double> breakpoints() const;
    // Exact total integral from the closed forms.
    double zero_mode() const;
    // True iff every nonzero term is an order-1 bump.
    bool structurally_zero_mean() const;

    // x -> f(x - a)
    SmoothFn1D translated(double a) const;
    // x -> e^{-alpha} f(e^{-alpha} x)
    SmoothFn1D dilated(double alpha) const;
    SmoothFn1D scaled(double c) const;
    SmoothFn1D operator+(const SmoothFn1D& o) const;
};

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

// Composite Gauss-Legendre with panel doubling. Breakpoints inside (a,b) split panels.
IntegrationResult integrate_1d(const RealFn& f, double a, double b, const QuadratureSpec& spec,
                               const std::vector<double>& breakpoints = {});
IntegrationResult integrate_1d(const SmoothFn1D& f, double a, double b, const QuadratureSpec& spec);
// Over the whole line.
IntegrationResult integrate_1d(const SmoothFn1D& f, const QuadratureSpec& spec);

double primitive(const SmoothFn1D& f, double x, const QuadratureSpec& spec);

// Uniform grid including both endpoints.
struct ThetaGrid {
    double lo = -12.0;
    double step = 0.0;
    int size = 0;

    static ThetaGrid from_spec(const QuadratureSpec& spec);
    double node(int j) const { return lo + step * j; }
    double hi() const { return node(size - 1); }
    bool operator==(const ThetaGrid& o) const {
        return lo == o.lo && step == o.step && size == o.size;
    }
};

// Derivative on a uniform grid: fourth-order central, one-sided fourth-order at the ends.
std::vector<cplx> spectral_diff(const std::vector<cplx>& values, double step,
                                const QuadratureSpec& spec);
std::vector<double> spectral_diff(const std::vector<double>& values, double step,
                                  const QuadratureSpec& spec);

// Samples of v(theta - shift) by Lagrange interpolation on the nearest points (six
// by default, i.e. fifth order); samples outside the grid count as zero.
std::vector<cplx> lagrange_shift(const std::vector<cplx>& values, const ThetaGrid& grid, double shift,
                                 int points = 6);

// Trapezoid integral of |v|^2 and of conj(a) b on the grid.
double grid_norm2(const std::vector<cplx>& v, const ThetaGrid& grid);
cplx grid_inner(const std::vector<cplx>& a, const std::vector<cplx>& b, const ThetaGrid& grid);

// Worker threads for fibre-parallel maps; NULLPLANE_THREADS overrides.
void set_thread_count(int n);
int thread_count();
// Calls fn(i) for i in [0,n); each index is handled exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nullplane::numerics
