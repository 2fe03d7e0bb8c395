#include "nullplane/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace nullplane::numerics {

void QuadratureSpec::validate() const {
    std::ostringstream why;
    if (compact_rule < 8) why << "compact_rule must be >= 8; ";
    if (theta_points < 8) why << "theta_points must be >= 8; ";
    if (transverse_points_per_dim < 8) why << "transverse_points_per_dim must be >= 8; ";
    if (!(theta_cutoff > 0)) why << "theta_cutoff must be > 0; ";
    if (!(abs_tol > 0) || !(rel_tol > 0)) why << "tolerances must be > 0; ";
    if (!(momentum_cutoff > 0)) why << "momentum_cutoff must be > 0; ";
    if (!why.str().empty()) throw std::invalid_argument("QuadratureSpec: " + why.str());
}

QuadratureSpec QuadratureSpec::scaled_tolerances(double factor) const {
    QuadratureSpec s = *this;
    s.abs_tol *= factor;
    s.rel_tol *= factor;
    return s;
}

namespace {

GaussRule compute_gauss(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p1 = x, p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
    return it->second;
}

void composite_nodes(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w) {
    const GaussRule& g = gauss_legendre(16);
    x.clear();
    w.clear();
    x.reserve(16 * panels);
    w.reserve(16 * panels);
    double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        double mid = a + (k + 0.5) * h;
        for (int i = 0; i < 16; ++i) {
            x.push_back(mid + 0.5 * h * g.nodes[i]);
            w.push_back(0.5 * h * g.weights[i]);
        }
    }
}

// ---------------------------------------------------------------- bumps

double bump_profile(double u) {
    double d = 1.0 - u * u;
    if (d <= 0.0) return 0.0;
    return std::exp(-1.0 / d);
}

double bump_profile_derivative(double u) {
    double d = 1.0 - u * u;
    if (d <= 0.0) return 0.0;
    return std::exp(-1.0 / d) * (-2.0 * u / (d * d));
}

double bump_transform(double q) {
    q = std::abs(q);
    // |transform| < 1e-21 beyond this point; quadrature there only returns roundoff.
    if (q > 2000.0) return 0.0;
    const GaussRule& g = gauss_legendre(16);
    const int panels = std::max(16, static_cast<int>(std::ceil(q / 4.0)));
    const double h = 1.0 / panels;
    // Nodes and weighted profile values for the common 16-panel rule.
    struct Table {
        std::vector<double> u, wphi;
    };
    static const Table base = [&] {
        Table t;
        const double hb = 1.0 / 16;
        for (int k = 0; k < 16; ++k)
            for (int i = 0; i < 16; ++i) {
                double u = (k + 0.5) * hb + 0.5 * hb * g.nodes[i];
                t.u.push_back(u);
                t.wphi.push_back(g.weights[i] * bump_profile(u) * 0.5 * hb);
            }
        return t;
    }();
    KahanSum<double> acc;
    if (panels == 16) {
        for (int k = 0; k < 16; ++k) {
            double s = 0.0;
            for (int i = 0; i < 16; ++i) s += base.wphi[16 * k + i] * std::cos(q * base.u[16 * k + i]);
            acc.add(s);
        }
        return 2.0 * acc.value();
    }
    for (int k = 0; k < panels; ++k) {
        double mid = (k + 0.5) * h;
        double s = 0.0;
        for (int i = 0; i < 16; ++i) {
            double u = mid + 0.5 * h * g.nodes[i];
            s += g.weights[i] * std::cos(q * u) * bump_profile(u);
        }
        acc.add(s * 0.5 * h);
    }
    return 2.0 * acc.value();
}

namespace {
double bump_mass() {
    static const double m = bump_transform(0.0);
    return m;
}
}  // namespace

void SmoothBump::validate() const {
    if (!(half_width > 0.0)) throw std::invalid_argument("SmoothBump: half_width must be > 0");
    if (derivative_order != 0 && derivative_order != 1)
        throw std::invalid_argument("SmoothBump: derivative_order must be 0 or 1");
}

double SmoothBump::value(double x) const {
    double u = (x - center) / half_width;
    if (derivative_order == 0) return amplitude * bump_profile(u);
    return amplitude / half_width * bump_profile_derivative(u);
}

cplx SmoothBump::fourier(double p) const {
    cplx base = amplitude * half_width * std::polar(1.0, p * center) * bump_transform(p * half_width);
    if (derivative_order == 0) return base;
    return cplx(0.0, -p) * base;
}

double SmoothBump::integral() const {
    return derivative_order == 0 ? amplitude * half_width * bump_mass() : 0.0;
}

double SmoothFn1D::value(double x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.bump.value(x);
    return s;
}

cplx SmoothFn1D::fourier(double p) const {
    cplx s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.bump.fourier(p);
    return s;
}

bool SmoothFn1D::empty() const {
    for (const auto& t : terms)
        if (t.coefficient != 0.0 && t.bump.amplitude != 0.0) return false;
    return true;
}

std::optional<std::pair<double, double>> SmoothFn1D::support() const {
    std::optional<std::pair<double, double>> s;
    for (const auto& t : terms) {
        if (t.coefficient == 0.0 || t.bump.amplitude == 0.0) continue;
        if (!s)
            s = std::make_pair(t.bump.lo(), t.bump.hi());
        else
            s = std::make_pair(std::min(s->first, t.bump.lo()), std::max(s->second, t.bump.hi()));
    }
    return s;
}

std::vector<double> SmoothFn1D::breakpoints() const {
    std::vector<double> b;
    for (const auto& t : terms) {
        if (t.coefficient == 0.0 || t.bump.amplitude == 0.0) continue;
        b.push_back(t.bump.lo());
        b.push_back(t.bump.hi());
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

double SmoothFn1D::zero_mode() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * t.bump.integral();
    return s;
}

bool SmoothFn1D::structurally_zero_mean() const {
    for (const auto& t : terms)
        if (t.bump.derivative_order == 0 && t.coefficient != 0.0 && t.bump.amplitude != 0.0) return false;
    return true;
}

SmoothFn1D SmoothFn1D::translated(double a) const {
    SmoothFn1D r = *this;
    for (auto& t : r.terms) t.bump.center += a;
    return r;
}

SmoothFn1D SmoothFn1D::dilated(double alpha) const {
    // e^{-a} f(e^{-a}x): widths and centers scale by e^{a}; the order-0 amplitude picks up
    // e^{-a}, while order-1 bumps absorb it through the 1/width of the derivative.
    double s = std::exp(alpha);
    SmoothFn1D r = *this;
    for (auto& t : r.terms) {
        t.bump.center *= s;
        t.bump.half_width *= s;
        if (t.bump.derivative_order == 0) t.bump.amplitude /= s;
    }
    return r;
}

SmoothFn1D SmoothFn1D::scaled(double c) const {
    SmoothFn1D r = *this;
    for (auto& t : r.terms) t.coefficient *= c;
    return r;
}

SmoothFn1D SmoothFn1D::operator+(const SmoothFn1D& o) const {
    SmoothFn1D r = *this;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    return r;
}

// ---------------------------------------------------------------- quadrature

namespace {

double composite_sum(const RealFn& f, const std::vector<double>& cuts, int base_panels_per_unit,
                     int level) {
    const GaussRule& g = gauss_legendre(16);
    KahanSum<double> acc;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s], b = cuts[s + 1];
        double len = b - a;
        if (len <= 0.0) continue;
        int panels = std::max(1, static_cast<int>(std::ceil(len * base_panels_per_unit))) << level;
        double h = len / panels;
        for (int k = 0; k < panels; ++k) {
            double mid = a + (k + 0.5) * h;
            double p = 0.0;
            for (int i = 0; i < 16; ++i) p += g.weights[i] * f(mid + 0.5 * h * g.nodes[i]);
            acc.add(0.5 * h * p);
        }
    }
    return acc.value();
}

}  // namespace

IntegrationResult integrate_1d(const RealFn& f, double a, double b, const QuadratureSpec& spec,
                               const std::vector<double>& breakpoints) {
    IntegrationResult r;
    if (!(b > a)) return r;
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate_1d: interval must be finite");
    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    constexpr int kMaxLevel = 12;
    double prev = composite_sum(f, cuts, spec.compact_rule, 0);
    for (int level = 1; level <= kMaxLevel; ++level) {
        double cur = composite_sum(f, cuts, spec.compact_rule, level);
        double change = std::abs(cur - prev);
        double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(cur));
        r.value = cur;
        r.error = change;
        r.panels = level;
        if (change <= tol) return r;
        prev = cur;
    }
    std::ostringstream os;
    os << "integrate_1d: doubling panels still changes the result by " << r.error << " on [" << a
       << ", " << b << "]";
    throw NonConvergent(os.str());
}

IntegrationResult integrate_1d(const SmoothFn1D& f, double a, double b, const QuadratureSpec& spec) {
    auto sup = f.support();
    if (!sup) return {};
    double lo = std::max(a, sup->first), hi = std::min(b, sup->second);
    if (!(hi > lo)) return {};
    return integrate_1d([&f](double x) { return f.value(x); }, lo, hi, spec, f.breakpoints());
}

IntegrationResult integrate_1d(const SmoothFn1D& f, const QuadratureSpec& spec) {
    auto sup = f.support();
    if (!sup) return {};
    return integrate_1d(f, sup->first, sup->second, spec);
}

double primitive(const SmoothFn1D& f, double x, const QuadratureSpec& spec) {
    auto sup = f.support();
    if (!sup || x <= sup->first) return 0.0;
    return integrate_1d(f, sup->first, std::min(x, sup->second), spec).value;
}

// ---------------------------------------------------------------- grids

ThetaGrid ThetaGrid::from_spec(const QuadratureSpec& spec) {
    ThetaGrid g;
    g.lo = -spec.theta_cutoff;
    g.size = spec.theta_points;
    g.step = 2.0 * spec.theta_cutoff / (spec.theta_points - 1);
    return g;
}

namespace {

template <class T>
std::vector<T> fd4(const std::vector<T>& f, double h, const QuadratureSpec& spec) {
    const std::size_t n = f.size();
    if (n < 5) throw std::invalid_argument("spectral_diff: need at least 5 samples");
    double leak = 1e3 * spec.abs_tol;
    if (std::abs(f.front()) > leak || std::abs(f.back()) > leak) {
        std::ostringstream os;
        os << "spectral_diff: end values " << std::abs(f.front()) << ", " << std::abs(f.back())
           << " exceed " << leak;
        throw BoundaryLeak(os.str());
    }
    std::vector<T> d(n);
    const double c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for (std::size_t j = 2; j + 2 < n; ++j)
        d[j] = c * (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]);
    d[n - 2] = -c * (-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]);
    d[n - 1] = -c * (-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]);
    return d;
}

}  // namespace

std::vector<cplx> spectral_diff(const std::vector<cplx>& values, double step, const QuadratureSpec& spec) {
    return fd4(values, step, spec);
}

std::vector<double> spectral_diff(const std::vector<double>& values, double step,
                                  const QuadratureSpec& spec) {
    return fd4(values, step, spec);
}

std::vector<cplx> lagrange_shift(const std::vector<cplx>& values, const ThetaGrid& grid, double shift, int points) {
    if (points < 2 || points % 2 != 0) throw Error("lagrange_shift: point count must be even and >= 2");
    const int n = static_cast<int>(values.size());
    std::vector<cplx> out(n);
    if (shift == 0.0) return values;
    for (int j = 0; j < n; ++j) {
        double x = (grid.node(j) - shift - grid.lo) / grid.step;
        int base = static_cast<int>(std::floor(x));
        double frac = x - base;
        if (std::abs(frac) < 1e-14 || std::abs(frac - 1.0) < 1e-14) {
            int k = static_cast<int>(std::lround(x));
            out[j] = (k >= 0 && k < n) ? values[k] : cplx(0.0);
            continue;
        }
        int i0 = base - points / 2 + 1;
        cplx s = 0.0;
        for (int k = 0; k < points; ++k) {
            int i = i0 + k;
            if (i < 0 || i >= n) continue;
            double l = 1.0;
            for (int m = 0; m < points; ++m)
                if (m != k) l *= (x - (i0 + m)) / static_cast<double>(k - m);
            s += l * values[i];
        }
        out[j] = s;
    }
    return out;
}

double grid_norm2(const std::vector<cplx>& v, const ThetaGrid& grid) {
    KahanSum<double> acc;
    const std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) {
        double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        acc.add(w * std::norm(v[j]));
    }
    return acc.value() * grid.step;
}

cplx grid_inner(const std::vector<cplx>& a, const std::vector<cplx>& b, const ThetaGrid& grid) {
    if (a.size() != b.size()) throw RepresentationMismatch("grid_inner: size mismatch");
    KahanSum<cplx> acc;
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        acc.add(w * std::conj(a[j]) * b[j]);
    }
    return acc.value() * grid.step;
}

// ---------------------------------------------------------------- threads

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int thread_count() {
    if (const char* env = std::getenv("NULLPLANE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    int n = g_threads.load();
    return n > 0 ? n : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int t = std::min<std::size_t>(thread_count(), n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // Static striding keeps the work split independent of timing.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(t);
    for (int k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            try {
                for (std::size_t i = k; i < n; i += t) fn(i);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace nullplane::numerics
