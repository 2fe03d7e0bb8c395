#include <catch_amalgamated.hpp>

#include <cmath>

#include "nullplane/fibre.hpp"
#include "oracles.hpp"

using namespace nullplane;
using namespace nullplane::fibre;
using numerics::kPi;
using numerics::kTwoPi;
using numerics::SmoothBump;
using Catch::Approx;

namespace {

// Frozen oracle values (adaptive Simpson on the p variable, tests/oracles.hpp).
// int_0^inf |g^(p)|^2 dp/p for the order-1 bump at 0.5, half width 1.
constexpr double kNormOracle = 0.56331383510919564;
// int_0^inf Im(conj g^ f^) dp/p, g and f order-1 bumps of half width 1 at 0 and 0.5.
constexpr double kImInnerOracle = 0.38529046799402966;
// pi int_0^inf x k^2 for the order-1 bump on (1,3).
constexpr double kHalflineEntropy = 2.5735114021326679;
// Same k, cut at t = 2.5.
constexpr double kHalflineEntropyCut = 0.11434963583172718;

SmoothFn1D d1(double c, double w, double a = 1.0) { return SmoothFn1D{{{1.0, SmoothBump{c, w, a, 1}}}}; }

QuadratureSpec refined(int points) {
    QuadratureSpec s;
    s.theta_points = points;
    return s;
}

double rel_dist(const FibreVector& a, const FibreVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
        num += std::norm(a.values[j] - b.values[j]);
        den += std::norm(b.values[j]);
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("make_fibre", "[fibre]") {
    QuadratureSpec spec;
    SECTION("zero function") {
        auto f = make_fibre(SmoothFn1D{}, spec);
        for (auto v : f.values) REQUIRE(v == cplx(0.0));
        REQUIRE(f.norm2() == 0.0);
    }
    SECTION("order-1 bump decays at the window ends") {
        auto f = make_fibre(d1(0.0, 1.0), spec);
        REQUIRE(std::isfinite(f.norm2()));
        REQUIRE(f.norm2() > 0.0);
        REQUIRE(std::norm(f.values.back()) <= spec.abs_tol);
        REQUIRE(std::norm(f.values.front()) <= spec.abs_tol);
    }
    SECTION("zero mode is rejected") {
        SmoothFn1D g{{{1.0, SmoothBump{0.0, 1.0, 1.0, 0}}}};
        REQUIRE_THROWS_AS(make_fibre(g, spec), ZeroModePresent);
    }
    SECTION("norm matches the momentum-variable oracle") {
        auto f = make_fibre(d1(0.5, 1.0), refined(1024));
        REQUIRE(f.norm2() * kTwoPi == Approx(kNormOracle).epsilon(spec.rel_tol));
    }
    SECTION("samples agree with direct quadrature of the transform") {
        auto f = make_fibre(d1(0.3, 0.8), spec);
        for (int j : {40, 200, 300, 480}) {
            double p = std::exp(-f.grid.node(j));
            double re = oracle::adaptive_simpson(
                [&](double x) { return std::cos(p * x) * d1(0.3, 0.8).value(x); }, -0.5, 1.1, 1e-13, 256);
            double im = oracle::adaptive_simpson(
                [&](double x) { return std::sin(p * x) * d1(0.3, 0.8).value(x); }, -0.5, 1.1, 1e-13, 256);
            REQUIRE(std::abs(f.values[j] - cplx(re, im)) <= spec.abs_tol);
        }
    }
}

TEST_CASE("symplectic form", "[fibre]") {
    QuadratureSpec spec;
    SmoothFn1D g = d1(0.0, 1.0), f = d1(0.5, 1.0);
    SECTION("vanishes on the diagonal") { REQUIRE(std::abs(symplectic_form(g, g, spec)) <= 1e-10); }
    SECTION("local") {
        REQUIRE(symplectic_form(d1(3.0, 0.5), d1(0.0, 1.0), spec) == 0.0);
        REQUIRE(symplectic_form(d1(0.0, 1.0), d1(3.0, 0.5), spec) == 0.0);
    }
    SECTION("antisymmetric") {
        REQUIRE(std::abs(symplectic_form(g, f, spec) + symplectic_form(f, g, spec)) <= 1e-10);
    }
    SECTION("matches the imaginary part of the fibre inner product") {
        double w = symplectic_form(g, f, spec);
        REQUIRE(std::abs(w - kImInnerOracle / kTwoPi) <= 1e-8);
        auto xg = make_fibre(g, refined(1024)), xf = make_fibre(f, refined(1024));
        REQUIRE(std::abs(xg.inner(xf).imag() - w) <= 1e-8);
    }
    SECTION("current picture helper") {
        SmoothFn1D G{{{1.0, SmoothBump{0.2, 0.6, 1.0, 0}}}};
        auto a = fibre_from_primitive(G, spec);
        auto b = make_fibre(d1(0.2, 0.6), spec);
        REQUIRE(rel_dist(a, b) == 0.0);
    }
}

TEST_CASE("u1 representation", "[fibre]") {
    QuadratureSpec spec;
    SECTION("identity") {
        auto f = make_fibre(d1(0.0, 1.0), spec);
        auto g = u1_act(f, 0.0, 0.0, spec);
        REQUIRE(rel_dist(g, f) == 0.0);
    }
    SECTION("covariance of supports") {
        auto f = make_fibre(d1(1.5, 0.5), spec);
        auto g = u1_act(f, std::log(2.0), 0.0, spec);
        auto s = g.source->support();
        REQUIRE(s->first == Approx(2.0).epsilon(1e-14));
        REQUIRE(s->second == Approx(4.0).epsilon(1e-14));
    }
    SECTION("unitarity on a refined grid") {
        auto s = refined(4096);
        auto f = make_fibre(d1(0.0, 1.0), s);
        auto g = u1_act(f, 0.3, 1.1, s);
        REQUIRE(g.norm2() == Approx(f.norm2()).epsilon(spec.rel_tol));
    }
    SECTION("interpolation error is reported and shrinks with refinement") {
        auto e = [&](int n) {
            auto s = refined(n);
            return u1_act(make_fibre(d1(0.0, 1.0), s), 0.3, 0.0, s).interpolation_error;
        };
        double e1 = e(512), e2 = e(2048);
        REQUIRE(e1 > 0.0);
        REQUIRE(e2 < 1e-2 * e1);
    }
    SECTION("leaving the window is a boundary leak") {
        auto f = gaussian_fibre(spec, 6.0, 1.0, 0.0);
        REQUIRE_THROWS_AS(u1_act(f, 5.0, 0.0, spec), BoundaryLeak);
    }
}

TEST_CASE("half-line modular flow", "[fibre]") {
    QuadratureSpec spec;
    SECTION("s = 0 is the identity") {
        auto f = make_fibre(d1(1.5, 0.5), spec);
        REQUIRE(rel_dist(modular_flow_halfline(f, 0.0, 0.0, spec), f) == 0.0);
    }
    SECTION("negative s dilates away from the origin") {
        auto f = make_fibre(d1(1.5, 0.5), spec);
        auto g = modular_flow_halfline(f, -0.1, 0.0, spec);
        auto s = g.source->support();
        REQUIRE(s->first == Approx(std::exp(0.2 * kPi)).epsilon(1e-13));
        REQUIRE(s->second == Approx(2.0 * std::exp(0.2 * kPi)).epsilon(1e-13));
    }
    SECTION("translated half-line keeps the cut fixed") {
        auto f = make_fibre(d1(1.5, 0.5), spec);
        auto g = modular_flow_halfline(f, -0.05, 0.8, spec);
        auto s = g.source->support();
        REQUIRE(s->first == Approx(0.8 + std::exp(0.1 * kPi) * 0.2).epsilon(1e-13));
    }
    SECTION("group law on a refined grid") {
        auto s = refined(4096);
        auto f = make_fibre(d1(0.0, 1.0), s);
        auto a = modular_flow_halfline(modular_flow_halfline(f, 0.03, 0.0, s), 0.05, 0.0, s);
        auto b = modular_flow_halfline(f, 0.08, 0.0, s);
        REQUIRE(rel_dist(a, b) <= 1e-6);
    }
    SECTION("Borchers relation on a refined grid") {
        auto s = refined(4096);
        auto f = make_fibre(d1(0.0, 1.0), s);
        for (double sv : {-0.1, 0.05})
            for (double tv : {-0.5, 0.7}) {
                auto lhs = modular_flow_halfline(u1_act(f, 0.0, tv, s), sv, 0.0, s);
                auto rhs = u1_act(modular_flow_halfline(f, sv, 0.0, s), 0.0, std::exp(-kTwoPi * sv) * tv, s);
                REQUIRE(rel_dist(lhs, rhs) <= 1e-6);
            }
    }
}

TEST_CASE("half-line entropy", "[fibre]") {
    QuadratureSpec spec;
    SmoothFn1D k = d1(2.0, 1.0);
    REQUIRE(halfline_entropy(SmoothFn1D{}, 0.0, spec) == 0.0);
    REQUIRE(halfline_entropy(k, 3.5, spec) == 0.0);
    REQUIRE(halfline_entropy(k, 0.0, spec) == Approx(kHalflineEntropy).epsilon(spec.rel_tol));
    REQUIRE(halfline_entropy(k, 2.5, spec) == Approx(kHalflineEntropyCut).epsilon(spec.rel_tol));
    double prev = halfline_entropy(k, -1.0, spec);
    for (double t = -0.8; t < 3.2; t += 0.2) {
        double cur = halfline_entropy(k, t, spec);
        REQUIRE(cur >= 0.0);
        REQUIRE(cur <= prev + 1e-10);
        prev = cur;
    }
}
