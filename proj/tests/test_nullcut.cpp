#include <catch_amalgamated.hpp>

#include <cmath>

#include "nullplane/nullcut.hpp"

using namespace nullplane;
using namespace nullplane::nullcut;
using namespace nullplane::oneparticle;
using numerics::kPi;
using numerics::kTwoPi;
using numerics::SmoothBump;
using Catch::Approx;

namespace {

SmoothFn1D bump(double c, double w, int order, double a = 1.0) {
    return SmoothFn1D{{{1.0, SmoothBump{c, w, a, order}}}};
}

ThinTestFunction separable(SmoothFn1D u, SmoothFn1D v) { return ThinTestFunction{{ThinTerm{u, {v}, {}}}}; }

TransverseBump tbump(double c, double w, double coef) { return TransverseBump{coef, {SmoothBump{c, w, 1.0, 0}}}; }

// C(x) = base + coef * phi((x - c)/w)
CutProfile profile(double base, double c, double w, double coef) { return CutProfile(base, {tbump(c, w, coef)}); }

double rel_dist(const DirectIntegralVector& a, const DirectIntegralVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.fibres.size(); ++k)
        for (std::size_t j = 0; j < a.fibres[k].values.size(); ++j) {
            num += a.nodes[k].weight * std::norm(a.fibres[k].values[j] - b.fibres[k].values[j]);
            den += a.nodes[k].weight * std::norm(b.fibres[k].values[j]);
        }
    return std::sqrt(num / den);
}

// Spatial layout of g with smooth Gaussian fibres whose centre and phase vary across x_perp.
DirectIntegralVector gaussian_vector(const QuadratureSpec& spec) {
    MassShellParams params{1.0, 2};
    auto v = spatial_restrict(separable(bump(0.0, 1.0, 1), bump(0.0, 1.0, 0)), params, spec);
    v.origin.reset();
    for (std::size_t k = 0; k < v.nodes.size(); ++k) {
        double x = v.nodes[k].point[0];
        v.fibres[k] = fibre::gaussian_fibre(spec, 1.0 + 0.3 * x, 0.7, 1.5 - x, std::cos(x));
    }
    return v;
}

}  // namespace

TEST_CASE("cut profiles", "[nullcut]") {
    auto c = profile(0.5, 0.2, 0.6, 2.0);
    const double peak = 2.0 * std::exp(-1.0);
    REQUIRE(c.at(0.2) == Approx(0.5 + peak).epsilon(1e-15));
    REQUIRE(c.at(5.0) == 0.5);
    REQUIRE(c.far_value() == 0.5);
    REQUIRE_FALSE(c.is_constant());
    REQUIRE(CutProfile::constant(3.0).is_constant());
    auto box = c.variation_box();
    REQUIRE(box);
    REQUIRE((*box)[0].first == Approx(-0.4));
    REQUIRE((*box)[0].second == Approx(0.8));

    auto d = profile(0.0, -0.3, 0.5, 3.0);
    for (double x : {-0.5, -0.3, 0.0, 0.3, 0.7}) {
        REQUIRE(CutProfile::min(c, d).at(x) == std::min(c.at(x), d.at(x)));
        REQUIRE(CutProfile::max(c, d).at(x) == std::max(c.at(x), d.at(x)));
        REQUIRE((c + d).at(x) == Approx(c.at(x) + d.at(x)).epsilon(1e-15));
        REQUIRE(c.scaled(-2.0).at(x) == Approx(-2.0 * c.at(x)).epsilon(1e-15));
    }
    auto bp = CutProfile::min(c, d).breakpoints(0);
    const std::vector<double> edges{-0.8, -0.4, 0.2, 0.8};
    REQUIRE(bp.size() == edges.size());
    for (std::size_t i = 0; i < bp.size(); ++i) REQUIRE(bp[i] == Approx(edges[i]).epsilon(1e-15));

    SECTION("nonnegativity flag") {
        auto pos = c.with_nonneg_flag();
        REQUIRE(pos.nonneg_flag());
        REQUIRE(CutProfile::min(pos, d.with_nonneg_flag()).nonneg_flag());
        REQUIRE_FALSE(CutProfile::min(pos, d).nonneg_flag());
        REQUIRE(CutProfile::max(pos, d).nonneg_flag());
        REQUIRE_FALSE(pos.scaled(-1.0).nonneg_flag());
        REQUIRE_THROWS_AS(profile(0.0, 0.0, 1.0, -1.0).with_nonneg_flag(), ProfileOrderViolation);
        REQUIRE_THROWS_AS(CutProfile::constant(-0.1, true), ProfileOrderViolation);
        REQUIRE_THROWS_AS(profile(-0.2, 0.0, 1.0, 1.0).require_nonneg({{0.9}}, "test"), ProfileOrderViolation);
    }
    SECTION("transverse quadrature") {
        auto q = transverse_quadrature({{-1.0, 2.0}, {0.0, 1.0}}, 32, {{0.0, 1.5}, {}});
        double vol = 0.0, mom = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
            vol += q.weights[i];
            mom += q.weights[i] * std::pow(q.points[i][0], 5) * q.points[i][1];
        }
        REQUIRE(vol == Approx(3.0).epsilon(1e-14));
        // int_{-1}^{2} x^5 dx * int_0^1 y dy = (64 - 1)/6 * 1/2
        REQUIRE(mom == Approx(63.0 / 12.0).epsilon(1e-13));
    }
}

TEST_CASE("distorted translations", "[nullcut]") {
    QuadratureSpec spec;
    MassShellParams params{1.0, 2};
    auto g = separable(bump(0.5, 0.6, 1), bump(0.1, 0.8, 0));
    auto v = spatial_restrict(g, params, spec);

    SECTION("constant profile is a translation") {
        auto a = distorted_translate(v, CutProfile::constant(0.7));
        auto b = boost_translate(v, 0.0, 0.7, spec);
        REQUIRE(rel_dist(a, b) == 0.0);
    }
    SECTION("requires the spatial representation") {
        auto m = fourier_restrict(g, params, spec);
        REQUIRE_THROWS_AS(distorted_translate(m, CutProfile::constant(0.1)), RepresentationMismatch);
        REQUIRE_THROWS_AS(distorted_dilate(m, CutProfile::constant(0.1), spec), RepresentationMismatch);
    }
    SECTION("non-constant profile") {
        auto c = profile(0.2, 0.0, 0.7, 1.5);
        auto a = distorted_translate(v, c);
        REQUIRE(a.norm() == Approx(v.norm()).epsilon(1e-12));
        for (std::size_t k = 0; k < v.nodes.size(); ++k) {
            double ck = c(v.nodes[k].point);
            auto want = fibre::u1_act(v.fibres[k], 0.0, ck, spec);
            REQUIRE(a.fibres[k].values == want.values);
            if (v.fibres[k].source) {
                auto s0 = v.fibres[k].source->support();
                auto s1 = a.fibres[k].source->support();
                REQUIRE(s1->first == Approx(s0->first + ck).epsilon(1e-15));
            }
        }
        // The phase route against restricting the translated test function directly.
        auto direct = spatial_restrict(g.translated_by(c), params, spec);
        REQUIRE(rel_dist(a, direct) < 1e-8);
        // Steep cuts push fibre weight out to |p_perp| ~ p_- |grad C|, hence the wider momentum grid.
        QuadratureSpec wide = spec;
        wide.momentum_cutoff = 800.0;
        auto via_momentum = to_spatial(fourier_restrict(g.translated_by(c), params, wide), wide);
        double err = rel_dist(a, via_momentum);
        INFO("momentum route deviation " << err);
        REQUIRE(err < 1e-6);
    }
    SECTION("fibre locality") {
        auto one = v;
        for (std::size_t k = 0; k < one.fibres.size(); ++k)
            if (k != 20) one.fibres[k] = fibre::zero_fibre(spec);
        auto c = profile(0.0, 0.1, 0.9, 2.0);
        for (const auto& out : {distorted_translate(one, c), distorted_dilate(one, c, spec)})
            for (std::size_t k = 0; k < out.fibres.size(); ++k)
                if (k != 20)
                    for (const auto& z : out.fibres[k].values) REQUIRE(z == numerics::cplx(0.0));
    }
    SECTION("dilations") {
        QuadratureSpec fine = spec;
        fine.theta_points = 4096;
        v = spatial_restrict(g, params, fine);
        auto a = distorted_dilate(v, CutProfile::constant(0.4), fine);
        auto b = boost_translate(v, 0.4, 0.0, fine);
        REQUIRE(rel_dist(a, b) == 0.0);
        auto c = profile(0.0, 0.0, 1.0, 1.2);
        auto d = distorted_dilate(v, c, fine);
        REQUIRE_FALSE(d.origin);
        REQUIRE(d.norm() == Approx(v.norm()).epsilon(1e-8));
        for (std::size_t k = 0; k < v.nodes.size(); ++k) {
            if (!v.fibres[k].source) continue;
            double ck = c(v.nodes[k].point);
            auto s0 = v.fibres[k].source->support();
            auto s1 = d.fibres[k].source->support();
            REQUIRE(s1->first == Approx(std::exp(ck) * s0->first).epsilon(1e-14));
            REQUIRE(s1->second == Approx(std::exp(ck) * s0->second).epsilon(1e-14));
        }
    }
}

TEST_CASE("cut modular flow", "[nullcut]") {
    QuadratureSpec spec;
    auto c = profile(0.3, 0.0, 0.8, -1.0);
    auto v = make_nullcut_vector(gaussian_vector(spec), c);

    SECTION("flat cut matches the half-line flow") {
        auto out = modular_flow_nullcut(v, CutProfile::constant(0.0), 0.07, spec);
        for (std::size_t k = 0; k < v.vec.nodes.size(); ++k)
            REQUIRE(out.vec.fibres[k].values == fibre::modular_flow_halfline(v.vec.fibres[k], 0.07, 0.0, spec).values);
    }
    SECTION("conjugation by the distorted translation") {
        auto direct = modular_flow_nullcut(v, c, 0.05, spec);
        auto back = make_nullcut_vector(distorted_translate(v.vec, c.scaled(-1.0)), CutProfile{});
        auto conj = distorted_translate(modular_flow_nullcut(back, CutProfile{}, 0.05, spec).vec, c);
        REQUIRE(rel_dist(direct.vec, conj) < 1e-12);
    }
    SECTION("unitary group") {
        auto a = modular_flow_nullcut(v, c, 0.03, spec);
        REQUIRE(a.vec.norm() == Approx(v.vec.norm()).epsilon(1e-8));
        auto ab = modular_flow_nullcut(a, c, 0.05, spec);
        auto direct = modular_flow_nullcut(v, c, 0.08, spec);
        REQUIRE(rel_dist(ab.vec, direct.vec) < 1e-6);
        auto inv = modular_flow_nullcut(a, c, -0.03, spec);
        REQUIRE(rel_dist(inv.vec, v.vec) < 1e-6);
    }
    SECTION("generator") {
        const double eps = 1e-4;
        auto gen = modular_generator_apply(v, c, spec);
        auto plus = modular_flow_nullcut(v, c, eps, spec);
        auto minus = modular_flow_nullcut(v, c, -eps, spec);
        auto fd = v.vec;
        for (std::size_t k = 0; k < fd.fibres.size(); ++k)
            for (std::size_t j = 0; j < fd.fibres[k].values.size(); ++j)
                fd.fibres[k].values[j] = (plus.vec.fibres[k].values[j] - minus.vec.fibres[k].values[j]) /
                                         numerics::cplx(0.0, 2.0 * eps);
        double err = rel_dist(fd, gen);
        INFO("generator deviation " << err);
        REQUIRE(err < 1e-3);

        // A constant shift s adds 2 pi s e^{-theta'} to log Delta.
        const double s = 0.4;
        auto flat = make_nullcut_vector(v.vec, CutProfile{});
        auto g0 = modular_generator_apply(flat, CutProfile{}, spec);
        auto gs = modular_generator_apply(flat, CutProfile::constant(s), spec);
        for (std::size_t k = 0; k < g0.fibres.size(); ++k)
            for (int j = 0; j < v.vec.grid.size; ++j) {
                auto want = g0.fibres[k].values[j] +
                            kTwoPi * s * std::exp(-v.vec.grid.node(j)) * v.vec.fibres[k].values[j];
                REQUIRE(std::abs(gs.fibres[k].values[j] - want) <= 1e-12 * (1.0 + std::abs(want)));
            }
    }
    SECTION("witness transport") {
        MassShellParams params{1.0, 2};
        auto g = separable(bump(2.0, 0.5, 1), bump(0.0, 1.0, 0));
        auto w = make_nullcut_vector(spatial_restrict(g, params, spec), c);
        REQUIRE(w.witnesses_localized());
        auto out = modular_flow_nullcut(w, c, -0.1, spec);
        for (std::size_t k = 0; k < w.vec.nodes.size(); ++k) {
            if (!w.vec.fibres[k].source) continue;
            double ck = c(w.vec.nodes[k].point);
            auto s1 = out.vec.fibres[k].source->support();
            REQUIRE(s1->first == Approx(ck + std::exp(0.2 * kPi) * (1.5 - ck)).epsilon(1e-14));
        }
        REQUIRE(out.witnesses_localized());
        REQUIRE_THROWS_AS(make_nullcut_vector(w.vec, CutProfile::constant(1.8)), Error);
    }
}

TEST_CASE("half-sided modular inclusion witness", "[nullcut]") {
    QuadratureSpec spec;
    MassShellParams params{1.0, 2};
    auto g = separable(bump(3.0, 1.0, 1), bump(0.0, 1.0, 0));
    auto c1 = profile(0.2, 0.3, 0.8, -1.0);
    auto c2 = profile(1.0, -0.2, 0.9, 1.5);
    std::vector<double> s_grid{0.0, 0.1, 0.25, 0.5, 0.75, 1.0};
    auto r = hsmi_support_witness(c1, c2, g, s_grid, params, spec);
    REQUIRE(r.margins.size() == s_grid.size());
    REQUIRE(r.positive());
    REQUIRE(r.non_decreasing());
    REQUIRE(r.margins.back() > 100.0);
    REQUIRE(r.fibre_flow_in_window.front());
    // At s = 0 the margin is the distance from the witness edge to C2.
    double m0 = 1e300;
    for (const auto& n : spatial_nodes({{-1.0, 1.0}}, spec)) m0 = std::min(m0, 2.0 - c2(n.point));
    REQUIRE(r.margins[0] == Approx(m0).epsilon(1e-14));

    REQUIRE_THROWS_AS(hsmi_support_witness(c2, c1, g, s_grid, params, spec), ProfileOrderViolation);
    REQUIRE_THROWS_AS(hsmi_support_witness(c1, CutProfile::constant(0.1), g, s_grid, params, spec),
                      ProfileOrderViolation);
    REQUIRE_THROWS_AS(hsmi_support_witness(c1, c2, g, {-0.5}, params, spec), Error);
}
