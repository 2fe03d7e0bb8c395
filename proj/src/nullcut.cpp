#include "nullplane/nullcut.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullplane::nullcut {

using numerics::cplx;
using numerics::kTwoPi;
using oneparticle::Representation;

namespace {

void require_spatial(const DirectIntegralVector& v, const char* what) {
    if (v.representation != Representation::spatial) {
        std::ostringstream os;
        os << what << ": needs the spatial representation";
        throw RepresentationMismatch(os.str());
    }
}

}  // namespace

bool NullCutVector::witnesses_localized() const {
    for (std::size_t k = 0; k < vec.nodes.size(); ++k) {
        const auto& src = vec.fibres[k].source;
        if (!src) continue;
        auto s = src->support();
        if (s && s->first < cut(vec.nodes[k].point)) return false;
    }
    return true;
}

NullCutVector make_nullcut_vector(DirectIntegralVector spatial, CutProfile cut) {
    require_spatial(spatial, "make_nullcut_vector");
    NullCutVector v{std::move(spatial), std::move(cut)};
    if (!v.witnesses_localized()) throw Error("make_nullcut_vector: a fibre witness reaches below the cut");
    return v;
}

DirectIntegralVector distorted_translate(const DirectIntegralVector& v, const CutProfile& c) {
    require_spatial(v, "distorted_translate");
    DirectIntegralVector out = v;
    QuadratureSpec unused;
    numerics::parallel_for(v.nodes.size(), [&](std::size_t k) {
        out.fibres[k] = fibre::u1_act(v.fibres[k], 0.0, c(v.nodes[k].point), unused);
    });
    if (v.origin) out.origin = v.origin->translated_by(c);
    return out;
}

DirectIntegralVector distorted_dilate(const DirectIntegralVector& v, const CutProfile& c, const QuadratureSpec& spec) {
    require_spatial(v, "distorted_dilate");
    DirectIntegralVector out = v;
    numerics::parallel_for(v.nodes.size(), [&](std::size_t k) {
        out.fibres[k] = fibre::u1_act(v.fibres[k], c(v.nodes[k].point), 0.0, spec);
    });
    // A fibre-dependent dilation is not a thin test function of the stored form.
    out.origin.reset();
    return out;
}

numerics::SmoothFn1D transport_witness(const numerics::SmoothFn1D& g, double c, double s) {
    return g.translated(-c).dilated(-kTwoPi * s).translated(c);
}

NullCutVector modular_flow_nullcut(const NullCutVector& v, const CutProfile& c, double s, const QuadratureSpec& spec) {
    require_spatial(v.vec, "modular_flow_nullcut");
    NullCutVector out = v;
    if (s == 0.0) return out;
    numerics::parallel_for(v.vec.nodes.size(), [&](std::size_t k) {
        out.vec.fibres[k] = fibre::modular_flow_halfline(v.vec.fibres[k], s, c(v.vec.nodes[k].point), spec);
    });
    out.vec.origin.reset();
    return out;
}

DirectIntegralVector modular_generator_apply(const NullCutVector& v, const CutProfile& c, const QuadratureSpec& spec) {
    require_spatial(v.vec, "modular_generator_apply");
    DirectIntegralVector out = v.vec;
    out.origin.reset();
    const auto& grid = v.vec.grid;
    numerics::parallel_for(v.vec.nodes.size(), [&](std::size_t k) {
        const auto& xi = v.vec.fibres[k].values;
        auto d = numerics::spectral_diff(xi, grid.step, spec);
        const double ck = c(v.vec.nodes[k].point);
        auto& f = out.fibres[k];
        f.source.reset();
        for (int j = 0; j < grid.size; ++j)
            f.values[j] = cplx(0.0, -kTwoPi) * d[j] + kTwoPi * ck * std::exp(-grid.node(j)) * xi[j];
    });
    return out;
}

bool HsmiReport::positive() const {
    return std::all_of(margins.begin(), margins.end(), [](double m) { return m > 0.0; });
}

bool HsmiReport::non_decreasing() const {
    for (std::size_t i = 1; i < margins.size(); ++i)
        if (margins[i] < margins[i - 1]) return false;
    return true;
}

HsmiReport hsmi_support_witness(const CutProfile& c1, const CutProfile& c2, const oneparticle::ThinTestFunction& g,
                                const std::vector<double>& s_grid, const oneparticle::MassShellParams& params,
                                const QuadratureSpec& spec) {
    auto base = oneparticle::spatial_restrict(g, params, spec);
    // Transverse grid: the spatial nodes of g together with nodes over the profile bumps.
    std::vector<std::vector<double>> pts;
    for (const auto& n : base.nodes) pts.push_back(n.point);
    for (const auto* c : {&c1, &c2})
        if (auto box = c->variation_box())
            for (const auto& n : oneparticle::spatial_nodes(*box, spec)) pts.push_back(n.point);
    for (const auto& x : pts) {
        if (!(c1(x) < c2(x))) {
            std::ostringstream os;
            os.precision(17);
            os << "hsmi_support_witness: C1 = " << c1(x) << " is not below C2 = " << c2(x) << " at x_perp = " << x[0];
            throw ProfileOrderViolation(os.str());
        }
    }
    auto v = make_nullcut_vector(base, c2);

    HsmiReport r;
    for (double s : s_grid) {
        if (s < 0.0) throw Error("hsmi_support_witness: s values must be >= 0");
        double margin = 1e300;
        for (std::size_t k = 0; k < v.vec.nodes.size(); ++k) {
            const auto& src = v.vec.fibres[k].source;
            if (!src || src->empty()) continue;
            const auto& x = v.vec.nodes[k].point;
            auto moved = transport_witness(*src, c1(x), -s).support();
            if (moved) margin = std::min(margin, moved->first - c2(x));
        }
        bool in_window = true;
        try {
            modular_flow_nullcut(v, c1, -s, spec);
        } catch (const BoundaryLeak&) {
            in_window = false;
        }
        r.s_values.push_back(s);
        r.margins.push_back(margin);
        r.fibre_flow_in_window.push_back(in_window);
    }
    return r;
}

}  // namespace nullplane::nullcut
