#include "nullplane/cut_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullplane::nullcut {

double TransverseBump::value(const std::vector<double>& x) const {
    if (x.size() < factors.size()) throw Error("cut profile: transverse point has too few coordinates");
    double v = coefficient;
    for (std::size_t d = 0; d < factors.size() && v != 0.0; ++d) v *= factors[d].value(x[d]);
    return v;
}

struct CutProfile::Node {
    enum class Kind { basic, min, max, sum, scale } kind = Kind::basic;
    double base = 0.0;
    std::vector<TransverseBump> bumps;
    std::shared_ptr<const Node> a, b;
    double factor = 1.0;

    double eval(const std::vector<double>& x) const {
        switch (kind) {
            case Kind::basic: {
                double v = base;
                for (const auto& bp : bumps) v += bp.value(x);
                return v;
            }
            case Kind::min: return std::min(a->eval(x), b->eval(x));
            case Kind::max: return std::max(a->eval(x), b->eval(x));
            case Kind::sum: return a->eval(x) + b->eval(x);
            case Kind::scale: return factor * a->eval(x);
        }
        return 0.0;
    }
    double far() const {
        switch (kind) {
            case Kind::basic: return base;
            case Kind::min: return std::min(a->far(), b->far());
            case Kind::max: return std::max(a->far(), b->far());
            case Kind::sum: return a->far() + b->far();
            case Kind::scale: return factor * a->far();
        }
        return 0.0;
    }
    void collect(std::vector<const TransverseBump*>& out) const {
        if (kind == Kind::basic) {
            for (const auto& bp : bumps)
                if (bp.coefficient != 0.0) out.push_back(&bp);
            return;
        }
        if (kind == Kind::scale && factor == 0.0) return;
        if (a) a->collect(out);
        if (b) b->collect(out);
    }
};

CutProfile::CutProfile() : CutProfile(0.0, {}, false) {}

CutProfile::CutProfile(std::shared_ptr<const Node> n, bool nonneg) : node_(std::move(n)), nonneg_(nonneg) {
    if (nonneg_) check_own_nodes();
}

CutProfile::CutProfile(double base, std::vector<TransverseBump> bumps, bool nonneg_flag) {
    if (!std::isfinite(base)) throw Error("cut profile: base must be finite");
    std::size_t dims = 0;
    for (const auto& bp : bumps) {
        if (!std::isfinite(bp.coefficient)) throw Error("cut profile: bump coefficient must be finite");
        if (bp.factors.empty()) throw Error("cut profile: bump needs at least one transverse factor");
        if (dims != 0 && bp.factors.size() != dims) throw Error("cut profile: bumps disagree on dimension");
        dims = bp.factors.size();
        for (const auto& f : bp.factors) f.validate();
    }
    auto n = std::make_shared<Node>();
    n->base = base;
    n->bumps = std::move(bumps);
    node_ = std::move(n);
    nonneg_ = nonneg_flag;
    if (nonneg_) check_own_nodes();
}

CutProfile CutProfile::constant(double c, bool nonneg_flag) { return CutProfile(c, {}, nonneg_flag); }

double CutProfile::operator()(const std::vector<double>& x) const { return node_->eval(x); }

double CutProfile::far_value() const { return node_->far(); }

bool CutProfile::is_constant() const {
    std::vector<const TransverseBump*> bs;
    node_->collect(bs);
    return bs.empty();
}

int CutProfile::dims() const {
    std::vector<const TransverseBump*> bs;
    node_->collect(bs);
    int d = 0;
    for (auto* b : bs) d = std::max<int>(d, static_cast<int>(b->factors.size()));
    return d;
}

std::optional<Box> CutProfile::variation_box() const {
    std::vector<const TransverseBump*> bs;
    node_->collect(bs);
    if (bs.empty()) return std::nullopt;
    Box box;
    for (auto* b : bs) {
        if (box.empty()) box.assign(b->factors.size(), {1e300, -1e300});
        if (b->factors.size() != box.size()) throw Error("cut profile: combined profiles disagree on dimension");
        for (std::size_t d = 0; d < box.size(); ++d) {
            box[d].first = std::min(box[d].first, b->factors[d].lo());
            box[d].second = std::max(box[d].second, b->factors[d].hi());
        }
    }
    return box;
}

std::vector<double> CutProfile::breakpoints(int dim) const {
    std::vector<const TransverseBump*> bs;
    node_->collect(bs);
    std::vector<double> out;
    for (auto* b : bs) {
        if (dim < static_cast<int>(b->factors.size())) {
            out.push_back(b->factors[dim].lo());
            out.push_back(b->factors[dim].hi());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void CutProfile::require_nonneg(const std::vector<std::vector<double>>& nodes, const char* what) const {
    for (const auto& x : nodes) {
        double v = (*this)(x);
        if (v < 0.0) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": profile is negative (" << v << ") at a quadrature node";
            throw ProfileOrderViolation(os.str());
        }
    }
}

void CutProfile::check_own_nodes() const {
    if (far_value() < 0.0) throw ProfileOrderViolation("cut profile flagged nonnegative has a negative base");
    auto box = variation_box();
    if (!box) return;
    std::vector<std::vector<double>> bps(box->size());
    for (std::size_t d = 0; d < box->size(); ++d) bps[d] = breakpoints(static_cast<int>(d));
    auto q = transverse_quadrature(*box, 64, bps);
    require_nonneg(q.points, "cut profile flagged nonnegative");
}

CutProfile CutProfile::min(const CutProfile& a, const CutProfile& b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::min;
    n->a = a.node_;
    n->b = b.node_;
    return CutProfile(n, a.nonneg_ && b.nonneg_);
}

CutProfile CutProfile::max(const CutProfile& a, const CutProfile& b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::max;
    n->a = a.node_;
    n->b = b.node_;
    return CutProfile(n, a.nonneg_ || b.nonneg_);
}

CutProfile CutProfile::operator+(const CutProfile& o) const {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::sum;
    n->a = node_;
    n->b = o.node_;
    return CutProfile(n, nonneg_ && o.nonneg_);
}

CutProfile CutProfile::scaled(double c) const {
    if (!std::isfinite(c)) throw Error("cut profile: scale must be finite");
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::scale;
    n->a = node_;
    n->factor = c;
    return CutProfile(n, nonneg_ && c >= 0.0);
}

CutProfile CutProfile::with_nonneg_flag() const { return CutProfile(node_, true); }

TransverseQuadrature transverse_quadrature(const Box& box, int points_per_dim,
                                           const std::vector<std::vector<double>>& breakpoints) {
    const int dims = static_cast<int>(box.size());
    const int panels_total = std::max(1, points_per_dim / 16);
    std::vector<std::vector<double>> xs(dims), ws(dims);
    for (int d = 0; d < dims; ++d) {
        const double lo = box[d].first, hi = box[d].second;
        if (!(hi > lo)) throw Error("transverse quadrature: empty box");
        std::vector<double> cuts{lo};
        if (d < static_cast<int>(breakpoints.size()))
            for (double b : breakpoints[d])
                if (b > lo && b < hi) cuts.push_back(b);
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double len = cuts[s + 1] - cuts[s];
            int panels = std::max(1, static_cast<int>(std::lround(panels_total * len / (hi - lo))));
            std::vector<double> x, w;
            numerics::composite_nodes(cuts[s], cuts[s + 1], panels, x, w);
            xs[d].insert(xs[d].end(), x.begin(), x.end());
            ws[d].insert(ws[d].end(), w.begin(), w.end());
        }
    }
    TransverseQuadrature q;
    std::vector<std::size_t> idx(dims, 0);
    if (dims == 0) return q;
    while (true) {
        std::vector<double> p(dims);
        double w = 1.0;
        for (int d = 0; d < dims; ++d) {
            p[d] = xs[d][idx[d]];
            w *= ws[d][idx[d]];
        }
        q.points.push_back(std::move(p));
        q.weights.push_back(w);
        int d = dims - 1;
        while (d >= 0 && ++idx[d] == xs[d].size()) idx[d--] = 0;
        if (d < 0) break;
    }
    return q;
}

}  // namespace nullplane::nullcut
