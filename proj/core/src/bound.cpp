#include "fdedep/error.hpp"
#include "fdedep/rhs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fdedep {
namespace {

class ConstantOverlay final : public SegmentOverlay {
public:
    explicit ConstantOverlay(double v) : v_(v) {}
    double at(std::size_t, double) const override { return v_; }

private:
    double v_;
};

class TentOverlay final : public SegmentOverlay {
public:
    TentOverlay(double center, double half_width, double height)
        : center_(center), half_width_(half_width), height_(height) {}
    double at(std::size_t, double theta) const override {
        const double w = 1.0 - std::abs(theta - center_) / half_width_;
        return w > 0.0 ? height_ * w : 0.0;
    }

private:
    double center_;
    double half_width_;
    double height_;
};

// Piecewise-linear per component through (theta = -delay, value) points,
// constant beyond the outermost points.
class PatternOverlay final : public SegmentOverlay {
public:
    explicit PatternOverlay(std::size_t dim) : points_(dim) {}

    void add(std::size_t comp, double theta, double value) { points_[comp].emplace_back(theta, value); }
    void finish() {
        for (auto& p : points_) std::sort(p.begin(), p.end());
    }

    double at(std::size_t comp, double theta) const override {
        const auto& p = points_[comp];
        if (p.empty()) return 0.0;
        if (theta <= p.front().first) return p.front().second;
        if (theta >= p.back().first) return p.back().second;
        auto hi = std::upper_bound(p.begin(), p.end(), std::make_pair(theta, -1e300));
        auto lo = hi - 1;
        if (hi->first - lo->first <= 0.0) return hi->second;
        const double w = (theta - lo->first) / (hi->first - lo->first);
        return lo->second + w * (hi->second - lo->second);
    }

private:
    std::vector<std::vector<std::pair<double, double>>> points_;
};

constexpr std::size_t kMaxPatternRefs = 12;

std::vector<std::unique_ptr<SegmentOverlay>> perturbation_basis(const Tube& tube,
                                                                const std::vector<Expr::DelayRef>& refs,
                                                                int density) {
    const double rho = tube.radius;
    const double r = tube.reference.r();
    std::vector<std::unique_ptr<SegmentOverlay>> basis;
    basis.push_back(std::make_unique<ConstantOverlay>(rho));
    basis.push_back(std::make_unique<ConstantOverlay>(-rho));
    if (r > 0.0) {
        const double w = r / density;
        for (int j = 0; j <= density; ++j) {
            const double c = -r * j / density;
            basis.push_back(std::make_unique<TentOverlay>(c, w, rho));
            basis.push_back(std::make_unique<TentOverlay>(c, w, -rho));
        }
    }
    if (!refs.empty() && refs.size() <= kMaxPatternRefs) {
        const std::size_t patterns = std::size_t{1} << refs.size();
        for (std::size_t mask = 0; mask < patterns; ++mask) {
            auto p = std::make_unique<PatternOverlay>(tube.reference.dim());
            for (std::size_t i = 0; i < refs.size(); ++i)
                p->add(refs[i].comp, -refs[i].delay, (mask >> i) & 1U ? -rho : rho);
            p->finish();
            basis.push_back(std::move(p));
        }
    }
    return basis;
}

} // namespace

void for_each_tube_sample(const Tube& tube, const std::vector<Expr::DelayRef>& refs, int density,
                          const std::function<void(double, const SegmentView&)>& visit) {
    if (density < 1) throw InvalidArgument("sample density must be at least 1");
    if (!(tube.radius >= 0.0)) throw InvalidArgument("tube radius must be non-negative");
    const Trajectory& ref = tube.reference;
    const auto basis = perturbation_basis(tube, refs, density);
    for (std::size_t j = 0; j < ref.forward_nodes(); ++j) {
        const double tau = ref.sigma() + static_cast<double>(j) * ref.h();
        if (tau < tube.t_begin - domain_tolerance(tube.t_begin)) continue;
        if (tau > tube.t_end + domain_tolerance(tube.t_end)) break;
        const SegmentView base = ref.view_at(j);
        visit(tau, base);
        if (tube.radius == 0.0) continue;
        const double active_after = tube.anchor ? *tube.anchor - tau : -1e300;
        for (const auto& ov : basis) visit(tau, base.with_overlay(ov.get(), active_after));
    }
}

double estimate_bound(const RhsSystem& f, const Tube& tube, int density, double safety) {
    if (tube.reference.dim() != f.dim())
        throw InvalidArgument("tube dimension differs from the right-hand side");
    Vec out(f.dim());
    double m = 0.0;
    for_each_tube_sample(tube, f.delay_refs(), density, [&](double tau, const SegmentView& view) {
        f.eval_into(tau, view, out);
        m = std::max(m, max_abs(out));
    });
    return m * safety;
}

} // namespace fdedep
