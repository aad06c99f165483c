#include "fdedep/rhs.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>

namespace fdedep {

RhsSystem::RhsSystem(std::vector<Expr> components, double r)
    : components_(std::move(components)), r_(r) {
    if (components_.empty()) throw InvalidArgument("right-hand side needs at least one component");
    if (!(r_ >= 0.0)) throw InvalidArgument("delay span must be non-negative");
    for (const auto& c : components_) {
        if (c.variables() != std::vector<std::string>{"t"})
            throw InvalidArgument("right-hand side components must be expressions in t");
        for (const auto& ref : c.delay_refs()) {
            if (ref.comp >= components_.size()) throw InvalidArgument("state reference beyond dimension");
            if (ref.delay > r_ * (1.0 + 1e-12) + 1e-15) throw DelayOutOfRange(ref.delay, r_);
        }
    }
}

RhsSystem RhsSystem::parse(const std::vector<std::string>& sources, double r,
                           const std::map<std::string, double>& parameters) {
    std::vector<Expr> comps;
    comps.reserve(sources.size());
    for (const auto& s : sources) comps.push_back(parse_rhs(s, sources.size(), r, parameters));
    return {std::move(comps), r};
}

RhsSystem RhsSystem::zero(std::size_t n, double r) {
    return {std::vector<Expr>(n, Expr::constant(0.0)), r};
}

double RhsSystem::max_delay() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_delay());
    return m;
}

std::vector<Expr::DelayRef> RhsSystem::delay_refs() const {
    std::vector<Expr::DelayRef> refs;
    for (const auto& c : components_)
        for (const auto& r : c.delay_refs())
            if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
    return refs;
}

void RhsSystem::eval_into(double t, const SegmentView& seg, std::span<double> out) const {
    const double tt[1] = {t};
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const double v = components_[i].eval(tt, &seg);
        if (!std::isfinite(v)) throw EvalError("right-hand side is not finite at t = " + std::to_string(t));
        out[i] = v;
    }
}

Vec RhsSystem::eval(double t, const SegmentView& seg) const {
    Vec out(dim());
    eval_into(t, seg, out);
    return out;
}

std::vector<std::string> RhsSystem::print() const {
    std::vector<std::string> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.print());
    return out;
}

RhsSystem RhsSystem::plus_scaled(double c, const RhsSystem& g) const {
    if (g.dim() != dim()) throw InvalidArgument("drift template has the wrong dimension");
    std::vector<Expr> comps;
    comps.reserve(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        comps.push_back(components_[i] + Expr::constant(c) * g.components_[i]);
    return {std::move(comps), std::max(r_, g.r_)};
}

Vec eval_rhs(const RhsSystem& f, double t, const HistorySegment& seg) {
    if (seg.dim() != f.dim()) throw InvalidArgument("segment dimension differs from the right-hand side");
    if (seg.r() + domain_tolerance(seg.r()) < f.max_delay())
        throw InvalidArgument("segment shorter than the largest delay");
    return f.eval(t, seg.view());
}

} // namespace fdedep
