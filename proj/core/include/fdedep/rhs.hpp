#pragma once

#include "fdedep/expr.hpp"
#include "fdedep/segments.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fdedep {

/// Right-hand side f(t, x_t) of an N-dimensional retarded equation with
/// finitely many discrete delays: one expression per output component.
class RhsSystem {
public:
    RhsSystem(std::vector<Expr> components, double r);

    static RhsSystem parse(const std::vector<std::string>& sources, double r,
                           const std::map<std::string, double>& parameters = {});
    static RhsSystem zero(std::size_t n, double r);

    std::size_t dim() const noexcept { return components_.size(); }
    double r() const noexcept { return r_; }
    const Expr& component(std::size_t i) const { return components_.at(i); }
    const std::vector<Expr>& components() const noexcept { return components_; }

    double max_delay() const;
    /// Distinct (component, delay) references across all output components.
    std::vector<Expr::DelayRef> delay_refs() const;

    /// Writes f(t, seg) into `out` (size N). Throws EvalError on a non-finite value.
    void eval_into(double t, const SegmentView& seg, std::span<double> out) const;
    Vec eval(double t, const SegmentView& seg) const;

    std::vector<std::string> print() const;

    /// Componentwise f + c * g.
    RhsSystem plus_scaled(double c, const RhsSystem& g) const;

    bool operator==(const RhsSystem&) const = default;

private:
    std::vector<Expr> components_;
    double r_;
};

/// f(t, x_t) evaluated on an owned segment. Throws InvalidArgument if seg.r() < max delay.
Vec eval_rhs(const RhsSystem& f, double t, const HistorySegment& seg);

/// Neighbourhood of the graph {(t, x_t) : t in [t_begin, t_end]} of a reference trajectory.
///
/// With an anchor, perturbations vanish wherever t + theta <= anchor: the tube then
/// describes the states phi~_{sigma+s} + eta_s with eta in A(a, radius).
struct Tube {
    Trajectory reference;
    double radius;
    double t_begin;
    double t_end;
    std::optional<double> anchor;
};

/// Calls visit(tau, state) for every deterministic sample of the tube: tau on the
/// reference grid, state = reference segment plus one member of the perturbation
/// basis (zero, constants +-radius, tents of half-width r/density, and sign patterns
/// over the referenced delays when there are at most 12 of them).
void for_each_tube_sample(const Tube& tube, const std::vector<Expr::DelayRef>& refs, int density,
                          const std::function<void(double, const SegmentView&)>& visit);

/// Sampled sup of |f| over the tube, inflated by `safety`.
double estimate_bound(const RhsSystem& f, const Tube& tube, int density, double safety = 1.25);

} // namespace fdedep
