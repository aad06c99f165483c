#pragma once

#include "fdedep/rhs.hpp"
#include "fdedep/segments.hpp"

#include <functional>

namespace fdedep {

/// One instance of the initial value problem x'(t) = f(t, x_t), x_sigma = phi, t in [sigma, sigma + horizon].
struct ProblemSpec {
    double sigma = 0.0;
    double r = 0.0;
    HistorySegment phi;
    RhsSystem f;
    double horizon = 0.0;
    double h = 0.0;

    std::size_t dim() const noexcept { return f.dim(); }
    std::size_t horizon_steps() const { return grid_steps(horizon, h); }

    /// Throws InvalidArgument / GridMismatch / DelayOutOfRange when the invariants fail.
    void validate() const;
};

/// Builds a validated problem, snapping r and horizon to multiples of h and sampling
/// phi(theta) on [-r, 0].
ProblemSpec make_problem(double sigma, double r, double h, double horizon,
                         const std::function<Vec(double)>& phi, RhsSystem f);

} // namespace fdedep
