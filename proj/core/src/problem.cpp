#include "fdedep/problem.hpp"

#include "fdedep/error.hpp"

#include <cmath>

namespace fdedep {
namespace {

bool is_grid_multiple(double span, double h) {
    const double q = span / h;
    return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

} // namespace

void ProblemSpec::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid step h must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("delay span r must be non-negative");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be positive");
    if (!std::isfinite(sigma)) throw InvalidArgument("sigma must be finite");
    if (!is_grid_multiple(r, h)) throw InvalidArgument("r must be an integer multiple of h");
    if (!is_grid_multiple(horizon, h)) throw InvalidArgument("horizon must be an integer multiple of h");
    if (phi.dim() != f.dim()) throw InvalidArgument("initial value and right-hand side differ in dimension");
    if (std::abs(phi.h() - h) > 1e-12 * h || phi.nodes() != grid_steps(r, h) + 1)
        throw GridMismatch("initial value is not sampled on [-r, 0] with step h");
    if (f.max_delay() > r * (1.0 + 1e-12) + 1e-15) throw DelayOutOfRange(f.max_delay(), r);
    for (double v : phi.fn().values())
        if (!std::isfinite(v)) throw InvalidArgument("initial value is not finite");
}

ProblemSpec make_problem(double sigma, double r, double h, double horizon,
                         const std::function<Vec(double)>& phi, RhsSystem f) {
    if (!(h > 0.0)) throw InvalidArgument("grid step h must be positive");
    const double rs = static_cast<double>(grid_steps(r, h)) * h;
    const double hs = static_cast<double>(grid_steps(horizon, h)) * h;
    ProblemSpec p{sigma, rs, HistorySegment::sample(rs, h, f.dim(), phi), std::move(f), hs, h};
    p.validate();
    return p;
}

} // namespace fdedep
