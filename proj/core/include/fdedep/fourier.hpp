#pragma once

#include "fdedep/expr.hpp"
#include "fdedep/lab.hpp"
#include "fdedep/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fdedep {

/// Coefficients of a 2*pi-periodic function: a_0..a_n and b_0..b_n (b_0 is always 0).
struct FourierCoeffs {
    std::vector<double> a;
    std::vector<double> b;

    std::size_t order() const noexcept { return a.empty() ? 0 : a.size() - 1; }
};

/// a_k = (1/pi) * integral of f(t) cos(kt) over one period (b_k with sin), by the
/// trapezoid rule on quad_points equispaced nodes of [0, 2*pi). Requires quad_points >= 8n.
FourierCoeffs fourier_coeffs(const std::function<double(double)>& f, std::size_t n, std::size_t quad_points);

/// S_n(x) = a_0 / 2 + sum_{k=1..n} (a_k cos kx + b_k sin kx).
double partial_sum(const FourierCoeffs& c, std::size_t n, double x);
std::function<double(double)> partial_sum_fn(const FourierCoeffs& c, std::size_t n);

/// S_n applied to `arg` as an expression tree (for use as a right-hand side).
Expr partial_sum_expr(const FourierCoeffs& c, std::size_t n, const Expr& arg);

/// Expression in x turned into the autonomous scalar right-hand side f(x[1](t)).
Expr autonomous_rhs(const Expr& f_of_x);

/// Total variation of the restriction of f to `cells` equal cells of [-pi, pi].
double total_variation(const std::function<double(double)>& f, std::size_t cells);

/// Largest difference quotient of f over `cells` equal cells of [-pi, pi].
double lipschitz_estimate(const std::function<double(double)>& f, std::size_t cells);

struct FourierOptions {
    double c0 = 1.0;
    double horizon = 1.0;
    double h = 1e-3;
    std::vector<std::size_t> orders{1, 3, 9, 27};
    std::size_t quad_points = 32768;
    /// Cells of the [-pi, pi] grid used for sup |S_n - f|, the variation and the Lipschitz estimate.
    std::size_t rhs_grid = 1000;
    std::size_t reference_refinement = 10;
    SolverOptions solver;
};

struct FourierOrderResult {
    std::size_t n = 0;
    double sup_rhs_err = 0.0;
    /// Against the solution of x' = f(x) on the same grid.
    double sup_sol_err = 0.0;
    /// Against the fine-grid reference (h / refinement).
    double sup_sol_err_reference = 0.0;
    /// horizon * exp(L * horizon) * sup_rhs_err + 4 tol.
    double gronwall_bound = 0.0;
    bool gronwall_holds = false;
    bool completed = false;
    std::string stall_reason;
};

struct FourierReport {
    FourierCoeffs coeffs;
    FourierOptions options;
    double lipschitz = 0.0;
    double variation = 0.0;
    double variation_refined = 0.0;
    bool variation_warning = false;
    bool continuous_on_samples = true;
    bool base_completed = false;
    bool reference_completed = false;
    std::string base_stall_reason;
    /// sup |x - x_ref| between the tested grid and the reference grid.
    double reference_gap = 0.0;
    std::vector<FourierOrderResult> orders;
    Verdict continuous_convergence;
    bool rhs_err_nonincreasing = true;
    bool sol_err_decreasing = true;
    bool bessel_holds = true;
    bool gronwall_all = true;
};

/// Solves x' = f(x), x(0) = c0 (the reference also on the h / refinement grid) and
/// x' = S_n(x) for every requested order, and compares. `f` is an expression in x.
FourierReport run_fourier_application(const Expr& f, const FourierOptions& options = {});

} // namespace fdedep
