#pragma once

#include "fdedep/problem.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdedep {

/// Called for every right-hand side evaluation the solver performs:
/// (t, state x_t, value f(t, x_t)).
using EvalObserver = std::function<void(double, const SegmentView&, std::span<const double>)>;

struct SolverOptions {
    double tol = 1e-10;
    double tube_radius = 1.0;
    /// beta_bar = beta_fraction * tube_radius.
    double beta_fraction = 0.5;
    /// Steps satisfy M * a_bar <= step_margin * beta_bar.
    double step_margin = 0.5;
    int max_iter = 200;
    int density = 4;
    double safety = 1.25;
    int max_retries = 3;
    std::optional<double> max_step;
    EvalObserver observer;
};

struct StepRecord {
    double start = 0.0; ///< offset from sigma
    double length = 0.0;
    double M = 0.0;
    double beta_bar = 0.0;
    double radius = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;
    /// ||eta_m|| for every Picard iterate, the starting iterate included.
    std::vector<double> iterate_norms;

    double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

enum class SolveStatus { Completed, Stalled };

struct SolveResult {
    Trajectory x;
    EtaFn eta;
    std::vector<StepRecord> steps;
    double achieved = 0.0;
    SolveStatus status = SolveStatus::Completed;
    std::string stall_reason;
    /// sup |T eta - eta| under the single operator of the original problem.
    double global_residual = 0.0;
};

/// (T eta)(t) = integral over [0, t] of f(sigma + s, phi~_{sigma+s} + eta_s) ds, by the
/// cumulative trapezoid rule on the grid. `a` must equal eta.a() up to grid rounding.
EtaFn apply_T(const ProblemSpec& p, const EtaFn& eta, double a, const EvalObserver& observer = {});

/// Largest multiple of h not above a_max with M * a_bar <= margin * beta_bar.
/// Returns a_max when M == 0; throws StepUnderflow when even h is too long.
double choose_step(double M, double beta_bar, double h, double a_max, double margin = 0.5);

struct PicardResult {
    EtaFn eta;
    std::vector<double> residual_history;
    std::vector<double> iterate_norms;
    int iterations = 0;
};

/// Picard iteration eta_{m+1} = T eta_m on [0, a] from `initial` (zero by default),
/// stopping once sup_dist(eta_{m+1}, eta_m) <= tol.
/// Throws SelfMapViolation if an iterate leaves A(a, beta), NoConvergence after max_iter.
PicardResult picard_solve(const ProblemSpec& p, double a, double beta, double tol, int max_iter,
                          const std::optional<EtaFn>& initial = std::nullopt,
                          const EvalObserver& observer = {});

/// Extends a fixed point eta1 on [0, a1] to a fixed point on [0, a] by repeated restarts
/// at sigma + a1 with initial value (phi~ + eta1)_{sigma+a1}, splicing each restart solution.
/// Step records are appended to `steps` when given. Propagates solver errors.
EtaFn extend_solution(const ProblemSpec& p, const EtaFn& eta1, double a, const SolverOptions& options = {},
                      std::vector<StepRecord>* steps = nullptr);

/// Solves p up to its horizon. Never throws on numerical failure: returns Stalled instead.
SolveResult solve(const ProblemSpec& p, const SolverOptions& options = {});

/// sup_dist(T eta, eta).
double residual(const ProblemSpec& p, const EtaFn& eta);

} // namespace fdedep
