#pragma once

#include "fdedep/fourier.hpp"
#include "fdedep/lab.hpp"
#include "fdedep/problem.hpp"
#include "fdedep/solver.hpp"
#include "fdedep/tube_lab.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fdedep {

/// Perturbation size c_k for k >= 1 (c_0 = 0).
struct CoefficientRule {
    enum class Kind { Inverse, InversePower, Geometric, Null };
    Kind kind = Kind::Inverse;
    /// Exponent p for InversePower (k^-p), ratio q for Geometric (q^k).
    double param = 1.0;

    double operator()(std::size_t k) const;
};

std::string_view to_string(CoefficientRule::Kind kind);
CoefficientRule::Kind parse_coefficient_kind(std::string_view name);

/// Members are the partial sums S_k of a periodic f (expression in x); the base right-hand
/// side is replaced by f(x[1](t)). c_k is reported as the sampled sup |S_k - f|.
struct FourierMode {
    Expr f;
    std::size_t quad_points = 32768;
};

/// Family (P_k): f_k = f_0 + c_k g, phi_k = phi_0 + c_k psi, sigma_k = sigma_0 + c_k s.
struct FamilySpec {
    ProblemSpec base;
    std::size_t K = 0;
    CoefficientRule c_rule;
    std::optional<RhsSystem> rhs_drift;
    /// psi, one expression in theta per component; empty means no initial-value drift.
    std::vector<Expr> phi_drift;
    double sigma_drift = 0.0;
    std::optional<FourierMode> fourier;
};

/// Perturbation sizes c_0 = 0, c_1, ..., c_K.
std::vector<double> family_coefficients(const FamilySpec& spec);

/// K + 1 problems; member 0 is the base. Errors name the offending member.
std::vector<ProblemSpec> build_family(const FamilySpec& spec);

struct DependenceOptions {
    double a_prime = 1.0;
    std::size_t tail_start = 8;
    std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3};
    /// Radius of the bound neighbourhood is delta / 2.
    double delta = 0.5;
    double cont_eps = 0.1;
    std::size_t theta_samples = 17;
    std::size_t random_samples = 10000;
    std::uint64_t seed = 0;
    bool uniqueness_check = true;
    /// Worker threads for the member solves; 0 picks the hardware concurrency.
    unsigned threads = 0;
    SolverOptions solver;
};

struct MemberResult {
    std::size_t k = 0;
    double c = 0.0;
    double sigma = 0.0;
    double achieved = 0.0;
    bool reached = false;
    bool completed = false;
    std::string stall_reason;
    /// sup over s in [0, a'] of |x^(k)(sigma_k + s) - x^(0)(sigma_0 + s)| (over the achieved part).
    double e = 0.0;
    /// The same comparison for eta^(k) and eta^(0).
    double e_eta = 0.0;
    double phi_drift = 0.0;
    std::size_t steps = 0;
    int picard_iterations = 0;
    double global_residual = 0.0;
    double max_step_bound = 0.0;
    /// Solver evaluations seen, those above the tube bound, and those of them inside V.
    std::size_t evaluations = 0;
    std::size_t above_bound = 0;
    std::size_t violations = 0;
    bool bound_checked = false;
};

struct RateFit {
    double slope = 0.0;
    std::size_t points = 0;
    std::size_t excluded = 0;
};

/// Least-squares slope of log e against log c over the last `tail` entries; non-positive
/// entries are excluded and counted. Throws DegenerateFit with fewer than 3 usable points.
RateFit estimate_rate(const std::vector<double>& e, const std::vector<double>& c, std::size_t tail);

struct LadderCheck {
    bool passed = true;
    std::string detail;
};

/// values is a tail in index order: the last value must be below the coarsest rung, and once a
/// value drops below a rung no later value may climb back above it.
LadderCheck ladder_convergence(const std::vector<double>& values, const std::vector<double>& eps_ladder);

struct UniquenessCheck {
    bool performed = false;
    bool agree = false;
    double max_disagreement = 0.0;
    std::vector<std::string> starts;
    std::string note;
};

struct DependenceReport {
    FamilySpec spec;
    DependenceOptions options;
    std::vector<MemberResult> members;

    bool existence = false;
    std::string existence_detail;
    LadderCheck error_ladder;
    std::optional<Verdict> convergence;
    bool convergence_passed = false;

    std::optional<TubeBound> bound;
    std::optional<Verdict> rhs_convergence;
    LadderCheck phi_convergence;
    LadderCheck sigma_convergence;
    std::optional<RandomTubeCheck> random_check;
    std::size_t solver_evaluations_checked = 0;
    std::size_t solver_violations = 0;

    std::optional<RateFit> rate;
    std::optional<RateFit> rate_in_k;
    std::string rate_note;
    UniquenessCheck uniqueness;
    std::vector<std::string> untestable;

    /// Both conclusions hold and no solver evaluation inside V exceeded the bound.
    bool passed() const;
};

/// Solves every member with the same settings up to a' and checks existence on the common
/// interval, convergence of the solutions, and the tube bound against the solver's evaluations.
/// Uniqueness of the base solution is the caller's obligation; it is only spot-checked.
DependenceReport run_dependence(const FamilySpec& spec, const DependenceOptions& options);

/// `k, c_k, sigma_k, achieved, e_k` table.
void write_family_csv(std::ostream& out, const DependenceReport& report);

} // namespace fdedep
