#include "fdedep/solver.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>

namespace fdedep {
namespace {

// Applies T for one problem on a fixed forward grid, reusing buffers across Picard sweeps.
class StepOperator {
public:
    StepOperator(const ProblemSpec& p, std::size_t steps)
        : p_(p), lag_(p.phi.nodes() - 1), steps_(steps), dim_(p.dim()) {
        const Trajectory tilde = tilde_extend(p.phi, p.sigma, static_cast<double>(steps) * p.h);
        base_.assign(tilde.fn().values().begin(), tilde.fn().values().end());
        state_.resize(base_.size());
        integrand_.resize((steps + 1) * dim_);
    }

    EtaFn apply(const EtaFn& eta, const EvalObserver& observer) {
        if (eta.lag_nodes() != lag_ || eta.forward_nodes() != steps_ + 1 || eta.dim() != dim_ ||
            std::abs(eta.h() - p_.h) > 1e-12 * p_.h)
            throw GridMismatch("eta is not on the operator's grid");
        const auto e = eta.fn().values();
        for (std::size_t i = 0; i < state_.size(); ++i) state_[i] = base_[i] + e[i];

        const std::span<const double> state(state_);
        for (std::size_t j = 0; j <= steps_; ++j) {
            const double t = p_.sigma + static_cast<double>(j) * p_.h;
            const SegmentView view(state.subspan(j * dim_, (lag_ + 1) * dim_), dim_, p_.h, lag_ + 1);
            const std::span<double> g(integrand_.data() + j * dim_, dim_);
            p_.f.eval_into(t, view, g);
            if (observer) observer(t, view, g);
        }

        std::vector<double> out((lag_ + steps_ + 1) * dim_, 0.0);
        const double half_h = 0.5 * p_.h;
        for (std::size_t j = 1; j <= steps_; ++j) {
            const std::size_t cur = (lag_ + j) * dim_;
            const std::size_t prev = cur - dim_;
            for (std::size_t c = 0; c < dim_; ++c)
                out[cur + c] = out[prev + c] +
                               half_h * (integrand_[(j - 1) * dim_ + c] + integrand_[j * dim_ + c]);
        }
        return {p_.r, SampledFn(-p_.r, p_.h, dim_, std::move(out))};
    }

private:
    const ProblemSpec& p_;
    std::size_t lag_;
    std::size_t steps_;
    std::size_t dim_;
    std::vector<double> base_;
    std::vector<double> state_;
    std::vector<double> integrand_;
};

std::size_t floor_steps(double span, double h) {
    const double q = span / h;
    return static_cast<std::size_t>(std::floor(q + 1e-9 * std::max(1.0, q)));
}

// eta1 on [-r, a1] followed by eta1(a1) + eta0(u) for u in (0, eta0.a()].
EtaFn splice(const EtaFn& eta1, const EtaFn& eta0) {
    const std::size_t d = eta1.dim();
    std::vector<double> flat(eta1.fn().values().begin(), eta1.fn().values().end());
    const auto anchor = eta1.forward_node(eta1.forward_nodes() - 1);
    flat.reserve(flat.size() + (eta0.forward_nodes() - 1) * d);
    for (std::size_t u = 1; u < eta0.forward_nodes(); ++u) {
        const auto v = eta0.forward_node(u);
        for (std::size_t c = 0; c < d; ++c) flat.push_back(anchor[c] + v[c]);
    }
    return {eta1.r(), SampledFn(eta1.fn().t0(), eta1.h(), d, std::move(flat))};
}

// One restart at sigma + a1: estimate M on the anchored tube, choose a_bar, run Picard, splice.
EtaFn advance(const ProblemSpec& p, const EtaFn& eta, std::size_t target_steps, const SolverOptions& o,
              std::vector<StepRecord>* steps) {
    const double h = p.h;
    const std::size_t n1 = eta.forward_nodes() - 1;
    const double a1 = static_cast<double>(n1) * h;
    std::size_t cap_steps = target_steps - n1;
    if (o.max_step) cap_steps = std::min(cap_steps, std::max<std::size_t>(1, floor_steps(*o.max_step, h)));
    const double cap = static_cast<double>(cap_steps) * h;

    const HistorySegment start = compose_state(tilde_extend(p.phi, p.sigma, a1), eta, a1);
    const double sigma1 = p.sigma + a1;
    const ProblemSpec q{sigma1, p.r, start, p.f, cap, h};
    const Trajectory reference = tilde_extend(start, sigma1, cap);

    double radius = o.tube_radius;
    double shrink = 1.0;
    for (int attempt = 0;; ++attempt) {
        std::size_t bar_steps = 0;
        try {
            const double beta_bar = o.beta_fraction * radius;
            Tube tube{reference, radius, sigma1, sigma1 + cap, sigma1};
            double M = estimate_bound(p.f, tube, o.density, o.safety);
            bar_steps = grid_steps(choose_step(M, beta_bar, h, cap, o.step_margin), h);
            if (shrink < 1.0)
                bar_steps = std::max<std::size_t>(1, floor_steps(static_cast<double>(bar_steps) * shrink, 1.0));
            const double a_bar = static_cast<double>(bar_steps) * h;
            if (bar_steps < cap_steps) {
                // The bound over the shorter step is no larger and still admissible.
                tube.t_end = sigma1 + a_bar;
                M = estimate_bound(p.f, tube, o.density, o.safety);
            }
            PicardResult pr = picard_solve(q, a_bar, beta_bar, o.tol, o.max_iter, std::nullopt, o.observer);
            if (steps != nullptr)
                steps->push_back({a1, a_bar, M, beta_bar, radius, pr.iterations,
                                  std::move(pr.residual_history), std::move(pr.iterate_norms)});
            return splice(eta, pr.eta);
        } catch (const SelfMapViolation&) {
            if (attempt >= o.max_retries) throw;
            radius *= 2.0;
        } catch (const StepUnderflow&) {
            if (attempt >= o.max_retries) throw;
            radius *= 2.0;
        } catch (const NoConvergence&) {
            if (attempt >= o.max_retries || bar_steps <= 1) throw;
            shrink *= 0.5;
        }
    }
}

std::string describe(const Error& e) {
    const char* kind = "Error";
    if (dynamic_cast<const EvalError*>(&e) != nullptr) kind = "EvalError";
    else if (dynamic_cast<const StepUnderflow*>(&e) != nullptr) kind = "StepUnderflow";
    else if (dynamic_cast<const NoConvergence*>(&e) != nullptr) kind = "NoConvergence";
    else if (dynamic_cast<const SelfMapViolation*>(&e) != nullptr) kind = "SelfMapViolation";
    else if (dynamic_cast<const OutOfDomain*>(&e) != nullptr) kind = "OutOfDomain";
    return std::string(kind) + ": " + e.what();
}

} // namespace

EtaFn apply_T(const ProblemSpec& p, const EtaFn& eta, double a, const EvalObserver& observer) {
    const std::size_t steps = grid_steps(a, p.h);
    StepOperator op(p, steps);
    return op.apply(eta, observer);
}

double choose_step(double M, double beta_bar, double h, double a_max, double margin) {
    if (!(M >= 0.0)) throw InvalidArgument("bound M must be non-negative");
    if (!(beta_bar > 0.0)) throw InvalidArgument("beta_bar must be positive");
    if (!(h > 0.0)) throw InvalidArgument("grid step must be positive");
    if (a_max < h * (1.0 - 1e-9)) throw InvalidArgument("a_max must be at least h");
    const std::size_t max_steps = floor_steps(a_max, h);
    if (M == 0.0) return static_cast<double>(max_steps) * h;
    const double limit = margin * beta_bar / M;
    // The relative slack only forgives rounding in limit / h.
    const double q = limit / h;
    const auto n = static_cast<std::size_t>(std::min<double>(static_cast<double>(max_steps),
                                                             std::floor(q * (1.0 + 1e-12))));
    if (n < 1)
        throw StepUnderflow("step underflow: margin * beta_bar / M = " + std::to_string(limit) +
                            " is below h = " + std::to_string(h));
    return static_cast<double>(n) * h;
}

PicardResult picard_solve(const ProblemSpec& p, double a, double beta, double tol, int max_iter,
                          const std::optional<EtaFn>& initial, const EvalObserver& observer) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
    const std::size_t steps = grid_steps(a, p.h);
    if (steps < 1) throw InvalidArgument("Picard interval must contain at least one grid step");
    StepOperator op(p, steps);

    EtaFn cur = initial ? *initial : EtaFn::zero(p.r, p.h, static_cast<double>(steps) * p.h, p.dim());
    if (!in_A(cur, static_cast<double>(steps) * p.h, beta))
        throw InvalidArgument("initial iterate is not in A(a, beta)");

    PicardResult out{cur, {}, {cur.sup_norm()}, 0};
    for (int m = 1; m <= max_iter; ++m) {
        EtaFn next = op.apply(cur, observer);
        const double norm = next.sup_norm();
        out.iterate_norms.push_back(norm);
        if (!(norm < beta)) throw SelfMapViolation(m, norm, beta);
        const double res = sup_dist(next.fn(), cur.fn());
        out.residual_history.push_back(res);
        cur = std::move(next);
        if (res <= tol) {
            out.eta = std::move(cur);
            out.iterations = m;
            return out;
        }
    }
    throw NoConvergence(max_iter, out.residual_history.back());
}

EtaFn extend_solution(const ProblemSpec& p, const EtaFn& eta1, double a, const SolverOptions& options,
                      std::vector<StepRecord>* steps) {
    const std::size_t target = grid_steps(a, p.h);
    if (target + 1 < eta1.forward_nodes()) throw InvalidArgument("extension target lies before a1");
    if (eta1.lag_nodes() + 1 != p.phi.nodes() || eta1.dim() != p.dim())
        throw GridMismatch("eta1 does not match the problem grid");
    EtaFn eta = eta1;
    while (eta.forward_nodes() - 1 < target) eta = advance(p, eta, target, options, steps);
    return eta;
}

SolveResult solve(const ProblemSpec& p, const SolverOptions& options) {
    p.validate();
    EtaFn eta = EtaFn::zero(p.r, p.h, 0.0, p.dim());
    std::vector<StepRecord> steps;
    SolveStatus status = SolveStatus::Completed;
    std::string reason;
    const std::size_t target = p.horizon_steps();
    try {
        while (eta.forward_nodes() - 1 < target) eta = advance(p, eta, target, options, &steps);
    } catch (const Error& e) {
        status = SolveStatus::Stalled;
        reason = describe(e);
    }
    double global = 0.0;
    if (eta.forward_nodes() > 1) {
        try {
            global = residual(p, eta);
        } catch (const Error& e) {
            global = std::nan("");
            if (status == SolveStatus::Completed) {
                status = SolveStatus::Stalled;
                reason = describe(e);
            }
        }
    }
    Trajectory x = reconstruct(p.phi, p.sigma, eta);
    const double achieved = eta.a();
    return {std::move(x), std::move(eta), std::move(steps), achieved, status, std::move(reason), global};
}

double residual(const ProblemSpec& p, const EtaFn& eta) {
    StepOperator op(p, eta.forward_nodes() - 1);
    return sup_dist(op.apply(eta, {}).fn(), eta.fn());
}

} // namespace fdedep
