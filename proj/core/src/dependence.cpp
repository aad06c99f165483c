#include "fdedep/dependence.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace fdedep {
namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

FourierCoeffs fourier_family_coeffs(const FourierMode& mode, std::size_t K) {
    const Expr f = mode.f;
    return fourier_coeffs([f](double x) { return f.eval(std::span<const double>(&x, 1)); }, std::max<std::size_t>(K, 1),
                          mode.quad_points);
}

double sup_partial_sum_error(const FourierCoeffs& c, std::size_t k, const Expr& f) {
    constexpr std::size_t kCells = 1000;
    double worst = 0.0;
    for (std::size_t i = 0; i <= kCells; ++i) {
        const double x = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / kCells;
        worst = std::max(worst, std::abs(partial_sum(c, k, x) - f.eval(std::span<const double>(&x, 1))));
    }
    return worst;
}

double forward_sup_diff(const SampledFn& a, std::size_t lag_a, const SampledFn& b, std::size_t lag_b,
                        std::size_t max_steps) {
    double d = 0.0;
    for (std::size_t j = 0; j <= max_steps; ++j) {
        if (lag_a + j >= a.size() || lag_b + j >= b.size()) break;
        const auto x = a.node(lag_a + j);
        const auto y = b.node(lag_b + j);
        for (std::size_t c = 0; c < x.size(); ++c) d = std::max(d, std::abs(x[c] - y[c]));
    }
    return d;
}

struct EvalCounter {
    std::size_t evaluations = 0;
    std::size_t above = 0;
    std::size_t violations = 0;
};

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? hw : threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Random admissible start: (t / a) * amplitude * (piecewise-linear noise in [-1, 1]).
EtaFn random_start(const EtaFn& like, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    constexpr std::size_t kKnots = 6;
    const std::size_t d = like.dim();
    std::vector<double> knots(kKnots * d);
    for (double& v : knots) v = unit(rng);
    std::vector<double> flat(like.fn().values().size(), 0.0);
    const std::size_t n = like.forward_nodes() - 1;
    for (std::size_t j = 1; j <= n; ++j) {
        const double u = static_cast<double>(j) / static_cast<double>(n);
        const double pos = u * (kKnots - 1);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), kKnots - 2);
        const double w = pos - static_cast<double>(i);
        for (std::size_t c = 0; c < d; ++c) {
            const double noise = knots[i * d + c] + w * (knots[(i + 1) * d + c] - knots[i * d + c]);
            flat[(like.lag_nodes() + j) * d + c] = u * amplitude * noise;
        }
    }
    return {like.r(), SampledFn(like.fn().t0(), like.h(), d, std::move(flat))};
}

UniquenessCheck check_uniqueness(const ProblemSpec& p0, const SolveResult& r0, const SolveResult* neighbour,
                                 const SolverOptions& so, std::uint64_t seed) {
    UniquenessCheck u;
    if (r0.steps.empty()) {
        u.note = "base solve took no step";
        return u;
    }
    const StepRecord& s0 = r0.steps.front();
    const std::size_t n = grid_steps(s0.length, p0.h);
    const EtaFn zero = EtaFn::zero(p0.r, p0.h, s0.length, p0.dim());
    std::vector<std::pair<std::string, EtaFn>> starts{{"zero", zero}};

    if (neighbour != nullptr && neighbour->eta.forward_nodes() > n) {
        const auto vals = neighbour->eta.fn().values();
        std::vector<double> flat(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(
                                                                  (zero.lag_nodes() + n + 1) * p0.dim()));
        const double norm = max_abs(flat);
        if (norm >= 0.5 * s0.beta_bar)
            for (double& v : flat) v *= 0.5 * s0.beta_bar / norm;
        starts.emplace_back("neighbour member", EtaFn(p0.r, SampledFn(zero.fn().t0(), p0.h, p0.dim(), std::move(flat))));
    }
    starts.emplace_back("random", random_start(zero, 0.25 * s0.beta_bar, seed));

    std::vector<EtaFn> fixed;
    for (const auto& [name, start] : starts) {
        try {
            fixed.push_back(picard_solve(p0, s0.length, s0.beta_bar, so.tol, so.max_iter, start).eta);
            u.starts.push_back(name);
        } catch (const Error& e) {
            u.note += (u.note.empty() ? "" : "; ") + name + " start failed: " + e.what();
        }
    }
    u.performed = fixed.size() >= 2;
    for (std::size_t i = 0; i < fixed.size(); ++i)
        for (std::size_t j = i + 1; j < fixed.size(); ++j)
            u.max_disagreement = std::max(u.max_disagreement, sup_dist(fixed[i].fn(), fixed[j].fn()));
    u.agree = u.performed && u.max_disagreement <= 10.0 * so.tol;
    return u;
}

} // namespace

double CoefficientRule::operator()(std::size_t k) const {
    if (k == 0) return 0.0;
    const auto kk = static_cast<double>(k);
    switch (kind) {
    case Kind::Inverse: return 1.0 / kk;
    case Kind::InversePower: return std::pow(kk, -param);
    case Kind::Geometric: return std::pow(param, kk);
    case Kind::Null: return 0.0;
    }
    return 0.0;
}

std::string_view to_string(CoefficientRule::Kind kind) {
    switch (kind) {
    case CoefficientRule::Kind::Inverse: return "inverse";
    case CoefficientRule::Kind::InversePower: return "inverse_power";
    case CoefficientRule::Kind::Geometric: return "geometric";
    case CoefficientRule::Kind::Null: return "null";
    }
    return "";
}

CoefficientRule::Kind parse_coefficient_kind(std::string_view name) {
    if (name == "inverse") return CoefficientRule::Kind::Inverse;
    if (name == "inverse_power") return CoefficientRule::Kind::InversePower;
    if (name == "geometric") return CoefficientRule::Kind::Geometric;
    if (name == "null") return CoefficientRule::Kind::Null;
    throw InvalidArgument("unknown c_rule '" + std::string(name) +
                          "' (expected inverse, inverse_power, geometric or null)");
}

std::vector<double> family_coefficients(const FamilySpec& spec) {
    std::vector<double> c(spec.K + 1, 0.0);
    if (spec.fourier) {
        const FourierCoeffs cf = fourier_family_coeffs(*spec.fourier, spec.K);
        for (std::size_t k = 1; k <= spec.K; ++k) c[k] = sup_partial_sum_error(cf, k, spec.fourier->f);
        return c;
    }
    if (spec.c_rule.kind == CoefficientRule::Kind::Geometric && !(spec.c_rule.param > 0.0 && spec.c_rule.param < 1.0))
        throw InvalidArgument("geometric c_rule needs a ratio in (0, 1)");
    if (spec.c_rule.kind == CoefficientRule::Kind::InversePower && !(spec.c_rule.param > 0.0))
        throw InvalidArgument("inverse_power c_rule needs a positive exponent");
    for (std::size_t k = 1; k <= spec.K; ++k) c[k] = spec.c_rule(k);
    return c;
}

std::vector<ProblemSpec> build_family(const FamilySpec& spec) {
    spec.base.validate();
    const ProblemSpec& b = spec.base;
    if (!spec.phi_drift.empty() && spec.phi_drift.size() != b.dim())
        throw InvalidArgument("phi drift needs one expression per component");
    if (spec.rhs_drift && spec.rhs_drift->dim() != b.dim())
        throw InvalidArgument("rhs drift needs one expression per component");
    if (spec.rhs_drift && spec.rhs_drift->max_delay() > b.r * (1.0 + 1e-12) + 1e-15)
        throw DelayOutOfRange(spec.rhs_drift->max_delay(), b.r);

    std::optional<FourierCoeffs> cf;
    ProblemSpec base = b;
    if (spec.fourier) {
        if (b.dim() != 1) throw InvalidArgument("Fourier mode needs a scalar problem");
        cf = fourier_family_coeffs(*spec.fourier, spec.K);
        base.f = RhsSystem({autonomous_rhs(spec.fourier->f)}, b.r);
    }
    const auto c = family_coefficients(spec);

    std::vector<ProblemSpec> out{base};
    out.reserve(spec.K + 1);
    for (std::size_t k = 1; k <= spec.K; ++k) {
        try {
            const double ck = c[k];
            RhsSystem f = base.f;
            if (cf) f = RhsSystem({partial_sum_expr(*cf, k, Expr::delayed(0, 0.0))}, b.r);
            else if (spec.rhs_drift) f = base.f.plus_scaled(ck, *spec.rhs_drift);

            std::vector<double> flat(b.phi.fn().values().begin(), b.phi.fn().values().end());
            if (!spec.phi_drift.empty()) {
                const std::size_t d = b.dim();
                for (std::size_t i = 0; i < b.phi.nodes(); ++i) {
                    const double theta = -static_cast<double>(b.phi.nodes() - 1 - i) * b.h;
                    for (std::size_t comp = 0; comp < d; ++comp)
                        flat[i * d + comp] += ck * spec.phi_drift[comp].eval(std::span<const double>(&theta, 1));
                }
            }
            ProblemSpec p{b.sigma + ck * spec.sigma_drift, b.r,
                          HistorySegment(SampledFn(b.phi.fn().t0(), b.h, b.dim(), std::move(flat))), std::move(f),
                          b.horizon, b.h};
            p.validate();
            out.push_back(std::move(p));
        } catch (const Error& e) {
            throw InvalidArgument("member " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

RateFit estimate_rate(const std::vector<double>& e, const std::vector<double>& c, std::size_t tail) {
    if (e.size() != c.size()) throw InvalidArgument("error and size sequences differ in length");
    const std::size_t n = std::min(tail, e.size());
    RateFit fit;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = e.size() - n; i < e.size(); ++i) {
        if (!(e[i] > 0.0) || !(c[i] > 0.0) || !std::isfinite(e[i]) || !std::isfinite(c[i])) {
            ++fit.excluded;
            continue;
        }
        xs.push_back(std::log(c[i]));
        ys.push_back(std::log(e[i]));
    }
    fit.points = xs.size();
    if (fit.points < 3)
        throw DegenerateFit("rate fit needs at least 3 positive points, got " + std::to_string(fit.points));
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (!(sxx > 0.0)) throw DegenerateFit("rate fit needs distinct perturbation sizes");
    fit.slope = sxy / sxx;
    return fit;
}

LadderCheck ladder_convergence(const std::vector<double>& values, const std::vector<double>& eps_ladder) {
    if (eps_ladder.empty()) throw InvalidArgument("eps ladder is empty");
    if (values.empty()) return {false, "no tail values"};
    const double coarsest = *std::max_element(eps_ladder.begin(), eps_ladder.end());
    if (!(values.back() < coarsest))
        return {false, "final value " + fmt(values.back()) + " is not below the coarsest rung " + fmt(coarsest)};
    double finest_reached = coarsest;
    for (double eps : eps_ladder) {
        auto first = std::find_if(values.begin(), values.end(), [eps](double v) { return v < eps; });
        if (first == values.end()) continue;
        finest_reached = std::min(finest_reached, eps);
        for (auto it = first; it != values.end(); ++it)
            if (!(*it < eps))
                return {false, "value " + fmt(*it) + " at tail position " +
                                   std::to_string(it - values.begin()) + " climbs back above rung " + fmt(eps)};
    }
    return {true, "final value " + fmt(values.back()) + ", finest rung reached " + fmt(finest_reached)};
}

bool DependenceReport::passed() const {
    return existence && convergence_passed && solver_violations == 0 &&
           (!random_check || random_check->above_bound == 0);
}

DependenceReport run_dependence(const FamilySpec& spec, const DependenceOptions& o) {
    if (!(o.a_prime > 0.0)) throw InvalidArgument("a' must be positive");
    if (o.tail_start < 1) throw InvalidArgument("tail_start must be at least 1");
    if (o.eps_ladder.empty()) throw InvalidArgument("eps ladder is empty");
    if (!(o.delta > 0.0)) throw InvalidArgument("delta must be positive");

    std::vector<ProblemSpec> problems = build_family(spec);
    const std::vector<double> c = family_coefficients(spec);
    const std::size_t K = spec.K;
    const double h = spec.base.h;
    const auto n_a = static_cast<std::size_t>(std::ceil(o.a_prime / h - 1e-9));
    const double a_grid = static_cast<double>(n_a) * h;
    for (auto& p : problems) p.horizon = a_grid;

    DependenceReport rep{spec, o, std::vector<MemberResult>(K + 1), false, {}, {}, std::nullopt, false, std::nullopt,
                         std::nullopt, {}, {}, std::nullopt, 0, 0, std::nullopt, std::nullopt, {}, {}, {}};
    const double reach_tol = 1e-9 * std::max(1.0, a_grid);

    // The tube bound needs x^(0) before the members run.
    const SolveResult pre = solve(problems[0], o.solver);
    const bool base_reached = pre.achieved >= a_grid - reach_tol;
    if (base_reached) {
        RhsFamily fam;
        fam.reserve(K + 1);
        for (const auto& p : problems) fam.push_back(p.f);
        rep.bound = uniform_bound_on_tube(fam, pre.x, o.delta, a_grid, o.solver.density, o.solver.safety);
        if (K >= 1) {
            const std::size_t lo = std::max<std::size_t>(1, rep.bound->k0);
            rep.random_check = random_tube_check(fam, rep.bound->V, lo, K, o.random_samples, o.seed, rep.bound->M);
        }
        if (K >= o.tail_start)
            rep.rhs_convergence = check_tube_continuous_convergence(fam, rep.bound->V, o.cont_eps, o.tail_start);
        else
            rep.untestable.push_back("right-hand side convergence: no tail members");
    } else {
        rep.untestable.push_back("tube bound: base problem did not reach a' (" + pre.stall_reason + ")");
    }

    std::vector<std::optional<SolveResult>> results(K + 1);
    std::vector<EvalCounter> counters(K + 1);
    parallel_for(K + 1, o.threads, [&](std::size_t k) {
        SolverOptions so = o.solver;
        const bool checked = rep.bound && (k == 0 || k >= rep.bound->k0);
        if (checked) {
            const Tube& V = rep.bound->V;
            const double M = rep.bound->M;
            EvalCounter& cnt = counters[k];
            so.observer = [&V, M, &cnt](double t, const SegmentView& view, std::span<const double> value) {
                ++cnt.evaluations;
                if (max_abs(value) > M) {
                    ++cnt.above;
                    if (in_tube(V, t, view)) ++cnt.violations;
                }
            };
        }
        results[k] = solve(problems[k], so);
        rep.members[k].bound_checked = checked;
    });

    const SolveResult& r0 = *results[0];
    for (std::size_t k = 0; k <= K; ++k) {
        const SolveResult& r = *results[k];
        MemberResult& m = rep.members[k];
        m.k = k;
        m.c = c[k];
        m.sigma = problems[k].sigma;
        m.achieved = r.achieved;
        m.reached = r.achieved >= a_grid - reach_tol;
        m.completed = r.status == SolveStatus::Completed;
        m.stall_reason = r.stall_reason;
        m.e = forward_sup_diff(r.x.fn(), r.x.lag_nodes(), r0.x.fn(), r0.x.lag_nodes(), n_a);
        m.e_eta = forward_sup_diff(r.eta.fn(), r.eta.lag_nodes(), r0.eta.fn(), r0.eta.lag_nodes(), n_a);
        m.phi_drift = sup_dist(problems[k].phi.fn(), problems[0].phi.fn());
        m.steps = r.steps.size();
        for (const auto& s : r.steps) {
            m.picard_iterations += s.iterations;
            m.max_step_bound = std::max(m.max_step_bound, s.M);
        }
        m.global_residual = r.global_residual;
        m.evaluations = counters[k].evaluations;
        m.above_bound = counters[k].above;
        m.violations = counters[k].violations;
        if (m.bound_checked) {
            rep.solver_evaluations_checked += m.evaluations;
            rep.solver_violations += m.violations;
        }
    }

    std::vector<double> e_tail;
    std::vector<double> c_tail;
    std::vector<double> k_tail;
    std::vector<double> phi_tail;
    std::vector<double> sigma_tail;
    bool all_reached = true;
    std::string missing;
    for (std::size_t k = o.tail_start; k <= K; ++k) {
        const MemberResult& m = rep.members[k];
        e_tail.push_back(m.e);
        c_tail.push_back(m.c);
        k_tail.push_back(static_cast<double>(k));
        phi_tail.push_back(m.phi_drift);
        sigma_tail.push_back(std::abs(m.sigma - rep.members[0].sigma));
        if (!m.reached) {
            all_reached = false;
            if (missing.empty()) missing = "member " + std::to_string(k) + " stopped at " + fmt(m.achieved);
        }
    }

    if (K < o.tail_start) {
        rep.untestable.push_back("existence and convergence: no members with k >= tail_start");
        rep.existence_detail = "no tail members";
    } else {
        rep.existence = all_reached && base_reached;
        rep.existence_detail = rep.existence ? "all members k >= " + std::to_string(o.tail_start) + " reach a' = " +
                                                   fmt(a_grid)
                                             : (base_reached ? missing : "base problem did not reach a'");
        rep.error_ladder = ladder_convergence(e_tail, o.eps_ladder);
        rep.phi_convergence = ladder_convergence(phi_tail, o.eps_ladder);
        rep.sigma_convergence = ladder_convergence(sigma_tail, o.eps_ladder);

        if (rep.existence) {
            std::vector<double> limit_t(K + 1);
            for (std::size_t k = 0; k <= K; ++k) limit_t[k] = std::min(a_grid, rep.members[k].achieved);
            const double sigma0 = problems[0].sigma;
            VaryingSeq seq{
                [&results, &problems](std::size_t k, const Point& th) {
                    return results[k]->x.eval(problems[k].sigma + th[0]);
                },
                [limit_t](std::size_t k, const Point& th) {
                    return th.size() == 1 && th[0] >= -1e-12 && th[0] <= limit_t[k] + 1e-12;
                },
                [&r0, sigma0](const Point& th) { return r0.x.eval(sigma0 + th[0]); }, K};
            auto project = [limit_t](std::size_t k, Point p) {
                p[0] = std::clamp(p[0], 0.0, limit_t[k]);
                return p;
            };
            auto probes = standard_probes(1, a_grid / 8.0, project);
            probes.push_back(adversarial_probe(seq, a_grid / 4.0, 16, project));
            std::vector<Point> thetas;
            const std::size_t ns = std::max<std::size_t>(2, o.theta_samples);
            for (std::size_t i = 0; i < ns; ++i)
                thetas.push_back({i + 1 == ns ? a_grid : a_grid * static_cast<double>(i) / static_cast<double>(ns - 1)});
            rep.convergence = check_generalized_cont_convergence(seq, thetas, probes, o.cont_eps, o.tail_start);
            rep.convergence_passed = rep.error_ladder.passed && !rep.convergence->refuted();
        } else {
            rep.untestable.push_back("convergence of solutions: some tail member did not reach a'");
        }

        try {
            rep.rate = estimate_rate(e_tail, c_tail, e_tail.size());
            rep.rate_in_k = estimate_rate(e_tail, k_tail, e_tail.size());
            rep.rate_note = "rate is the slope of log e_k against log c_k; rate_in_k the slope against log k";
        } catch (const DegenerateFit& err) {
            rep.rate_note = err.what();
        }
    }

    if (o.uniqueness_check && base_reached)
        rep.uniqueness = check_uniqueness(problems[0], r0, K >= 1 ? &*results[1] : nullptr, o.solver, o.seed);
    return rep;
}

void write_family_csv(std::ostream& out, const DependenceReport& report) {
    out << "k, c_k, sigma_k, achieved, e_k\n";
    char buf[160];
    for (const auto& m : report.members) {
        std::snprintf(buf, sizeof buf, "%zu, %.17g, %.17g, %.17g, %.17g\n", m.k, m.c, m.sigma, m.achieved, m.e);
        out << buf;
    }
}

} // namespace fdedep
