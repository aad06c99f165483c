#include "fdedep/fourier.hpp"

#include "fdedep/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fdedep {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> period_grid(std::size_t cells) {
    std::vector<double> xs(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        xs[i] = i == cells ? kPi : -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(cells);
    return xs;
}

double node_sup_diff(const Trajectory& x, const Trajectory& y, std::size_t stride) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.forward_nodes(); ++j) {
        const std::size_t jy = j * stride;
        if (jy >= y.forward_nodes()) break;
        const auto a = x.forward_node(j);
        const auto b = y.forward_node(jy);
        for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b[c]));
    }
    return d;
}

ProblemSpec scalar_problem(const Expr& rhs, double c0, double h, double horizon) {
    return make_problem(0.0, 0.0, h, horizon, [c0](double) { return Vec{c0}; }, RhsSystem({rhs}, 0.0));
}

} // namespace

FourierCoeffs fourier_coeffs(const std::function<double(double)>& f, std::size_t n, std::size_t quad_points) {
    if (quad_points < 8 * std::max<std::size_t>(n, 1))
        throw InvalidArgument("quad_points must be at least 8 * n");
    const auto q = static_cast<double>(quad_points);
    std::vector<double> values(quad_points);
    std::vector<double> nodes(quad_points);
    for (std::size_t j = 0; j < quad_points; ++j) {
        nodes[j] = 2.0 * kPi * static_cast<double>(j) / q;
        values[j] = f(nodes[j]);
        if (!std::isfinite(values[j])) throw EvalError("periodic function is not finite at a quadrature node");
    }
    FourierCoeffs c{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0)};
    for (std::size_t k = 0; k <= n; ++k) {
        double sa = 0.0;
        double sb = 0.0;
        const auto kk = static_cast<double>(k);
        for (std::size_t j = 0; j < quad_points; ++j) {
            sa += values[j] * std::cos(kk * nodes[j]);
            sb += values[j] * std::sin(kk * nodes[j]);
        }
        c.a[k] = 2.0 * sa / q;
        c.b[k] = k == 0 ? 0.0 : 2.0 * sb / q;
    }
    return c;
}

double partial_sum(const FourierCoeffs& c, std::size_t n, double x) {
    if (n > c.order()) throw InvalidArgument("partial sum order exceeds the coefficient order");
    double s = 0.5 * c.a[0];
    for (std::size_t k = 1; k <= n; ++k) {
        const double kx = static_cast<double>(k) * x;
        s += c.a[k] * std::cos(kx) + c.b[k] * std::sin(kx);
    }
    return s;
}

std::function<double(double)> partial_sum_fn(const FourierCoeffs& c, std::size_t n) {
    if (n > c.order()) throw InvalidArgument("partial sum order exceeds the coefficient order");
    return [c, n](double x) { return partial_sum(c, n, x); };
}

Expr partial_sum_expr(const FourierCoeffs& c, std::size_t n, const Expr& arg) {
    if (n > c.order()) throw InvalidArgument("partial sum order exceeds the coefficient order");
    const auto& vars = arg.variables();
    Expr s = Expr::constant(0.5 * c.a[0], vars);
    for (std::size_t k = 1; k <= n; ++k) {
        const Expr kx = Expr::constant(static_cast<double>(k), vars) * arg;
        s = s + Expr::constant(c.a[k], vars) * Expr::call(Func::Cos, kx) +
            Expr::constant(c.b[k], vars) * Expr::call(Func::Sin, kx);
    }
    return s;
}

Expr autonomous_rhs(const Expr& f_of_x) {
    if (f_of_x.variables().size() != 1) throw InvalidArgument("expected an expression in one variable");
    if (f_of_x.uses_state()) throw InvalidArgument("periodic function must not reference the state");
    return f_of_x.with_variables({"t"}).substitute(0, Expr::delayed(0, 0.0));
}

double total_variation(const std::function<double(double)>& f, std::size_t cells) {
    const auto xs = period_grid(cells);
    double tv = 0.0;
    double prev = f(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        tv += std::abs(v - prev);
        prev = v;
    }
    return tv;
}

double lipschitz_estimate(const std::function<double(double)>& f, std::size_t cells) {
    const auto xs = period_grid(cells);
    double L = 0.0;
    double prev = f(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        L = std::max(L, std::abs(v - prev) / (xs[i] - xs[i - 1]));
        prev = v;
    }
    return L;
}

FourierReport run_fourier_application(const Expr& f, const FourierOptions& o) {
    if (o.orders.empty()) throw InvalidArgument("no orders requested");
    if (!(o.horizon > 0.0) || !(o.h > 0.0)) throw InvalidArgument("horizon and h must be positive");
    if (o.reference_refinement < 1) throw InvalidArgument("reference refinement must be at least 1");
    if (o.rhs_grid < 2) throw InvalidArgument("rhs grid needs at least two cells");
    const Expr rhs_f = autonomous_rhs(f);
    const auto fn = [f](double x) { return f.eval(std::span<const double>(&x, 1)); };
    const std::size_t top = *std::max_element(o.orders.begin(), o.orders.end());

    FourierReport rep;
    rep.options = o;
    rep.coeffs = fourier_coeffs(fn, top, o.quad_points);
    rep.lipschitz = lipschitz_estimate(fn, o.rhs_grid);
    rep.variation = total_variation(fn, o.rhs_grid);
    rep.variation_refined = total_variation(fn, 2 * o.rhs_grid);
    rep.variation_warning = rep.variation_refined > 1.05 * rep.variation + 1e-9;

    const FourierCoeffs& cf = rep.coeffs;
    const Box period{{-kPi}, {kPi}};
    const LabConfig lab;
    // The verdict needs a long tail of the sequence, not just the tested orders.
    const std::size_t lab_top = std::max({top, std::min(lab.k_max, o.quad_points / 8), std::size_t{2}});
    const FourierCoeffs lab_cf = lab_top == top ? cf : fourier_coeffs(fn, lab_top, o.quad_points);
    const FnSeq sums([lab_cf](std::size_t k, std::span<const double> x) { return partial_sum(lab_cf, k, x[0]); },
                     [fn](std::span<const double> x) { return fn(x[0]); }, period, lab_top);
    const auto samples = grid_points(period, lab.sample_points);
    rep.continuous_on_samples = !limit_discontinuity(sums, samples, lab.eps_ladder, lab.delta_ladder).has_value();
    rep.continuous_convergence =
        check_continuous_convergence(sums, samples, lab.probes_per_point, lab.cont_eps, sums.k_max() / 2);

    // Bessel's inequality at quadrature resolution, for every truncation.
    {
        const std::size_t q = o.quad_points;
        double energy = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            const double v = fn(2.0 * kPi * static_cast<double>(j) / static_cast<double>(q));
            energy += v * v;
        }
        energy *= 2.0 * kPi / static_cast<double>(q);
        double partial = 0.5 * cf.a[0] * cf.a[0];
        rep.bessel_holds = energy >= kPi * partial - 1e-6;
        for (std::size_t k = 1; k <= top; ++k) {
            partial += cf.a[k] * cf.a[k] + cf.b[k] * cf.b[k];
            rep.bessel_holds = rep.bessel_holds && energy >= kPi * partial - 1e-6;
        }
    }

    const SolveResult base = solve(scalar_problem(rhs_f, o.c0, o.h, o.horizon), o.solver);
    const double h_ref = o.h / static_cast<double>(o.reference_refinement);
    const SolveResult ref = solve(scalar_problem(rhs_f, o.c0, h_ref, o.horizon), o.solver);
    rep.base_completed = base.status == SolveStatus::Completed;
    rep.reference_completed = ref.status == SolveStatus::Completed;
    rep.base_stall_reason = base.status == SolveStatus::Completed ? ref.stall_reason : base.stall_reason;
    rep.reference_gap = node_sup_diff(base.x, ref.x, o.reference_refinement);

    const auto xs = period_grid(o.rhs_grid);
    for (std::size_t n : o.orders) {
        FourierOrderResult row;
        row.n = n;
        for (double x : xs) row.sup_rhs_err = std::max(row.sup_rhs_err, std::abs(partial_sum(cf, n, x) - fn(x)));
        const SolveResult xn =
            solve(scalar_problem(partial_sum_expr(cf, n, Expr::delayed(0, 0.0)), o.c0, o.h, o.horizon), o.solver);
        row.completed = xn.status == SolveStatus::Completed;
        row.stall_reason = xn.stall_reason;
        row.sup_sol_err = node_sup_diff(xn.x, base.x, 1);
        row.sup_sol_err_reference = node_sup_diff(xn.x, ref.x, o.reference_refinement);
        row.gronwall_bound =
            o.horizon * std::exp(rep.lipschitz * o.horizon) * row.sup_rhs_err + 4.0 * o.solver.tol;
        row.gronwall_holds = row.sup_sol_err <= row.gronwall_bound;
        rep.gronwall_all = rep.gronwall_all && row.gronwall_holds;
        rep.orders.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < rep.orders.size(); ++i) {
        const auto& a = rep.orders[i - 1];
        const auto& b = rep.orders[i];
        rep.rhs_err_nonincreasing = rep.rhs_err_nonincreasing && b.sup_rhs_err <= a.sup_rhs_err;
        rep.sol_err_decreasing = rep.sol_err_decreasing && b.sup_sol_err < a.sup_sol_err &&
                                 b.sup_sol_err_reference < a.sup_sol_err_reference;
    }
    return rep;
}

} // namespace fdedep
