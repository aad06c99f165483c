#include "fdedep/error.hpp"
#include "fdedep/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace fdedep;

namespace {

// Method of steps for x' = -x(t - 1), x = 1 on [-1, 0].
double delay_exact(double t) {
    if (t <= 0.0) return 1.0;
    if (t <= 1.0) return 1.0 - t;
    if (t <= 2.0) return 1.0 - t + 0.5 * (t - 1) * (t - 1);
    const double u = t - 2.0;
    return -0.5 + 0.5 * u * u - u * u * u / 6.0;
}

ProblemSpec delay_problem(double horizon, double h = 1e-3) {
    return make_problem(0.0, 1.0, h, horizon, [](double) { return Vec{1.0}; },
                        RhsSystem::parse({"-x[1](t-1)"}, 1.0));
}

ProblemSpec growth_problem(double horizon, double h = 1e-3) {
    return make_problem(0.0, 0.0, h, horizon, [](double) { return Vec{1.0}; }, RhsSystem::parse({"x[1](t-0)"}, 0.0));
}

double sup_error(const Trajectory& x, const std::function<double(double)>& exact, std::size_t comp = 0) {
    double e = 0.0;
    for (std::size_t j = 0; j < x.forward_nodes(); ++j) {
        const double t = x.sigma() + static_cast<double>(j) * x.h();
        e = std::max(e, std::abs(x.forward_node(j)[comp] - exact(t)));
    }
    return e;
}

// Self-mapping and equicontinuity for every step of a solve.
void check_step_invariants(const SolveResult& r, double tol) {
    const double h = r.x.h();
    for (const auto& s : r.steps) {
        CHECK(s.M * s.length <= 0.5 * s.beta_bar * (1 + 1e-12));
        for (double n : s.iterate_norms) {
            CHECK(n <= s.M * s.length);
            CHECK(n < s.beta_bar);
        }
        const auto j0 = static_cast<std::size_t>(std::llround(s.start / h));
        const auto n = static_cast<std::size_t>(std::llround(s.length / h));
        double worst = -1.0;
        for (std::size_t i = j0; i <= j0 + n; ++i)
            for (std::size_t k = i; k <= j0 + n; ++k) {
                const auto a = r.eta.forward_node(i);
                const auto b = r.eta.forward_node(k);
                for (std::size_t c = 0; c < a.size(); ++c)
                    worst = std::max(worst, std::abs(b[c] - a[c]) - s.M * static_cast<double>(k - i) * h);
            }
        CHECK(worst <= 2 * tol);
    }
}

} // namespace

TEST_CASE("apply_T examples") {
    const double h = 1e-3;
    const auto zero = make_problem(0.0, 1.0, h, 1.0, [](double) { return Vec{2.0}; }, RhsSystem::zero(1, 1.0));
    std::vector<double> bump(2001, 0.0);
    for (std::size_t j = 1001; j < 2001; ++j) bump[j] = std::sin(static_cast<double>(j));
    const EtaFn eta(1.0, SampledFn(-1.0, h, 1, bump));
    CHECK(apply_T(zero, eta, 1.0).sup_norm() == 0.0);

    const auto one = make_problem(0.0, 1.0, h, 1.0, [](double) { return Vec{0.0}; }, RhsSystem::parse({"1"}, 1.0));
    const auto t1 = apply_T(one, eta, 1.0);
    for (std::size_t j = 0; j <= 1000; ++j)
        CHECK(std::abs(t1.forward_node(j)[0] - static_cast<double>(j) * h) <= 1e-12);
    for (std::size_t i = 0; i < t1.lag_nodes(); ++i) CHECK(t1.fn().value(i, 0) == 0.0);

    const auto d = delay_problem(1.0);
    const auto td = apply_T(d, EtaFn::zero(1.0, h, 1.0, 1), 1.0);
    for (std::size_t j = 0; j <= 1000; ++j)
        CHECK(std::abs(td.forward_node(j)[0] + static_cast<double>(j) * h) <= 1e-12);
}

TEST_CASE("choose_step examples") {
    CHECK(choose_step(0.0, 1.0, 1e-3, 1.0) == doctest::Approx(1.0));
    CHECK(choose_step(1.0, 1.0, 1e-3, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(choose_step(1000.0, 0.1, 1e-3, 1.0), StepUnderflow);
    const double a = choose_step(3.0, 0.7, 1e-3, 1.0);
    CHECK(3.0 * a <= 0.5 * 0.7);
    CHECK(3.0 * (a + 1e-3) > 0.5 * 0.7);
}

TEST_CASE("picard_solve examples") {
    const double h = 1e-3;
    const auto zero = make_problem(0.0, 1.0, h, 1.0, [](double) { return Vec{1.0}; }, RhsSystem::zero(1, 1.0));
    const auto z = picard_solve(zero, 1.0, 1.0, 1e-10, 50);
    CHECK(z.iterations == 1);
    CHECK(z.eta.sup_norm() == 0.0);

    const auto g = picard_solve(growth_problem(0.5), 0.5, 10.0, 1e-10, 200);
    for (std::size_t j = 0; j <= 500; ++j) {
        const double t = static_cast<double>(j) * h;
        CHECK(std::abs(g.eta.forward_node(j)[0] - (std::exp(t) - 1.0)) <= 1e-4);
    }

    const auto d = picard_solve(delay_problem(0.5), 0.5, 1.0, 1e-10, 50);
    CHECK(d.iterations == 2);
    for (std::size_t j = 0; j <= 500; ++j)
        CHECK(std::abs(d.eta.forward_node(j)[0] + static_cast<double>(j) * h) <= 1e-10);
}

TEST_CASE("picard_solve failure modes") {
    CHECK_THROWS_AS(picard_solve(growth_problem(1.0), 1.0, 0.5, 1e-10, 200), SelfMapViolation);
    CHECK_THROWS_AS(picard_solve(growth_problem(1.0), 1.0, 10.0, 1e-14, 3), NoConvergence);
}

TEST_CASE("extend_solution follows the method of steps") {
    const double h = 1e-3;
    const auto p = delay_problem(2.0);
    const auto eta1 = picard_solve(p, 1.0, 2.0, 1e-10, 50).eta;
    const auto eta = extend_solution(p, eta1, 2.0);
    CHECK(eta.forward_nodes() == 2001);
    for (std::size_t j = 0; j <= 2000; ++j) {
        const double t = static_cast<double>(j) * h;
        CHECK(std::abs(eta.forward_node(j)[0] - (delay_exact(t) - 1.0)) <= 5e-4);
    }
    // The splice keeps eta1 untouched.
    for (std::size_t j = 0; j <= 1000; ++j) CHECK(eta.forward_node(j)[0] == eta1.forward_node(j)[0]);
    CHECK(residual(p, eta) <= 10 * 1e-10);

    const auto zp = make_problem(0.0, 1.0, h, 2.0, [](double) { return Vec{1.0}; }, RhsSystem::zero(1, 1.0));
    CHECK(extend_solution(zp, EtaFn::zero(1.0, h, 0.5, 1), 2.0).sup_norm() == 0.0);
}

TEST_CASE("solve examples") {
    const auto c = make_problem(0.0, 1.0, 1e-3, 5.0, [](double) { return Vec{2.5}; }, RhsSystem::zero(1, 1.0));
    const auto rc = solve(c);
    CHECK(rc.status == SolveStatus::Completed);
    CHECK(rc.x.fn().sup_norm() == 2.5);
    CHECK(rc.achieved == doctest::Approx(5.0));

    const auto rg = solve(growth_problem(1.0));
    CHECK(rg.status == SolveStatus::Completed);
    CHECK(sup_error(rg.x, [](double t) { return std::exp(t); }) <= 1e-3);
    CHECK(rg.steps.size() > 1);
    CHECK(rg.global_residual <= 1e-9);
    check_step_invariants(rg, 1e-10);

    const auto rd = solve(delay_problem(2.0));
    CHECK(rd.status == SolveStatus::Completed);
    CHECK(sup_error(rd.x, delay_exact) <= 5e-4);
    CHECK(rd.global_residual <= 1e-9);
    check_step_invariants(rd, 1e-10);
}

TEST_CASE("systems: rotation") {
    const auto p = make_problem(0.0, 0.0, 1e-3, 2.0, [](double) { return Vec{1.0, 0.0}; },
                                RhsSystem::parse({"x[2](t-0)", "-x[1](t-0)"}, 0.0));
    const auto r = solve(p);
    CHECK(r.status == SolveStatus::Completed);
    CHECK(sup_error(r.x, [](double t) { return std::cos(t); }, 0) <= 1e-3);
    CHECK(sup_error(r.x, [](double t) { return -std::sin(t); }, 1) <= 1e-3);
    check_step_invariants(r, 1e-10);
}

TEST_CASE("nonlinear delay equation keeps the step invariants") {
    const auto p = make_problem(0.0, 0.5, 1e-3, 3.0, [](double th) { return Vec{std::cos(th)}; },
                                RhsSystem::parse({"sin(x[1](t-0.5)) - x[1](t-0)"}, 0.5));
    const auto r = solve(p);
    CHECK(r.status == SolveStatus::Completed);
    CHECK(r.global_residual <= 1e-9);
    check_step_invariants(r, 1e-10);
}

TEST_CASE("blow-up stalls instead of throwing") {
    const auto p = make_problem(0.0, 0.0, 1e-3, 2.0, [](double) { return Vec{1.0}; },
                                RhsSystem::parse({"x[1](t-0)^2"}, 0.0));
    SolveResult r = solve(p);
    CHECK(r.status == SolveStatus::Stalled);
    CHECK_FALSE(r.stall_reason.empty());
    CHECK(r.achieved < 1.0);
    CHECK(r.x.forward_nodes() == r.eta.forward_nodes());
}

TEST_CASE("trajectory reconstruction matches compose_state") {
    const auto p = delay_problem(2.0);
    const auto r = solve(p);
    const auto pt = tilde_extend(p.phi, p.sigma, r.achieved);
    for (double t : {0.0, 0.3, 1.0, 1.777, 2.0}) {
        const auto a = compose_state(pt, r.eta, t);
        const auto b = r.x.segment_at(p.sigma + t);
        CHECK(sup_dist(a.fn(), b.fn()) <= 1e-12);
    }
}

TEST_CASE("residual examples") {
    const double h = 1e-3;
    const auto zero = make_problem(0.0, 0.0, h, 1.0, [](double) { return Vec{1.0}; }, RhsSystem::zero(1, 0.0));
    CHECK(residual(zero, EtaFn::zero(0.0, h, 1.0, 1)) == 0.0);
    const auto one = make_problem(0.0, 0.0, h, 1.0, [](double) { return Vec{1.0}; }, RhsSystem::parse({"1"}, 0.0));
    CHECK(residual(one, EtaFn::zero(0.0, h, 1.0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("Picard residuals are non-increasing after the first iteration") {
    for (const auto& p : {delay_problem(2.0), growth_problem(1.0)}) {
        const auto r = solve(p);
        for (const auto& s : r.steps)
            for (std::size_t i = 2; i < s.residual_history.size(); ++i)
                CHECK(s.residual_history[i] <= s.residual_history[i - 1]);
    }
}

TEST_CASE("halving h reduces the error by at least 1.8") {
    const auto e1 = sup_error(solve(growth_problem(1.0, 1e-2)).x, [](double t) { return std::exp(t); });
    const auto e2 = sup_error(solve(growth_problem(1.0, 5e-3)).x, [](double t) { return std::exp(t); });
    CHECK(e1 / e2 >= 1.8);
    const auto d1 = sup_error(solve(delay_problem(3.0, 1e-2)).x, delay_exact);
    const auto d2 = sup_error(solve(delay_problem(3.0, 5e-3)).x, delay_exact);
    CHECK(d1 > 0.0);
    CHECK(d1 / d2 >= 1.8);
}

TEST_CASE("one step and two steps agree") {
    const double tol = 1e-10;
    const double h = 1e-3;
    const auto p = delay_problem(0.8);
    SolverOptions one;
    one.tube_radius = 8.0;
    const auto r1 = solve(p, one);
    REQUIRE(r1.steps.size() == 1);
    SolverOptions two = one;
    two.max_step = 0.4;
    const auto r2 = solve(p, two);
    REQUIRE(r2.steps.size() == 2);
    const double M = std::max(r1.steps[0].M, std::max(r2.steps[0].M, r2.steps[1].M));
    CHECK(sup_dist(r1.x.fn(), r2.x.fn()) <= 10 * tol + 2 * h * M);
}
