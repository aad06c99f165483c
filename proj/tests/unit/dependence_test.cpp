#include "fdedep/dependence.hpp"
#include "fdedep/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace fdedep;

namespace {

Expr theta_expr(const std::string& source) {
    return parse_expr(source, {.variables = {"theta"}});
}

ProblemSpec growth_base(double h = 1e-3) {
    return make_problem(0.0, 0.0, h, 1.0, [](double) { return Vec{1.0}; }, RhsSystem::parse({"x[1](t-0)"}, 0.0));
}

ProblemSpec delay_base(double h) {
    return make_problem(0.0, 1.0, h, 1.5, [](double) { return Vec{1.0}; }, RhsSystem::parse({"-x[1](t-1)"}, 1.0));
}

DependenceOptions quick_options(double a_prime) {
    DependenceOptions o;
    o.a_prime = a_prime;
    o.random_samples = 2000;
    o.uniqueness_check = false;
    o.threads = 2;
    return o;
}

FamilySpec linear_ode_family(std::size_t K) {
    FamilySpec s{growth_base(), K, {}, RhsSystem::parse({"1"}, 0.0), {}, 0.0, std::nullopt};
    return s;
}

} // namespace

TEST_CASE("coefficient rules") {
    CHECK(CoefficientRule{CoefficientRule::Kind::Inverse, 1.0}(4) == 0.25);
    CHECK(CoefficientRule{CoefficientRule::Kind::InversePower, 2.0}(4) == 0.0625);
    CHECK(CoefficientRule{CoefficientRule::Kind::Geometric, 0.5}(3) == 0.125);
    CHECK(CoefficientRule{CoefficientRule::Kind::Null, 1.0}(3) == 0.0);
    for (auto kind : {CoefficientRule::Kind::Inverse, CoefficientRule::Kind::InversePower,
                      CoefficientRule::Kind::Geometric, CoefficientRule::Kind::Null})
        CHECK(parse_coefficient_kind(to_string(kind)) == kind);
    CHECK_THROWS_AS(parse_coefficient_kind("harmonic"), InvalidArgument);
}

TEST_CASE("build_family examples") {
    SUBCASE("K = 0 is just the base") {
        const FamilySpec s{growth_base(), 0, {}, std::nullopt, {}, 0.0, std::nullopt};
        const auto fam = build_family(s);
        REQUIRE(fam.size() == 1);
        CHECK(fam[0].f == s.base.f);
    }
    SUBCASE("additive drift 1 with c_k = 1/k") {
        const auto fam = build_family(linear_ode_family(4));
        REQUIRE(fam.size() == 5);
        CHECK(fam[0].f == growth_base().f);
        const HistorySegment seg = HistorySegment::constant(0.0, 1e-3, {2.0});
        for (std::size_t k = 1; k <= 4; ++k)
            CHECK(eval_rhs(fam[k].f, 0.0, seg)[0] == doctest::Approx(2.0 + 1.0 / static_cast<double>(k)).epsilon(1e-15));
    }
    SUBCASE("sigma drift s = 1") {
        FamilySpec s{growth_base(), 3, {}, std::nullopt, {}, 1.0, std::nullopt};
        s.base.sigma = 0.25;
        const auto fam = build_family(s);
        CHECK(fam[3].sigma == 0.25 + 1.0 / 3.0);
        CHECK(fam[0].sigma == 0.25);
    }
    SUBCASE("initial-value drift") {
        const FamilySpec s{delay_base(1e-2), 2, {}, std::nullopt, {theta_expr("theta")}, 0.0, std::nullopt};
        const auto fam = build_family(s);
        CHECK(fam[2].phi.eval(-0.5)[0] == doctest::Approx(1.0 - 0.25).epsilon(1e-12));
        CHECK(fam[2].phi.eval(0.0)[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("a drift of the wrong dimension is rejected") {
        const FamilySpec s{growth_base(), 2, {}, RhsSystem::parse({"1", "2"}, 0.0), {}, 0.0, std::nullopt};
        CHECK_THROWS_AS(build_family(s), InvalidArgument);
    }
    SUBCASE("member errors name the member") {
        // The drift log(theta + 0.5) is undefined on [-1, -0.5].
        FamilySpec s{delay_base(1e-2), 2, {}, std::nullopt, {theta_expr("log(theta + 0.5)")}, 0.0, std::nullopt};
        try {
            build_family(s);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("member 1") != std::string::npos);
        }
    }
}

TEST_CASE("estimate_rate examples") {
    std::vector<double> c, e1, e2;
    for (std::size_t k = 1; k <= 32; ++k) {
        c.push_back(1.0 / static_cast<double>(k));
        e1.push_back(c.back());
        e2.push_back(c.back() * c.back());
    }
    CHECK(estimate_rate(e1, c, 16).slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(estimate_rate(e2, c, 16).slope == doctest::Approx(2.0).epsilon(1e-9));

    std::vector<double> with_zeros = e1;
    with_zeros[30] = 0.0;
    const RateFit fit = estimate_rate(with_zeros, c, 16);
    CHECK(fit.excluded == 1);
    CHECK(fit.points == 15);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(estimate_rate(e1, c, 2), DegenerateFit);
    std::vector<double> zeros(32, 0.0);
    CHECK_THROWS_AS(estimate_rate(zeros, c, 16), DegenerateFit);
}

TEST_CASE("estimate_rate recovers random power laws") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> p(0.3, 3.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double q = p(rng);
        const double a = scale(rng);
        std::vector<double> c, e;
        for (std::size_t k = 1; k <= 40; ++k) {
            c.push_back(std::pow(static_cast<double>(k), -0.7));
            e.push_back(a * std::pow(c.back(), q));
        }
        CHECK(estimate_rate(e, c, 20).slope == doctest::Approx(q).epsilon(1e-9));
    }
}

TEST_CASE("ladder_convergence") {
    const std::vector<double> ladder{1e-1, 1e-2, 1e-3};
    CHECK(ladder_convergence({0.5, 0.05, 0.005, 0.0005}, ladder).passed);
    CHECK_FALSE(ladder_convergence({0.5, 0.4, 0.3}, ladder).passed);
    CHECK_FALSE(ladder_convergence({0.05, 0.005, 0.05}, ladder).passed);
    CHECK(ladder_convergence({0.0, 0.0}, ladder).passed);
}

TEST_CASE("null family has e_k within 2 tol") {
    FamilySpec s = linear_ode_family(8);
    s.c_rule = {CoefficientRule::Kind::Null, 1.0};
    const DependenceReport rep = run_dependence(s, quick_options(1.0));
    for (const auto& m : rep.members) CHECK(m.e <= 2.0 * rep.options.solver.tol);
    CHECK(rep.existence);
    CHECK(rep.convergence_passed);
    CHECK(rep.passed());
}

TEST_CASE("linear ODE family: e_k = (e - 1) / k") {
    const FamilySpec s = linear_ode_family(32);
    DependenceOptions o = quick_options(1.0);
    o.tail_start = 16;
    const DependenceReport rep = run_dependence(s, o);
    REQUIRE(rep.members.size() == 33);
    for (std::size_t k = 1; k <= 32; ++k) {
        // Trapezoid error on x' = x + c is O(h^2) relative, about 1e-7 here.
        const double exact = (std::exp(1.0) - 1.0) / static_cast<double>(k);
        CHECK(rep.members[k].e == doctest::Approx(exact).epsilon(1e-5));
    }
    REQUIRE(rep.rate.has_value());
    REQUIRE(rep.rate_in_k.has_value());
    CHECK(std::abs(rep.rate->slope - 1.0) <= 0.15);
    CHECK(std::abs(rep.rate_in_k->slope + 1.0) <= 0.15);
    CHECK(rep.existence);
    CHECK(rep.convergence_passed);
    CHECK(rep.passed());
}

TEST_CASE("delay family against a fine-grid reference") {
    const std::size_t K = 16;
    auto family = [&](double h) {
        return FamilySpec{delay_base(h), K, {}, std::nullopt, {theta_expr("1")}, 1.0, std::nullopt};
    };
    DependenceOptions o = quick_options(1.5);
    o.tail_start = 8;
    const DependenceReport coarse = run_dependence(family(1e-3), o);
    const DependenceReport fine = run_dependence(family(1e-4), o);
    for (std::size_t k = 1; k <= K; ++k) {
        CHECK(std::abs(coarse.members[k].e - fine.members[k].e) <= 1e-5);
        // The equation is linear and autonomous, so e_k = c_k sup |u| with u(0) = 1 the peak.
        CHECK(fine.members[k].e == doctest::Approx(1.0 / static_cast<double>(k)).epsilon(1e-6));
        if (k > 1) CHECK(coarse.members[k].e < coarse.members[k - 1].e);
        if (2 * k <= K) CHECK(coarse.members[2 * k].e < coarse.members[k].e);
    }
    CHECK(coarse.passed());
}

TEST_CASE("trajectory and eta comparisons differ by at most the initial-data drift") {
    // Non-linear delay family with drift in phi, sigma and the right-hand side.
    ProblemSpec base = make_problem(0.0, 1.0, 1e-3, 1.0, [](double th) { return Vec{std::cos(th)}; },
                                    RhsSystem::parse({"-sin(x[1](t-1)) + 0.2*x[1](t-0.5)"}, 1.0));
    const FamilySpec s{base, 12, {}, RhsSystem::parse({"cos(t)"}, 1.0), {theta_expr("0.5 + theta")}, 0.5,
                       std::nullopt};
    DependenceOptions o = quick_options(1.0);
    o.tail_start = 6;
    const DependenceReport rep = run_dependence(s, o);
    const SolveResult ref = solve(base, o.solver);
    for (std::size_t k = 1; k <= 12; ++k) {
        const auto& m = rep.members[k];
        // Modulus of continuity of x^(0) over |sigma_k - sigma_0| on the forward grid.
        const double shift = std::abs(m.sigma - base.sigma);
        const auto shift_nodes = static_cast<std::size_t>(std::ceil(shift / base.h));
        double omega = 0.0;
        const auto& x = ref.x;
        for (std::size_t j = 0; j + shift_nodes < x.forward_nodes(); ++j)
            omega = std::max(omega, std::abs(x.forward_node(j + shift_nodes)[0] - x.forward_node(j)[0]));
        CHECK(std::abs(m.e - m.e_eta) <= 2.0 * (m.phi_drift + omega) + 1e-12);
    }
}

TEST_CASE("run_dependence is deterministic") {
    FamilySpec s = linear_ode_family(8);
    s.phi_drift = {theta_expr("1")};
    DependenceOptions o = quick_options(1.0);
    o.uniqueness_check = true;
    o.threads = 4;
    const DependenceReport a = run_dependence(s, o);
    o.threads = 1;
    const DependenceReport b = run_dependence(s, o);
    std::ostringstream ca, cb;
    write_family_csv(ca, a);
    write_family_csv(cb, b);
    CHECK(ca.str() == cb.str());
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t k = 0; k < a.members.size(); ++k) {
        CHECK(a.members[k].e == b.members[k].e);
        CHECK(a.members[k].evaluations == b.members[k].evaluations);
    }
    CHECK(a.uniqueness.performed);
    CHECK(a.uniqueness.agree);
    CHECK(a.uniqueness.max_disagreement == b.uniqueness.max_disagreement);
}

TEST_CASE("the tube bound covers every solver evaluation inside the tube") {
    const FamilySpec s{delay_base(1e-3), 16, {}, RhsSystem::parse({"sin(t)"}, 1.0), {theta_expr("1")}, 0.0,
                       std::nullopt};
    DependenceOptions o = quick_options(1.0);
    o.tail_start = 8;
    const DependenceReport rep = run_dependence(s, o);
    REQUIRE(rep.bound.has_value());
    CHECK(rep.solver_evaluations_checked > 0);
    CHECK(rep.solver_violations == 0);
    REQUIRE(rep.random_check.has_value());
    CHECK(rep.random_check->above_bound == 0);
}

TEST_CASE("family csv layout") {
    FamilySpec s = linear_ode_family(3);
    const DependenceReport rep = run_dependence(s, quick_options(1.0));
    std::ostringstream out;
    write_family_csv(out, rep);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "k, c_k, sigma_k, achieved, e_k");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("a member that cannot be solved is recorded, not fatal") {
    // f_k = x^2 * (1 + 10 c_k) blows up before t = 1 for large c_k.
    ProblemSpec base = make_problem(0.0, 0.0, 1e-3, 0.5, [](double) { return Vec{1.0}; },
                                    RhsSystem::parse({"x[1](t-0)^2"}, 0.0));
    FamilySpec s{base, 4, {}, RhsSystem::parse({"10*x[1](t-0)^2"}, 0.0), {}, 0.0, std::nullopt};
    DependenceOptions o = quick_options(0.5);
    o.tail_start = 3;
    const DependenceReport rep = run_dependence(s, o);
    REQUIRE(rep.members.size() == 5);
    CHECK_FALSE(rep.members[1].completed);
    CHECK_FALSE(rep.members[1].stall_reason.empty());
    CHECK(rep.members[0].completed);
}
