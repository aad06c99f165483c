#include "fdedep/error.hpp"
#include "fdedep/tube_lab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace fdedep;

namespace {

// f_0 = base, f_k = base + (1/k) * extra.
RhsFamily perturbed_family(const std::string& base, const std::string& extra, double r, std::size_t K) {
    RhsFamily fam{RhsSystem::parse({base}, r)};
    for (std::size_t k = 1; k <= K; ++k)
        fam.push_back(RhsSystem::parse({base + " + (" + extra + ") / " + std::to_string(k)}, r));
    return fam;
}

Trajectory constant_reference(double value, double r, double h, double a) {
    return tilde_extend(HistorySegment::constant(r, h, {value}), 0.0, a);
}

} // namespace

TEST_CASE("uniform bound of the zero family") {
    const RhsFamily fam(65, RhsSystem::zero(1, 1.0));
    const TubeBound b = uniform_bound_on_tube(fam, constant_reference(1.0, 1.0, 0.01, 1.0), 0.5, 1.0);
    CHECK(b.M == 0.0);
    CHECK(b.k0 == 32);
    CHECK(b.sampled_k.front() == 0);
    CHECK(b.sampled_k.size() == 34);
}

TEST_CASE("uniform bound of -psi(-1) + 1/k around the constant 1") {
    const std::size_t K = 64;
    const RhsFamily fam = perturbed_family("-x[1](t-1)", "1", 1.0, K);
    const TubeBound b = uniform_bound_on_tube(fam, constant_reference(1.0, 1.0, 0.01, 1.0), 0.5, 1.0);
    // psi(-1) ranges over [0.75, 1.25], so |f_k| <= max(1.25 - 1/k, 0.75 + 1/k) and f_0 attains 1.25.
    CHECK(b.observed_max == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(b.M == doctest::Approx(1.25 * b.observed_max).epsilon(1e-15));
    CHECK(b.M >= 1.5 + 1.0 / static_cast<double>(b.k0));
    CHECK(b.M <= 1.875 + 1e-9);
    for (double m : b.member_max) CHECK(m <= b.M);

    const RandomTubeCheck rc = random_tube_check(fam, b.V, b.k0, K, 10000, 7, b.M);
    CHECK(rc.samples == 10000);
    CHECK(rc.above_bound == 0);
    CHECK(rc.max_value <= b.M);
}

TEST_CASE("uniform bound of f0 + g/k with |f0| <= 1 and |g| <= 2") {
    const std::size_t K = 64;
    const RhsFamily fam = perturbed_family("sin(3*x[1](t-0))", "2*cos(t*x[1](t-0.5))", 1.0, K);
    const Trajectory x0 = tilde_extend(HistorySegment::sample(1.0, 0.01, 1, [](double th) { return Vec{std::cos(th)}; }),
                                       0.0, 1.0);
    const TubeBound b = uniform_bound_on_tube(fam, x0, 0.4, 1.0);
    const double slack = 1e-12;
    CHECK(b.M <= 1.25 * (1.0 + 2.0 / static_cast<double>(b.k0)) * (1.0 + slack));

    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const RandomTubeCheck rc = random_tube_check(fam, b.V, b.k0, K, 10000, seed, b.M);
        CHECK(rc.above_bound == 0);
    }
}

TEST_CASE("uniform bound rejects a short reference") {
    const RhsFamily fam(3, RhsSystem::zero(1, 1.0));
    CHECK_THROWS_AS(uniform_bound_on_tube(fam, constant_reference(1.0, 1.0, 0.01, 0.5), 0.5, 1.0), InvalidArgument);
    CHECK_THROWS_AS(uniform_bound_on_tube(fam, constant_reference(1.0, 1.0, 0.01, 1.0), 0.0, 1.0), InvalidArgument);
}

TEST_CASE("uniform bound reports an undefined member") {
    RhsFamily fam{RhsSystem::parse({"x[1](t-0)"}, 1.0), RhsSystem::parse({"log(x[1](t-0) - 0.9)"}, 1.0)};
    CHECK_THROWS_AS(uniform_bound_on_tube(fam, constant_reference(1.0, 1.0, 0.01, 1.0), 0.5, 1.0), EvalError);
}

TEST_CASE("in_tube on shifted reference states") {
    const Trajectory x0 = constant_reference(1.0, 1.0, 0.01, 1.0);
    const Tube V{x0, 0.25, 0.0, 1.0, std::nullopt};
    const HistorySegment near = HistorySegment::constant(1.0, 0.01, {1.2});
    const HistorySegment far = HistorySegment::constant(1.0, 0.01, {1.3});
    CHECK(in_tube(V, 0.5, near.view()));
    CHECK_FALSE(in_tube(V, 0.5, far.view()));
    CHECK(in_tube(V, 1.2, near.view()));
    CHECK_FALSE(in_tube(V, 1.3, near.view()));
    CHECK_FALSE(in_tube(V, -0.3, near.view()));
}

TEST_CASE("random tube samples lie in the tube") {
    // A family that records its argument through the value: f_k = psi(0) - 1.
    const Trajectory x0 = constant_reference(1.0, 1.0, 0.01, 1.0);
    const RhsFamily fam{RhsSystem::parse({"x[1](t-0) - 1"}, 1.0), RhsSystem::parse({"x[1](t-0) - 1"}, 1.0)};
    const Tube V{x0, 0.25, 0.0, 1.0, std::nullopt};
    const RandomTubeCheck rc = random_tube_check(fam, V, 1, 1, 5000, 3, 0.25);
    CHECK(rc.above_bound == 0);
    CHECK(rc.max_value < 0.25);
    CHECK(rc.max_value > 0.2);
}

TEST_CASE("random tube check is deterministic per seed") {
    const RhsFamily fam = perturbed_family("-x[1](t-1)", "sin(x[1](t-0.2))", 1.0, 16);
    const Tube V{constant_reference(1.0, 1.0, 0.01, 1.0), 0.25, 0.0, 1.0, std::nullopt};
    const auto a = random_tube_check(fam, V, 8, 16, 2000, 5, 10.0);
    const auto b = random_tube_check(fam, V, 8, 16, 2000, 5, 10.0);
    const auto c = random_tube_check(fam, V, 8, 16, 2000, 6, 10.0);
    CHECK(a.max_value == b.max_value);
    CHECK(a.max_value != c.max_value);
}

TEST_CASE("continuous convergence on the tube") {
    const Trajectory x0 = constant_reference(1.0, 1.0, 0.01, 1.0);
    const Tube V{x0, 0.25, 0.0, 1.0, std::nullopt};
    SUBCASE("f_k = f_0 + 1/k") {
        const RhsFamily fam = perturbed_family("-x[1](t-1)", "1", 1.0, 64);
        CHECK_FALSE(check_tube_continuous_convergence(fam, V, 0.1, 32).refuted());
    }
    SUBCASE("f_k = f_0 + 1") {
        RhsFamily fam{RhsSystem::parse({"-x[1](t-1)"}, 1.0)};
        for (int k = 1; k <= 64; ++k) fam.push_back(RhsSystem::parse({"-x[1](t-1) + 1"}, 1.0));
        const Verdict v = check_tube_continuous_convergence(fam, V, 0.1, 32);
        REQUIRE(v.refuted());
        CHECK(v.witness->gap == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(replay(tube_sequence(fam, V), *v.witness) >= v.witness->gap - 1e-12);
    }
    SUBCASE("a steepening family is refuted near its jump") {
        // f_k(t, psi) = clamp(k (psi(0) - 1), -1, 1) tends to sign(psi(0) - 1), which is 0 at the reference.
        RhsFamily fam{RhsSystem::parse({"0"}, 1.0)};
        for (int k = 1; k <= 64; ++k)
            fam.push_back(RhsSystem::parse({"min(max(" + std::to_string(k) + " * (x[1](t-0) - 1), -1), 1)"}, 1.0));
        const Verdict v = check_tube_continuous_convergence(fam, V, 0.1, 32);
        REQUIRE(v.refuted());
        CHECK(replay(tube_sequence(fam, V), *v.witness) >= v.witness->gap - 1e-12);
    }
}
