#include "fdedep/error.hpp"
#include "fdedep/lab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fdedep;

namespace {

const Box kUnit{{0.0}, {1.0}};

FnSeq shift_family(std::size_t k_max = 256) {
    return {[](std::size_t k, std::span<const double> x) { return x[0] + 1.0 / static_cast<double>(k); },
            [](std::span<const double> x) { return x[0]; }, kUnit, k_max};
}

// True pointwise limit: 0 on [0, 1), 1 at x = 1.
FnSeq power_family(std::size_t k_max = 256) {
    return {[](std::size_t k, std::span<const double> x) { return std::pow(x[0], static_cast<double>(k)); },
            [](std::span<const double> x) { return x[0] == 1.0 ? 1.0 : 0.0; }, kUnit, k_max};
}

FnSeq power_family_zero_limit(std::size_t k_max = 256) {
    return {[](std::size_t k, std::span<const double> x) { return std::pow(x[0], static_cast<double>(k)); },
            [](std::span<const double>) { return 0.0; }, kUnit, k_max};
}

FnSeq bump_family(std::size_t k_max = 256) {
    return {[](std::size_t k, std::span<const double> x) {
                const double n = static_cast<double>(k);
                return n * x[0] * std::exp(-n * x[0]);
            },
            [](std::span<const double>) { return 0.0; }, kUnit, k_max};
}

FnSeq constant_family(std::size_t k_max = 256) {
    return {[](std::size_t, std::span<const double> x) { return std::sin(3.0 * x[0]); },
            [](std::span<const double> x) { return std::sin(3.0 * x[0]); }, kUnit, k_max};
}

const std::vector<double> kEps{1e-1, 1e-2, 1e-3};

void check_replay(const FnSeq& seq, const Verdict& v) {
    REQUIRE(v.refuted());
    REQUIRE(v.witness.has_value());
    CHECK(replay(seq, *v.witness) >= v.witness->gap - 1e-12);
}

} // namespace

TEST_CASE("grid_points covers the box") {
    const auto pts = grid_points(Box{{0.0, -1.0}, {1.0, 1.0}}, 3);
    REQUIRE(pts.size() == 9);
    CHECK(pts.front() == Point{0.0, -1.0});
    CHECK(pts.back() == Point{1.0, 1.0});
}

TEST_CASE("check_pointwise examples") {
    const auto pts = grid_points(kUnit, 17);
    CHECK_FALSE(check_pointwise(constant_family(), pts, 1e-12, 128).refuted());
    CHECK_FALSE(check_pointwise(shift_family(10000), pts, 1e-3, 5000).refuted());

    const FnSeq pw = power_family_zero_limit();
    const Verdict v = check_pointwise(pw, pts, 1e-2, 128);
    check_replay(pw, v);
    CHECK(v.witness->x == Point{1.0});
    CHECK(v.witness->gap == 1.0);
}

TEST_CASE("check_pointwise rejects a tail beyond k_max") {
    CHECK_THROWS_AS(check_pointwise(shift_family(10), grid_points(kUnit, 3), 1e-3, 11), InvalidArgument);
}

TEST_CASE("check_exhaustive examples") {
    const auto pts = grid_points(kUnit, 17);
    const auto deltas = LabConfig::default_delta_ladder();
    CHECK_FALSE(check_exhaustive(constant_family(), pts, kEps, deltas, 128).refuted());
    CHECK_FALSE(check_exhaustive(shift_family(), pts, kEps, deltas, 128).refuted());

    const FnSeq bump = bump_family();
    const Verdict v = check_exhaustive(bump, pts, kEps, deltas, 128);
    check_replay(bump, v);
    CHECK(v.witness->x == Point{0.0});
    CHECK(v.witness->eps <= 0.3);
    CHECK(v.witness->gap == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("check_weak_exhaustive examples") {
    const auto pts = grid_points(kUnit, 17);
    const auto deltas = LabConfig::default_delta_ladder();
    CHECK_FALSE(check_weak_exhaustive(bump_family(), pts, kEps, deltas, 128).refuted());
    CHECK_FALSE(check_weak_exhaustive(constant_family(), pts, kEps, deltas, 128).refuted());

    const FnSeq pw = power_family();
    const Verdict v = check_weak_exhaustive(pw, pts, kEps, deltas, 128);
    check_replay(pw, v);
    CHECK(v.witness->x == Point{1.0});
    CHECK(v.witness->t[0] < 1.0);
}

TEST_CASE("check_continuous_convergence examples") {
    const auto pts = grid_points(kUnit, 17);
    CHECK_FALSE(check_continuous_convergence(constant_family(), pts, 16, 1e-1, 128).refuted());
    CHECK_FALSE(check_continuous_convergence(shift_family(), pts, 16, 1e-1, 128).refuted());

    const FnSeq bump = bump_family();
    const Verdict v = check_continuous_convergence(bump, pts, 16, 1e-1, 128);
    check_replay(bump, v);
    CHECK(v.witness->x == Point{0.0});
    CHECK(v.witness->gap > 0.3);
    CHECK(v.witness->sequence_n.size() == v.witness->sequence_x.size());
    CHECK_FALSE(v.witness->sequence_n.empty());
}

TEST_CASE("the probe x_n = 1/n gives the exact bump gap") {
    const FnSeq bump = bump_family();
    for (std::size_t n = 1; n <= 256; n *= 2) {
        const Point t{1.0 / static_cast<double>(n)};
        CHECK(bump(n, t) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    }
}

TEST_CASE("check_uniform_on_compacta examples") {
    const auto grid = grid_points(kUnit, 1025);
    CHECK_FALSE(check_uniform_on_compacta(shift_family(), grid, 1e-2, 128).refuted());
    CHECK_FALSE(check_uniform_on_compacta(constant_family(), grid, 1e-2, 128).refuted());

    const FnSeq pw = power_family();
    const Verdict v = check_uniform_on_compacta(pw, grid, 1e-2, 128);
    check_replay(pw, v);
    CHECK(v.witness->gap >= 0.5);
    CHECK(v.witness->x[0] < 1.0);
}

TEST_CASE("cross_check on the canonical families") {
    SUBCASE("shift") {
        const auto m = cross_check(shift_family());
        CHECK_FALSE(m.any_refuted());
        CHECK(m.limit_continuous);
        CHECK(m.inconsistencies.empty());
    }
    SUBCASE("power") {
        const auto m = cross_check(power_family());
        CHECK_FALSE(m.pointwise.refuted());
        CHECK(m.weak_exhaustive.refuted());
        CHECK(m.weak_exhaustive.witness->x[0] > 0.9);
        CHECK(m.exhaustive.refuted());
        CHECK(m.continuous.refuted());
        CHECK(m.uniform.refuted());
        CHECK_FALSE(m.limit_continuous);
        REQUIRE(m.limit_witness.has_value());
        // The probe point lies in the box, next to the jump at 1.
        const double t = m.limit_witness->t[0];
        CHECK(t >= 0.9);
        CHECK(t < 1.0);
        CHECK(m.limit_witness->sequence_x[0][0] == t);
        CHECK(m.limit_witness->gap == 1.0);
        CHECK(m.inconsistencies.empty());
    }
    SUBCASE("bump") {
        const auto m = cross_check(bump_family());
        CHECK_FALSE(m.pointwise.refuted());
        CHECK_FALSE(m.weak_exhaustive.refuted());
        CHECK(m.exhaustive.refuted());
        CHECK(m.continuous.refuted());
        CHECK(m.uniform.refuted());
        CHECK(m.limit_continuous);
        CHECK(m.inconsistencies.empty());
    }
}

TEST_CASE("cross_check flags a declared limit that contradicts the members") {
    const auto m = cross_check(power_family_zero_limit());
    CHECK(m.pointwise.refuted());
    CHECK(m.any_refuted());
}

TEST_CASE("FnSeq from expressions") {
    const Expr member = parse_expr("k*x*exp(-k*x)", {.variables = {"k", "x"}});
    const Expr limit = parse_expr("0", {.variables = {"x"}});
    const FnSeq seq = FnSeq::from_expr(member, limit, kUnit, 256);
    const Point x{0.25};
    CHECK(seq(8, x) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
    CHECK(seq.limit(x) == 0.0);
}

TEST_CASE("witnesses persist when k_max grows") {
    const auto pts = grid_points(kUnit, 17);
    const auto deltas = LabConfig::default_delta_ladder();
    for (std::size_t k_max : {256u, 512u, 1024u}) {
        const FnSeq bump = bump_family(k_max);
        const Verdict ex = check_exhaustive(bump, pts, kEps, deltas, k_max / 2);
        const Verdict cc = check_continuous_convergence(bump, pts, 16, 1e-1, k_max / 2);
        CHECK(ex.refuted());
        CHECK(cc.refuted());
        const FnSeq pw = power_family(k_max);
        CHECK(check_weak_exhaustive(pw, pts, kEps, deltas, k_max / 2).refuted());
        CHECK(check_uniform_on_compacta(pw, grid_points(kUnit, 1025), 1e-2, k_max / 2).refuted());
    }
}

TEST_CASE("witnesses persist when the grid is refined") {
    const auto deltas = LabConfig::default_delta_ladder();
    for (std::size_t per_axis : {17u, 33u, 65u}) {
        const auto pts = grid_points(kUnit, per_axis);
        CHECK(check_exhaustive(bump_family(), pts, kEps, deltas, 128).refuted());
        CHECK(check_weak_exhaustive(power_family(), pts, kEps, deltas, 128).refuted());
        CHECK(check_pointwise(power_family_zero_limit(), pts, 1e-2, 128).refuted());
    }
}

TEST_CASE("random families: refuted verdicts replay") {
    std::mt19937 rng(20261017);
    std::uniform_real_distribution<double> amp(0.5, 3.0);
    std::uniform_real_distribution<double> where(0.0, 1.0);
    const auto pts = grid_points(kUnit, 9);
    const auto deltas = LabConfig::default_delta_ladder();
    for (int trial = 0; trial < 20; ++trial) {
        const double a = amp(rng);
        const double c = where(rng);
        // A travelling spike of height a that converges to c.
        const FnSeq seq({[=](std::size_t k, std::span<const double> x) {
                             const double n = static_cast<double>(k);
                             const double centre = c + (1.0 - c) / n;
                             return a * std::exp(-n * n * (x[0] - centre) * (x[0] - centre));
                         },
                         [](std::span<const double>) { return 0.0; }, kUnit, 128});
        for (const Verdict& v : {check_pointwise(seq, pts, 1e-2, 64),
                                 check_exhaustive(seq, pts, kEps, deltas, 64),
                                 check_weak_exhaustive(seq, pts, kEps, deltas, 64),
                                 check_continuous_convergence(seq, pts, 16, 1e-1, 64),
                                 check_uniform_on_compacta(seq, grid_points(kUnit, 257), 1e-2, 64)}) {
            if (v.refuted()) {
                REQUIRE(v.witness.has_value());
                CHECK(replay(seq, *v.witness) >= v.witness->gap - 1e-12);
            }
        }
    }
}

namespace {

VaryingSeq shrinking_domain(std::function<double(std::size_t, double)> member, double limit_at_zero) {
    VaryingSeq s;
    s.member = [member](std::size_t k, const Point& x) { return Vec{member(k, x[0])}; };
    s.in_domain = [](std::size_t k, const Point& x) {
        const double lo = k == 0 ? 0.0 : 1.0 / static_cast<double>(k);
        return x[0] >= lo - 1e-15 && x[0] <= 1.0 + 1e-15;
    };
    s.limit = [limit_at_zero](const Point& x) { return Vec{x[0] == 0.0 ? limit_at_zero : x[0]}; };
    s.k_max = 256;
    return s;
}

Probe clamp_probe() {
    return {"max(x, 1/n)", [](std::size_t k, const Point& x) {
                return Point{std::max(x[0], 1.0 / static_cast<double>(k))};
            }};
}

} // namespace

TEST_CASE("generalized continuous convergence with shrinking domains") {
    const auto pts = grid_points(kUnit, 17);
    SUBCASE("identity on [1/n, 1]") {
        const VaryingSeq s = shrinking_domain([](std::size_t, double x) { return x; }, 0.0);
        const Verdict v = check_generalized_cont_convergence(s, pts, {clamp_probe()}, 1e-2, 128);
        CHECK_FALSE(v.refuted());
    }
    SUBCASE("1/(n x) with f0(0) = 0") {
        VaryingSeq s = shrinking_domain([](std::size_t k, double x) { return 1.0 / (static_cast<double>(k) * x); },
                                        0.0);
        const Verdict v = check_generalized_cont_convergence(s, {Point{0.0}}, {clamp_probe()}, 1e-1, 128);
        REQUIRE(v.refuted());
        CHECK(v.witness->x == Point{0.0});
        CHECK(v.witness->gap == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(replay(s, *v.witness) >= v.witness->gap - 1e-12);
    }
    SUBCASE("a probe that leaves the domain throws") {
        const VaryingSeq s = shrinking_domain([](std::size_t, double x) { return x; }, 0.0);
        const Probe bad{"constant", [](std::size_t, const Point& x) { return x; }};
        CHECK_THROWS_AS(check_generalized_cont_convergence(s, {Point{0.0}}, {bad}, 1e-2, 128), ProbeOutOfDomain);
    }
}

TEST_CASE("equal domains reduce to the ordinary check") {
    const auto pts = grid_points(kUnit, 17);
    for (const FnSeq& seq : {shift_family(), bump_family(), constant_family()}) {
        VaryingSeq s;
        s.member = [seq](std::size_t k, const Point& x) { return Vec{seq(k, x)}; };
        s.in_domain = [](std::size_t, const Point& x) { return kUnit.contains(x); };
        s.limit = [seq](const Point& x) { return Vec{seq.limit(x)}; };
        s.k_max = seq.k_max();
        auto project = [](std::size_t, Point p) { return kUnit.clamp(std::move(p)); };
        auto probes = standard_probes(1, 0.5, project);
        probes.push_back(adversarial_probe(s, 2.0, 16, project));
        const Verdict g = check_generalized_cont_convergence(s, pts, probes, 1e-1, 128);
        const Verdict o = check_continuous_convergence(seq, pts, 16, 1e-1, 128);
        CHECK(g.refuted() == o.refuted());
        if (g.refuted()) CHECK(replay(s, *g.witness) >= g.witness->gap - 1e-12);
    }
}
