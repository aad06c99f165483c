#include "fdedep/error.hpp"
#include "fdedep/fourier.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fdedep;

namespace {

constexpr double kPi = std::numbers::pi;

double triangle(double x) {
    const double u = std::fmod(x + kPi, 2.0 * kPi);
    return std::abs((u < 0.0 ? u + 2.0 * kPi : u) - kPi);
}

Expr x_expr(const std::string& source) {
    return parse_expr(source, {.variables = {"x"}});
}

double triangle_a(std::size_t k) {
    if (k == 0) return kPi;
    return k % 2 == 1 ? -4.0 / (kPi * static_cast<double>(k * k)) : 0.0;
}

double max_coeff_error(const FourierCoeffs& c) {
    double err = 0.0;
    for (std::size_t k = 0; k <= c.order(); ++k) {
        err = std::max(err, std::abs(c.a[k] - triangle_a(k)));
        err = std::max(err, std::abs(c.b[k]));
    }
    return err;
}

} // namespace

TEST_CASE("coefficients of cos") {
    const FourierCoeffs c = fourier_coeffs([](double t) { return std::cos(t); }, 8, 64);
    REQUIRE(c.order() == 8);
    for (std::size_t k = 0; k <= 8; ++k) {
        CHECK(std::abs(c.a[k] - (k == 1 ? 1.0 : 0.0)) <= 1e-10);
        CHECK(std::abs(c.b[k]) <= 1e-10);
    }
}

TEST_CASE("coefficients of a constant") {
    const FourierCoeffs c = fourier_coeffs([](double) { return 1.5; }, 4, 32);
    CHECK(c.a[0] == doctest::Approx(3.0).epsilon(1e-14));
    for (std::size_t k = 1; k <= 4; ++k) {
        CHECK(std::abs(c.a[k]) <= 1e-14);
        CHECK(std::abs(c.b[k]) <= 1e-14);
    }
    for (double x : {-2.0, 0.0, 1.0, 5.0}) CHECK(partial_sum(c, 4, x) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("triangle-wave coefficients") {
    // The trapezoid rule is only second order on the kinks at 0 and pi, so 1e-8 needs the finer grid.
    CHECK(max_coeff_error(fourier_coeffs(triangle, 27, 32768)) <= 1e-8);
    const double coarse = max_coeff_error(fourier_coeffs(triangle, 27, 4096));
    CHECK(coarse <= 1e-6);
    CHECK(max_coeff_error(fourier_coeffs(triangle, 27, 32768)) < coarse);
}

TEST_CASE("fourier_coeffs enforces the anti-aliasing floor") {
    CHECK_THROWS_AS(fourier_coeffs(triangle, 10, 79), InvalidArgument);
    CHECK_NOTHROW(fourier_coeffs(triangle, 10, 80));
}

TEST_CASE("S_9 of the triangle wave against direct summation") {
    const FourierCoeffs c = fourier_coeffs(triangle, 9, 32768);
    double ours = 0.0;
    double oracle = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -kPi + 2.0 * kPi * i / 1000.0;
        ours = std::max(ours, std::abs(partial_sum(c, 9, x) - triangle(x)));
        // Highest order first, sine and cosine terms accumulated separately.
        double cs = 0.0;
        double sn = 0.0;
        for (std::size_t k = 9; k >= 1; --k) {
            cs += c.a[k] * std::cos(static_cast<double>(k) * x);
            sn += c.b[k] * std::sin(static_cast<double>(k) * x);
        }
        oracle = std::max(oracle, std::abs(sn + cs + 0.5 * c.a[0] - triangle(x)));
    }
    CHECK(std::abs(ours - oracle) <= 1e-12);
}

TEST_CASE("partial sums as expressions") {
    const FourierCoeffs c = fourier_coeffs(triangle, 9, 4096);
    const Expr s = partial_sum_expr(c, 9, x_expr("x"));
    const auto fn = partial_sum_fn(c, 9);
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        const double via_expr = s.eval(std::vector<double>{x});
        CHECK(via_expr == doctest::Approx(partial_sum(c, 9, x)).epsilon(1e-13));
        CHECK(fn(x) == partial_sum(c, 9, x));
    }
}

TEST_CASE("Bessel inequality for every truncation") {
    for (const auto& f : std::vector<std::function<double(double)>>{
             triangle, [](double t) { return std::exp(std::sin(t)); },
             [](double t) { return std::abs(std::sin(t)) + 0.3 * std::cos(3.0 * t); }}) {
        const std::size_t Q = 32768;
        double energy = 0.0;
        for (std::size_t i = 0; i < Q; ++i) {
            const double v = f(2.0 * kPi * static_cast<double>(i) / static_cast<double>(Q));
            energy += v * v;
        }
        energy *= 2.0 * kPi / static_cast<double>(Q);
        const FourierCoeffs c = fourier_coeffs(f, 64, Q);
        double partial = 0.5 * c.a[0] * c.a[0];
        for (std::size_t n = 1; n <= 64; ++n) {
            partial += c.a[n] * c.a[n] + c.b[n] * c.b[n];
            CHECK(energy >= kPi * partial - 1e-6);
        }
    }
}

TEST_CASE("variation and Lipschitz estimates of the triangle wave") {
    CHECK(total_variation(triangle, 1000) == doctest::Approx(2.0 * kPi).epsilon(1e-12));
    CHECK(lipschitz_estimate(triangle, 1000) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lipschitz_estimate([](double t) { return std::sin(2.0 * t); }, 4000) ==
          doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("application: cos is its own partial sum") {
    FourierOptions o;
    o.orders = {1, 2, 4};
    const FourierReport rep = run_fourier_application(x_expr("cos(x)"), o);
    REQUIRE(rep.orders.size() == 3);
    for (const auto& r : rep.orders) {
        CHECK(r.completed);
        CHECK(r.sup_sol_err <= 2.0 * o.solver.tol);
        CHECK(r.gronwall_holds);
    }
    CHECK(rep.bessel_holds);
    CHECK_FALSE(rep.continuous_convergence.refuted());
}

TEST_CASE("application: a finite trigonometric polynomial") {
    FourierOptions o;
    o.orders = {2, 3, 6};
    o.c0 = 0.3;
    const FourierReport rep = run_fourier_application(x_expr("sin(x) + 0.5*cos(2*x) - 0.2"), o);
    for (const auto& r : rep.orders) {
        CHECK(r.completed);
        CHECK(r.sup_rhs_err <= 1e-10);
        CHECK(r.sup_sol_err <= 2.0 * o.solver.tol);
    }
    CHECK(rep.gronwall_all);
}

TEST_CASE("application: triangle wave") {
    FourierOptions o;
    o.orders = {1, 3, 9, 27};
    const FourierReport rep = run_fourier_application(x_expr("abs(mod(x + pi, 2*pi) - pi)"), o);
    REQUIRE(rep.orders.size() == 4);
    CHECK(rep.base_completed);
    CHECK(rep.reference_completed);
    for (std::size_t i = 0; i < rep.orders.size(); ++i) {
        CHECK(rep.orders[i].completed);
        CHECK(rep.orders[i].gronwall_holds);
        if (i > 0) {
            CHECK(rep.orders[i].sup_sol_err < rep.orders[i - 1].sup_sol_err);
            CHECK(rep.orders[i].sup_sol_err_reference < rep.orders[i - 1].sup_sol_err_reference);
            CHECK(rep.orders[i].sup_rhs_err <= rep.orders[i - 1].sup_rhs_err);
        }
    }
    // The reference grid differs from the tested one far below the smallest measured error.
    CHECK(rep.reference_gap < 0.1 * rep.orders.back().sup_sol_err);
    CHECK(rep.sol_err_decreasing);
    CHECK(rep.rhs_err_nonincreasing);
    CHECK(rep.bessel_holds);
    CHECK(rep.continuous_on_samples);
    CHECK_FALSE(rep.variation_warning);
    CHECK_FALSE(rep.continuous_convergence.refuted());
}

TEST_CASE("application: a jump is flagged") {
    FourierOptions o;
    o.orders = {1, 3};
    const FourierReport rep = run_fourier_application(x_expr("mod(x, 2*pi)"), o);
    CHECK_FALSE(rep.continuous_on_samples);
}
