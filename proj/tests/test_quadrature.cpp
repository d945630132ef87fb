#include <doctest.h>

#include <cmath>

#include "vpy/quadrature.hpp"

using namespace vpy;
using doctest::Approx;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("gk15 and adaptive integration on closed forms") {
    CHECK(gk15([](double x) { return std::sin(x); }, 0.0, M_PI).value == Approx(2.0).epsilon(1e-12));
    const double a = std::exp(-3.0);
    // int_0^a s (-log s) ds = a^2 (1 - 2 log a) / 4
    const double expect = a * a * (1.0 - 2.0 * std::log(a)) / 4.0;
    const double got = integrate_adaptive([](double s) { return s > 0 ? -s * std::log(s) : 0.0; },
                                          0.0, a, 1e-13);
    CHECK(got == Approx(expect).epsilon(1e-12));
}

TEST_CASE("adaptive integration reports failure with achieved error") {
    // Needle far too sharp for the panel budget.
    auto needle = [](double x) { return 1.0 / (1e-300 + std::abs(x - 0.123456789)); };
    CHECK_THROWS_AS(integrate_adaptive(needle, 0.0, 1.0, 1e-14, 0.0, 8), NumericFailure);
}

TEST_CASE("log-domain panel integration reproduces lgamma") {
    // int_0^inf u^p e^{-2u} du = Gamma(p+1) / 2^{p+1}
    for (double p : {4.0, 64.0, 1024.0}) {
        const double peak = p / 2.0;
        const double width = std::sqrt(p) / 2.0;
        std::vector<double> breaks;
        const double lo = std::max(peak - 12 * width, 0.0);
        const double hi = peak + 12 * width + 40.0;
        for (int i = 0; i <= 160; ++i) breaks.push_back(lo + (hi - lo) * i / 160.0);
        if (lo > 0) breaks.insert(breaks.begin(), 0.0);
        const double got = log_integrate_panels(
            [p](double u) { return u > 0 ? p * std::log(u) - 2.0 * u : -HUGE_VAL; }, breaks);
        const double expect = std::lgamma(p + 1.0) - (p + 1.0) * std::log(2.0);
        CHECK(got == Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("cubic table interpolates and preserves monotonicity") {
    std::vector<double> x, y, dy;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(0.1 * i);
        y.push_back(std::atan(x.back()));
        dy.push_back(1.0 / (1.0 + x.back() * x.back()));
    }
    // Shape-preserving slopes: low order but monotone.
    CubicTable pchip(x, y);
    // Exact slopes: one order better.
    CubicTable hermite(x, y, dy);
    for (double q = 0.05; q < 4.0; q += 0.173) {
        CHECK(pchip(q) == Approx(std::atan(q)).epsilon(1e-4));
        CHECK(hermite(q) == Approx(std::atan(q)).epsilon(1e-6));
    }
    double prev = pchip(0.0);
    for (double q = 0.01; q <= 4.0; q += 0.01) {
        CHECK(pchip(q) >= prev - 1e-15);
        prev = pchip(q);
    }
}

TEST_CASE("gamma_q against the erfc identity") {
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(gamma_q(0.5, x) == Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    }
    CHECK(gamma_q(2.0, 0.0) == 1.0);
    // Q(1, x) = e^{-x}
    CHECK(gamma_q(1.0, 2.5) == Approx(std::exp(-2.5)).epsilon(1e-12));
}

TEST_CASE("small dense solve and determinant") {
    std::vector<double> A{2, 1, 0, 1, 3, 1, 0, 1, 2};
    auto x = solve_linear(A, {1.0, 2.0, 3.0});
    CHECK(2 * x[0] + x[1] == Approx(1.0));
    CHECK(x[0] + 3 * x[1] + x[2] == Approx(2.0));
    CHECK(x[1] + 2 * x[2] == Approx(3.0));
    CHECK(determinant({1, 2, 3, 4}, 2) == Approx(-2.0));
    CHECK(determinant({0, 1, 1, 0}, 2) == Approx(-1.0));
}

TEST_SUITE_END();
