#include <doctest.h>

#include <cmath>

#include "vpy/quadrature.hpp"
#include "vpy/yudovich.hpp"

using namespace vpy;
using doctest::Approx;

TEST_SUITE_BEGIN("yudovich");

namespace {
// ||ell_1||_{L^p(B_1)}^p = S_d Gamma(p+1) / d^{p+1} in log form.
double log_ell1_norm_closed(int d, double p) {
    return (std::log(unit_sphere_area(d)) + std::lgamma(p + 1.0) - (p + 1.0) * std::log(d)) / p;
}
}  // namespace

TEST_CASE("radial L^p norms against closed forms") {
    CHECK(lp_norm_radial(uniform_ball_profile(2, 1.0), 2.0) ==
          Approx(std::sqrt(M_PI)).epsilon(1e-10));
    CHECK(lp_norm_radial(uniform_ball_profile(2, 1.0), 1.0) == Approx(M_PI).epsilon(1e-10));
    CHECK(lp_norm_radial(uniform_ball_profile(3, 0.5, 2.0), 1.0) ==
          Approx(2.0 * unit_ball_volume(3) * std::pow(0.5, 3)).epsilon(1e-10));

    // ell_1 over the whole unit ball.
    const RadialProfile l1 = ell_profile(2, 1, 1.0);
    CHECK(lp_norm_radial(l1, 2.0) == Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-10));
    for (double p = 1.0; p <= 128.0; p *= 2.0) {
        CHECK(log_lp_norm_radial(l1, p) == Approx(log_ell1_norm_closed(2, p)).epsilon(1e-8));
    }
    // Log-space agreement far beyond the overflow point of Gamma(p+1).
    for (double p : {512.0, 4096.0}) {
        CHECK(log_lp_norm_radial(l1, p) == Approx(log_ell1_norm_closed(2, p)).epsilon(1e-8));
    }
    // d = 3 variant of the same closed form.
    CHECK(log_lp_norm_radial(ell_profile(3, 1, 1.0), 16.0) ==
          Approx(log_ell1_norm_closed(3, 16.0)).epsilon(1e-8));

    // Mass of theta_0 with the eps_1 cutoff: 2 pi int_1^inf u e^{-2u} du.
    CHECK(lp_norm_radial(theta_m_profile(2, 0), 1.0) ==
          Approx(2.0 * M_PI * 0.75 * std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("eps cutoffs") {
    CHECK(eps_cutoff(1) == Approx(std::exp(-1.0)));
    CHECK(eps_cutoff(2) == Approx(std::exp(-std::exp(1.0))));
    CHECK(eps_cutoff(3) == Approx(std::exp(-std::exp(std::exp(1.0)))));
    CHECK(theta_m_profile(2, 1).support_radius == Approx(eps_cutoff(2)));
}

TEST_CASE("norm interpolation is log-convex in 1/p") {
    for (const auto& profile : {theta_m_profile(2, 0), theta_m_profile(2, 1),
                                power_log_profile(2, 2.0)}) {
        std::vector<double> p_grid, logn;
        for (double p = 1.0; p <= 1024.0; p *= 2.0) {
            p_grid.push_back(p);
            logn.push_back(log_lp_norm_radial(profile, p));
        }
        for (std::size_t i = 1; i + 1 < p_grid.size(); ++i) {
            const double s0 = 1.0 / p_grid[i - 1], s1 = 1.0 / p_grid[i], s2 = 1.0 / p_grid[i + 1];
            const double lambda = (s1 - s2) / (s0 - s2);
            CHECK(logn[i] <= lambda * logn[i - 1] + (1.0 - lambda) * logn[i + 1] + 1e-9);
        }
    }
}

TEST_CASE("lower-bound law for ell_m") {
    for (int m : {1, 2}) {
        const RadialProfile lm = ell_profile(2, m);
        const double C_d = unit_ball_volume(2);
        for (double p = std::max(8.0, std::log(1.0 / lm.support_radius)); p <= 2048.0; p *= 4.0) {
            const double lower =
                std::pow(C_d, 1.0 / p) * std::exp(-2.0) * iterated_log(m - 1, p);
            CHECK(lp_norm_radial(lm, p) >= lower * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("grid L^p and uniformly-localized norms") {
    SUBCASE("constant density on a large box") {
        GridDensity g;
        g.dim = 2;
        g.cells_per_axis = 96;
        g.box_half = 3.0;
        g.values.assign(g.cell_count(), 0.7);
        // cell size 1/16
        for (double p : {1.0, 3.0}) {
            CHECK(lp_ul_norm(g, p) ==
                  Approx(0.7 * std::pow(unit_ball_volume(2), 1.0 / p)).epsilon(0.015));
        }
        CHECK(g.lp_norm(1.0) == Approx(0.7 * 36.0).epsilon(1e-12));
    }
    SUBCASE("density supported in the unit ball: ul norm equals the full norm") {
        const GridDensity g = rasterize(uniform_ball_profile(2, 0.8), 64, 2.0);
        for (double p : {1.0, 2.0, 8.0}) {
            CHECK(lp_ul_norm(g, p) == Approx(g.lp_norm(p)).epsilon(1e-12));
        }
    }
    SUBCASE("two separated bumps, p = 1: the taller bump wins") {
        GridDensity g;
        g.dim = 2;
        g.cells_per_axis = 160;
        g.box_half = 5.0;
        g.values.assign(g.cell_count(), 0.0);
        const double h = g.cell_size();
        double tall_mass = 0;
        for (int i = 0; i < 160; ++i)
            for (int j = 0; j < 160; ++j) {
                const double x = -5.0 + (i + 0.5) * h, y = -5.0 + (j + 0.5) * h;
                const double da = std::hypot(x + 2.5, y), db = std::hypot(x - 2.5, y);
                if (da < 0.8) g.values[static_cast<std::size_t>(i) * 160 + j] = 1.0;
                if (db < 0.8) {
                    g.values[static_cast<std::size_t>(i) * 160 + j] = 2.0;
                    tall_mass += 2.0 * h * h;
                }
            }
        CHECK(lp_ul_norm(g, 1.0) == Approx(tall_mass).epsilon(1e-9));
    }
    SUBCASE("refinement: non-decreasing and Cauchy for a smooth density") {
        RadialProfile smooth;
        smooth.dim = 2;
        smooth.support_radius = 1.5;
        smooth.value = [](double r) { return std::exp(-r * r); };
        double prev = 0;
        std::vector<double> vals;
        for (int n : {32, 64, 128}) {
            const GridDensity g = rasterize(smooth, n, 2.0);
            vals.push_back(lp_ul_norm(g, 2.0));
            CHECK(vals.back() >= prev * (1.0 - 1e-3));
            prev = vals.back();
        }
        CHECK(std::abs(vals[2] - vals[1]) / vals[2] < 0.02);
    }
    SUBCASE("coarse grids are rejected") {
        GridDensity g;
        g.dim = 2;
        g.cells_per_axis = 4;
        g.box_half = 2.0;
        g.values.assign(16, 1.0);
        CHECK_THROWS_AS(lp_ul_norm(g, 2.0), InvalidInput);
    }
}

TEST_CASE("yudovich report: saturation and its failure") {
    const RadialProfile l1_ball = ell_profile(2, 1, 1.0);

    SUBCASE("theta_0 against Theta_0 stabilizes near 1/(2e)") {
        const auto rep = yudovich_report(l1_ball, GrowthFunction::iterated_log(0));
        CHECK(rep.top_ratio == Approx(1.0 / (2.0 * M_E)).epsilon(0.10));
        CHECK(rep.saturation_ratio > 0.15);
        CHECK(rep.saturation_ratio <= rep.top_ratio * (1 + 1e-12));
        for (std::size_t i = 0; i < rep.p_grid.size(); ++i)
            CHECK(rep.yudovich_norm >= rep.lp_ul_values[i] / GrowthFunction::iterated_log(0)(rep.p_grid[i]));
    }
    SUBCASE("bounded density saturates a constant growth function") {
        const auto rep = yudovich_report(uniform_ball_profile(2, 1.0), GrowthFunction::constant(1.0));
        CHECK(rep.saturation_ratio > 0.9);
        CHECK(std::isfinite(rep.yudovich_norm));
    }
    SUBCASE("theta_0 against a constant growth function fails to be Yudovich") {
        const auto rep = yudovich_report(l1_ball, GrowthFunction::constant(1.0));
        // The L^p norms outgrow the constant: the sup ratio blows up with the
        // grid top and the reciprocal top ratio collapses.
        CHECK(rep.yudovich_norm > 100.0);
        CHECK(rep.inverse_top_ratio < 0.01);
    }
}

TEST_CASE("saturation envelope fits") {
    SUBCASE("m = 1, d = 2: ratio to p stays in [0.15, 0.45]") {
        const auto fit = saturation_check(1, 2);
        CHECK(fit.p_grid.front() >= 8.0);
        CHECK(fit.a >= 0.15);
        CHECK(fit.b <= 0.45);
    }
    SUBCASE("m = 2, d = 2: ratio to log p confined") {
        const auto fit = saturation_check(2, 2);
        CHECK(fit.a > 0);
        CHECK(fit.b / fit.a < 50.0);
    }
    SUBCASE("m = 3 runs with an adaptive p_min") {
        const auto fit = saturation_check(3, 2);
        CHECK(fit.p_min > 30.0);
        CHECK(fit.a > 0);
    }
    SUBCASE("wrong denominator exponent is detected") {
        CHECK_THROWS_AS(saturation_check(1, 2, {}, 1), PropertyViolation);
    }
}

TEST_SUITE_END();
