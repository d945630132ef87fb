#pragma once

#include <functional>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/growth.hpp"

namespace vpy {

enum class ProfileKind { UniformBall, IteratedLogProfile, PowerLogProfile, Custom };

// Radially symmetric density; value(r) for r <= support_radius, zero beyond.
// log_value_u, when set, evaluates log value(e^{-u}) directly in u = -log r;
// the L^p machinery needs it to probe radii far below the underflow point of
// e^{-u} (the transformed integrand peaks near u = p/d).
struct RadialProfile {
    int dim = 2;
    double support_radius = 1;
    std::function<double(double)> value;
    std::function<double(double)> log_value_u;
    ProfileKind kind = ProfileKind::Custom;
    int m = -1;
    double alpha = 1;
    double height = 1;

    double operator()(double r) const {
        return (r < 0 || r > support_radius) ? 0.0 : value(r);
    }
    RadialProfile scaled(double k) const;
    std::string describe() const;
};

// eps_m = exp(-exp_{m-1}(1)): the largest r in (0,1) with |log_m(r)| >= 1 and
// all intermediate logs defined.  Clamped to 1e-300 where not representable.
double eps_cutoff(int m);

RadialProfile uniform_ball_profile(int dim, double R, double height = 1.0);
// ell_m = |log_m| restricted to (0, cutoff); cutoff defaults to eps_m.
RadialProfile ell_profile(int dim, int m, double cutoff = -1.0);
// theta_m = ell_1 * ell_2^2 * ... * ell_{m+1}^2 (support (0, eps_{m+1})).
RadialProfile theta_m_profile(int dim, int m);
// ell_1^{1/alpha}, saturating Theta(p) = p^{1/alpha}.
RadialProfile power_log_profile(int dim, double alpha);

// L^p norm of a radial profile by substitution-aware quadrature in
// u = -log r, evaluated in log space (p up to 4096 without overflow).
double log_lp_norm_radial(const RadialProfile& profile, double p);
double lp_norm_radial(const RadialProfile& profile, double p);

// Uniform-grid histogram density on [-box_half, box_half]^dim, cell-averaged.
struct GridDensity {
    int dim = 2;
    int cells_per_axis = 0;
    double box_half = 0;
    std::vector<double> values;  // row-major

    double cell_size() const { return 2.0 * box_half / cells_per_axis; }
    std::size_t cell_count() const;
    double total_mass() const;
    double lp_norm(double p) const;
    void validate() const;
};

GridDensity rasterize(const RadialProfile& profile, int cells_per_axis, double box_half);

// sup over ball centers at every grid node of the L^p norm on the unit ball;
// cells weighted by the in-ball volume fraction (4^d-point subsampling).
// Requires cell_size <= 0.25.
double lp_ul_norm(const GridDensity& rho, double p);

struct NormReport {
    std::vector<double> p_grid;
    std::vector<double> lp_values;
    std::vector<double> lp_ul_values;
    double yudovich_norm = 0;     // sup lp_ul / Theta
    double saturation_ratio = 0;  // inf lp / Theta
    double top_ratio = 0;         // lp / Theta at the largest p
    double inverse_top_ratio = 0; // Theta / lp at the largest p; -> 0 when the
                                  // norms outgrow Theta
};

std::vector<double> default_p_grid();  // 1, 2, 4, ..., 4096

NormReport yudovich_report(const RadialProfile& profile, const GrowthFunction& theta,
                           std::vector<double> p_grid = {});
NormReport yudovich_report(const GridDensity& rho, const GrowthFunction& theta,
                           std::vector<double> p_grid = {});

// Envelope fit of ||ell_m||_{L^p} against log_{denominator_depth}(p); the
// default denominator depth m-1 is the growth law, anything else is a
// negative control and is expected to fail.
struct SaturationFit {
    double a = 0, b = 0;  // fitted envelope constants (min and max ratio)
    double p_min = 0;
    std::vector<double> p_grid, norms, ratios;
};
SaturationFit saturation_check(int m, int dim, std::vector<double> p_grid = {},
                               int denominator_depth = -1);

}  // namespace vpy
