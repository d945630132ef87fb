#pragma once

#include <vector>

#include "vpy/dynamics.hpp"
#include "vpy/ensemble.hpp"
#include "vpy/field.hpp"
#include "vpy/growth.hpp"
#include "vpy/yudovich.hpp"

namespace vpy {

// Draws N particles from f_0(x, v) = 1{|v| <= theta(x)^{1/d}} / (|B_1| ||theta||_1):
// positions from the radial law theta(r) r^{d-1}, velocities uniform in the
// local ball, equal weights.  Monotone profiles invert the radial CDF;
// anything else is rejection-sampled under a piecewise-constant majorant.
ParticleEnsemble sample_initial_datum(const RadialProfile& theta, std::size_t N,
                                      std::uint64_t seed, double kappa = 1.0);

struct SimulationState {
    double t = 0;
    ParticleEnsemble ens;
    std::vector<Vec> field;  // kappa-included field at each particle
};

// Recomputes the per-particle field from the current positions.
void refresh_field(SimulationState& state, const KernelSpec& spec);

// One self-consistent Strang step.  With the corrector (default) the
// trailing half-kick re-evaluates the field from the post-drift sources;
// source-coincident evaluations keep the pairwise momentum cancellation
// exact.  corrector = false freezes the step-start sources for both kicks,
// which is first-order in the self-coupling.
void step(SimulationState& state, const KernelSpec& spec, const ForceLaw& force, double dt,
          bool corrector = true);

// Smallest axis-aligned cube [-L, L]^d containing all particles, inflated.
double auto_box_half(const ParticleEnsemble& ens, double margin = 1.2);

// Cloud-in-cell deposition; mass-conservative up to the reported coverage.
// Throws InvalidInput when more than 1% of the mass falls outside the box.
GridDensity estimate_density(const ParticleEnsemble& ens, int cells_per_axis, double box_half,
                             double* coverage = nullptr);

struct DiagnosticsRecord {
    double t = 0;
    double mass = 0;
    double first_moment = 0;
    double min_weight = 0;
    double coverage = 0;
    double kinetic_energy = 0;
    Vec momentum;
    std::vector<double> p_set;
    std::vector<double> velocity_moments;  // M_p
    std::vector<double> rho_lp;
    std::vector<double> rho_lp_ul;
    double yudovich_ratio = 0;  // sup over p_set of ||rho||_{L^p_ul} / Theta(p)
};

DiagnosticsRecord diagnostics(const SimulationState& state, const GrowthFunction& theta_growth,
                              const std::vector<double>& p_set, int grid_cells, double box_half);

// Smooth compactly supported test function
//   psi(t, x, v) = chi(t/T) b(|x-x0|/rx) b(|v-v0|/rv)
// with the cubic time cutoff chi(s) = 1 - 3s^2 + 2s^3 and the standard bump
// b(s) = exp(1 - 1/(1-s^2)).  Derivatives are analytic.
struct TestFunction {
    Vec x0, v0;
    double rx = 1, rv = 1;
    double T = 1;

    double value(double t, const Vec& x, const Vec& v) const;
    double dt(double t, const Vec& x, const Vec& v) const;
    Vec grad_x(double t, const Vec& x, const Vec& v) const;
    Vec grad_v(double t, const Vec& x, const Vec& v) const;
};

// Streams simulation states and accumulates the weak-form pairing
//   int_0^T sum_i w_i (dt psi + F . grad_x psi + E . grad_v psi) dt
// by composite Simpson over the uniform step grid (3/8 closing rule for odd
// step counts); residual adds the initial term sum_i w_i psi(0, .).
class WeakFormAccumulator {
  public:
    // box_half, when positive, bounds the recorded spatial domain; a test
    // function whose x-support pokes outside it is rejected.
    WeakFormAccumulator(std::vector<TestFunction> tests, const ForceLaw& force,
                        double box_half = -1.0);
    void add_state(const SimulationState& state);  // call at t = 0, after every step
    std::vector<double> residuals() const;

  private:
    std::vector<TestFunction> tests_;
    ForceLaw force_;
    std::vector<double> times_;
    std::vector<std::vector<double>> pairings_;  // [test][time]
    std::vector<double> initial_term_;
};

}  // namespace vpy
