#pragma once

#include <functional>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/growth.hpp"

namespace vpy {

// Velocity law F in dX = F(t, X, V) dt.
struct ForceLaw {
    enum class Kind { Classical, Relativistic, Custom };
    Kind kind = Kind::Classical;
    double lipschitz = 1.0;
    bool divergence_free_x = true;
    std::function<Vec(double, const Vec&, const Vec&)> custom_fn;

    Vec operator()(double t, const Vec& x, const Vec& v) const;

    static ForceLaw classical();     // F = v, L = 1
    static ForceLaw relativistic();  // F = v / sqrt(1 + |v|^2), |F| < 1, L <= 1
    static ForceLaw custom(double lipschitz, std::function<Vec(double, const Vec&, const Vec&)> fn,
                           bool divergence_free_x);
};

using FieldFn = std::function<Vec(double, const Vec&)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> positions, velocities;
};

// One Strang step: half kick from E, drift along F, half kick.  Exact drift
// for the classical and relativistic laws (F does not depend on x); midpoint
// sub-step for custom laws.
void strang_step(const ForceLaw& force, const FieldFn& field, double t, double dt, Vec& x, Vec& v);

// Fixed-step integration on [0, T]; states stored every store_every steps
// (and always at t = 0 and t = T).  T/dt is rounded to the nearest step count.
Trajectory integrate(const ForceLaw& force, const FieldFn& field, const Vec& x0, const Vec& v0,
                     double T, double dt, int store_every = 1);

// Applies the same splitting to every particle in place (parallel over
// particles).  Returns the indices whose integration hit a field singularity;
// throws SingularityError when more than 0.1% fail.
std::vector<std::size_t> flow_map(const ForceLaw& force, const FieldFn& field,
                                  std::vector<Vec>& xs, std::vector<Vec>& vs, double T, double dt);

// Max |det DGamma(T, .) - 1| over a phase-space sample grid, Jacobian by
// central differences.  Requires divergence_free_x.
double measure_preservation_check(const ForceLaw& force, const FieldFn& field, int dim, double T,
                                  double dt, int samples_per_axis, double box_half,
                                  double fd_step = 1e-5);

struct EnergyIdentityReport {
    double max_residual = 0;
    double final_position = 0, final_velocity = 0;
};

// One-dimensional diagnostic for the kinetic identity V^2 = 2(Phi(X) - Phi(eps))
// along dX = V, dV = phi(X), started from rest at X(0) = eps.
EnergyIdentityReport energy_identity_check(const Modulus& modulus, double eps0, double T,
                                           double dt);

}  // namespace vpy
