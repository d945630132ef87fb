#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/growth.hpp"

namespace vpy {

// Shared propagation map of the second-order Gronwall lemma:
//   Psi_{delta,c_sub}^{-1}( Psi_{delta,c_sub}(u0) + e^{growth_rate * t} - 1 ).
// Every certificate bound routes through this one code path.
double psi_propagate(const Modulus& modulus, double delta, double c_sub, double growth_rate,
                     double u0, double t, double t_max = 1e3, double guess = -1);

struct GronwallInput {
    Modulus modulus;
    double c = 1;       // coefficient of u' in u'' <= c u' + phi(u)
    double delta = 0;   // bound on u'(0)
    double u0 = 0;
    double T = 1;
};

struct GronwallBound {
    double u_bound = 0;
    double uprime_bound = 0;
};

// u(t)  <= Psi_{delta,1}^{-1}( Psi_{delta,1}(u0) + e^{ct} - 1 )
// u'(t) <= e^{ct} ( delta + sqrt(2 Phi(u(t))) )
GronwallBound gronwall_bounds(const GronwallInput& in, double t);

struct OdeStabilityInput {
    double L = 1;
    double delta = 0;
    double T = 1;
    double x_gap = 0, v_gap = 0, E_gap = 0, F_gap = 0;  // empirical sup gaps
};

// Sup-norm trajectory separation bound
//   v_gap + E_gap + P + T phi(P),  P = Psi_{delta,L}^{-1}(Psi_{delta,L}(x_gap) + e^{LT} - 1).
// Requires the hypothesis L(x_gap + v_gap + E_gap) + F_gap <= delta.
double ode_stability_bound(const OdeStabilityInput& in, const Modulus& modulus);

struct StabilityCertificate {
    double L = 1, delta = 0, T = 1;
    int dim = 0;
    bool L_clamped = false;  // requested L < 1 was raised to 1
    std::string theta_desc;
    std::vector<double> times, position_bound, velocity_bound, w1_bound;

    // Header line with all parameters, then t,position_bound,velocity_bound,w1_bound.
    void write_csv(std::ostream& os) const;
};

// W1 stability certificate:
//   position(t) = Psi_{delta,2L}^{-1}( Psi_{delta,2L}(w1_0) + e^{Lt} - 1 )
//   velocity(t) = e^{Lt} ( delta + sqrt(4 L Phi(position(t))) )
// delta defaults to twice the hypothesis gap 2L w1_0 + F_gap, floored.
StabilityCertificate lagrangian_w1_bound(double L, const Modulus& modulus, double w1_0,
                                         double F_gap, double T,
                                         std::vector<double> time_grid = {},
                                         double delta_floor = 1e-12);

// delta + P + T phi(P) with P = Psi_{delta,L}^{-1}(e^{LT} - 1); the trajectory
// gap bound for two fields delta apart in sup norm.
double mollification_convergence_bound(double delta_mn, double L, double T,
                                       const Modulus& modulus);

// Extended-range variant taking log(delta) directly; iterated-log moduli
// approach their zero limit only at delta far below the double underflow
// threshold.
double mollification_convergence_bound_log(double log_delta, double L, double T,
                                           const Modulus& modulus);

std::vector<double> uniform_time_grid(double T, int points = 256);

}  // namespace vpy
