#include "vpy/certificates.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace vpy {

double psi_propagate(const Modulus& modulus, double delta, double c_sub, double growth_rate,
                     double u0, double t, double t_max, double guess) {
    const double y = modulus.psi(delta, c_sub, u0) + std::expm1(growth_rate * t);
    return modulus.psi_inverse(delta, c_sub, y, t_max, guess);
}

GronwallBound gronwall_bounds(const GronwallInput& in, double t) {
    if (!(in.delta > 0)) throw InvalidInput("gronwall_bounds: delta must be positive");
    if (!(t >= 0) || t > in.T) throw InvalidInput("gronwall_bounds: t outside [0, T]");
    // The e^{ct} - 1 increment bounds int_0^t e^{cs} ds only for c >= 1;
    // since u' >= 0, the differential inequality with c < 1 also holds with
    // c = 1, so the coefficient is raised rather than the display changed.
    const double c_eff = std::max(in.c, 1.0);
    GronwallBound b;
    b.u_bound = psi_propagate(in.modulus, in.delta, 1.0, c_eff, in.u0, t);
    b.uprime_bound =
        std::exp(in.c * t) * (in.delta + std::sqrt(2.0 * in.modulus.Phi(b.u_bound)));
    return b;
}

double ode_stability_bound(const OdeStabilityInput& in, const Modulus& modulus) {
    if (!(in.delta > 0)) throw InvalidInput("ode_stability_bound: delta must be positive");
    const double hypothesis =
        in.L * (in.x_gap + in.v_gap + in.E_gap) + in.F_gap;
    if (hypothesis > in.delta * (1.0 + 1e-12))
        throw PreconditionError(
            "ode_stability_bound: data gap exceeds delta; enlarge delta to at least " +
            std::to_string(hypothesis));
    const double P = psi_propagate(modulus, in.delta, in.L, in.L, in.x_gap, in.T);
    return in.v_gap + in.E_gap + P + in.T * modulus.phi(P);
}

std::vector<double> uniform_time_grid(double T, int points) {
    if (!(T > 0) || points < 2) throw InvalidInput("uniform_time_grid: bad parameters");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = T * i / (points - 1);
    return g;
}

StabilityCertificate lagrangian_w1_bound(double L, const Modulus& modulus, double w1_0,
                                         double F_gap, double T, std::vector<double> time_grid,
                                         double delta_floor) {
    if (!(w1_0 >= 0) || !(F_gap >= 0) || !(T > 0))
        throw InvalidInput("lagrangian_w1_bound: bad parameters");
    StabilityCertificate cert;
    cert.L_clamped = L < 1.0;
    L = std::max(L, 1.0);
    cert.L = L;
    cert.T = T;
    cert.dim = modulus.theta_backed() ? modulus.dim() : 0;
    cert.theta_desc = modulus.theta_backed() ? modulus.theta().describe() : "custom";
    cert.delta = std::max(2.0 * (2.0 * L * w1_0 + F_gap), delta_floor);
    cert.times = time_grid.empty() ? uniform_time_grid(T) : std::move(time_grid);

    double guess = -1;
    for (double t : cert.times) {
        double pb;
        try {
            pb = psi_propagate(modulus, cert.delta, 2.0 * L, L, w1_0, t, 1e3, guess);
        } catch (const RangeExceeded&) {
            std::ostringstream os;
            os << "lagrangian_w1_bound: position bound exceeds the bracket at t = " << t;
            throw RangeExceeded(os.str());
        }
        guess = pb;
        const double vb =
            std::exp(L * t) * (cert.delta + std::sqrt(4.0 * L * modulus.Phi(pb)));
        cert.position_bound.push_back(pb);
        cert.velocity_bound.push_back(vb);
        cert.w1_bound.push_back(pb + vb);
    }
    return cert;
}

double mollification_convergence_bound(double delta_mn, double L, double T,
                                       const Modulus& modulus) {
    if (!(delta_mn >= 0)) throw InvalidInput("mollification_convergence_bound: delta < 0");
    if (delta_mn == 0) return 0.0;
    const double P = psi_propagate(modulus, delta_mn, L, L, 0.0, T);
    return delta_mn + P + T * modulus.phi(P);
}

double mollification_convergence_bound_log(double log_delta, double L, double T,
                                           const Modulus& modulus) {
    const double P =
        modulus.psi_log_delta_inverse(log_delta, L, std::expm1(L * T));
    return std::exp(log_delta) + P + T * modulus.phi(P);
}

void StabilityCertificate::write_csv(std::ostream& os) const {
    os.precision(17);
    os << "# L=" << L << " delta=" << delta << " theta=" << theta_desc << " d=" << dim
       << " T=" << T << (L_clamped ? " L_clamped=1" : "") << "\n";
    os << "t,position_bound,velocity_bound,w1_bound\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i] << ',' << position_bound[i] << ',' << velocity_bound[i] << ','
           << w1_bound[i] << "\n";
    }
}

}  // namespace vpy
