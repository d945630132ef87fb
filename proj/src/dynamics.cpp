#include "vpy/dynamics.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/quadrature.hpp"

namespace vpy {

Vec ForceLaw::operator()(double t, const Vec& x, const Vec& v) const {
    switch (kind) {
        case Kind::Classical: return v;
        case Kind::Relativistic: return v * (1.0 / std::sqrt(1.0 + norm_sq(v)));
        case Kind::Custom: return custom_fn(t, x, v);
    }
    throw Error("ForceLaw: unreachable");
}

ForceLaw ForceLaw::classical() {
    ForceLaw f;
    f.kind = Kind::Classical;
    f.lipschitz = 1.0;
    f.divergence_free_x = true;
    return f;
}

ForceLaw ForceLaw::relativistic() {
    ForceLaw f;
    f.kind = Kind::Relativistic;
    f.lipschitz = 1.0;
    f.divergence_free_x = true;
    return f;
}

ForceLaw ForceLaw::custom(double lipschitz,
                          std::function<Vec(double, const Vec&, const Vec&)> fn,
                          bool divergence_free_x) {
    if (!(lipschitz >= 0) || !fn) throw InvalidInput("ForceLaw::custom: bad parameters");
    ForceLaw f;
    f.kind = Kind::Custom;
    f.lipschitz = lipschitz;
    f.divergence_free_x = divergence_free_x;
    f.custom_fn = std::move(fn);
    return f;
}

void strang_step(const ForceLaw& force, const FieldFn& field, double t, double dt, Vec& x,
                 Vec& v) {
    v += field(t, x) * (0.5 * dt);
    if (force.kind == ForceLaw::Kind::Custom) {
        const double tm = t + 0.5 * dt;
        const Vec xm = x + force(tm, x, v) * (0.5 * dt);
        x += force(tm, xm, v) * dt;
    } else {
        // F does not depend on x: the drift is exact.
        x += force(t, x, v) * dt;
    }
    v += field(t + dt, x) * (0.5 * dt);
}

namespace {
int step_count(double T, double dt) {
    if (!(dt > 0) || !(T > 0)) throw InvalidInput("integrate: need T > 0 and dt > 0");
    const int n = static_cast<int>(std::lround(T / dt));
    return std::max(n, 1);
}
}  // namespace

Trajectory integrate(const ForceLaw& force, const FieldFn& field, const Vec& x0, const Vec& v0,
                     double T, double dt, int store_every) {
    const int n = step_count(T, dt);
    const double h = T / n;
    Trajectory traj;
    Vec x = x0, v = v0;
    traj.times.push_back(0.0);
    traj.positions.push_back(x);
    traj.velocities.push_back(v);
    for (int k = 0; k < n; ++k) {
        strang_step(force, field, k * h, h, x, v);
        if ((k + 1) % store_every == 0 || k + 1 == n) {
            traj.times.push_back((k + 1) * h);
            traj.positions.push_back(x);
            traj.velocities.push_back(v);
        }
    }
    return traj;
}

std::vector<std::size_t> flow_map(const ForceLaw& force, const FieldFn& field,
                                  std::vector<Vec>& xs, std::vector<Vec>& vs, double T,
                                  double dt) {
    if (xs.size() != vs.size()) throw InvalidInput("flow_map: state size mismatch");
    const int n = step_count(T, dt);
    const double h = T / n;
    std::vector<std::size_t> failed;
    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(xs.size()); ++i) {
        const std::size_t idx = static_cast<std::size_t>(i);
        try {
            Vec x = xs[idx], v = vs[idx];
            for (int k = 0; k < n; ++k) strang_step(force, field, k * h, h, x, v);
            xs[idx] = x;
            vs[idx] = v;
        } catch (const SingularityError&) {
#ifdef _OPENMP
#pragma omp critical
#endif
            failed.push_back(idx);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::sort(failed.begin(), failed.end());
    if (failed.size() * 1000 > xs.size())
        throw SingularityError("flow_map: " + std::to_string(failed.size()) +
                               " particles hit field singularities");
    return failed;
}

double measure_preservation_check(const ForceLaw& force, const FieldFn& field, int dim, double T,
                                  double dt, int samples_per_axis, double box_half,
                                  double fd_step) {
    if (!force.divergence_free_x)
        throw PreconditionError("measure_preservation_check: force is not divergence-free in x");
    const int n = 2 * dim;  // phase-space dimension
    const auto flow_to_T = [&](Vec x, Vec v) {
        const int steps = step_count(T, dt);
        const double h = T / steps;
        for (int k = 0; k < steps; ++k) strang_step(force, field, k * h, h, x, v);
        return std::pair<Vec, Vec>(x, v);
    };

    double worst = 0;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const int total = static_cast<int>(std::pow(samples_per_axis, n));
    for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        Vec x0, v0;
        for (int k = 0; k < n; ++k) {
            const int i = rem % samples_per_axis;
            rem /= samples_per_axis;
            const double coord =
                samples_per_axis == 1
                    ? 0.0
                    : -box_half + 2.0 * box_half * i / (samples_per_axis - 1);
            if (k < dim)
                x0[k] = coord;
            else
                v0[k - dim] = coord;
        }
        std::vector<double> J(static_cast<std::size_t>(n * n));
        for (int col = 0; col < n; ++col) {
            Vec xp = x0, vp = v0, xm = x0, vm = v0;
            if (col < dim) {
                xp[col] += fd_step;
                xm[col] -= fd_step;
            } else {
                vp[col - dim] += fd_step;
                vm[col - dim] -= fd_step;
            }
            const auto [Xp, Vp] = flow_to_T(xp, vp);
            const auto [Xm, Vm] = flow_to_T(xm, vm);
            for (int row = 0; row < n; ++row) {
                const double plus = row < dim ? Xp[row] : Vp[row - dim];
                const double minus = row < dim ? Xm[row] : Vm[row - dim];
                J[static_cast<std::size_t>(row * n + col)] = (plus - minus) / (2.0 * fd_step);
            }
        }
        worst = std::max(worst, std::abs(determinant(J, n) - 1.0));
    }
    return worst;
}

EnergyIdentityReport energy_identity_check(const Modulus& modulus, double eps0, double T,
                                           double dt) {
    if (!(eps0 > 0)) throw InvalidInput("energy_identity_check: eps0 must be positive");
    const FieldFn field = [&](double, const Vec& x) { return Vec(modulus.phi(x.c[0]), 0); };
    const ForceLaw force = ForceLaw::classical();
    const int n = step_count(T, dt);
    const double h = T / n;
    Vec x(eps0, 0), v(0, 0);
    const double Phi0 = modulus.Phi(eps0);
    EnergyIdentityReport rep;
    for (int k = 0; k < n; ++k) {
        strang_step(force, field, k * h, h, x, v);
        const double v2 = v.c[0] * v.c[0];
        const double res =
            std::abs(v2 - 2.0 * (modulus.Phi(x.c[0]) - Phi0)) / std::max(v2, 1e-12);
        rep.max_residual = std::max(rep.max_residual, res);
    }
    rep.final_position = x.c[0];
    rep.final_velocity = v.c[0];
    return rep;
}

}  // namespace vpy
