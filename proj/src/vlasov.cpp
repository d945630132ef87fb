#include "vpy/vlasov.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/quadrature.hpp"
#include "vpy/reduce.hpp"
#include "vpy/rng.hpp"

namespace vpy {

namespace {

// Cumulative radial mass table for theta(r) r^{d-1} on graded knots.
struct RadialCdf {
    std::vector<double> r, cdf;  // cdf[0] = mass below r[0]
    double total = 0;
};

RadialCdf build_radial_cdf(const RadialProfile& theta) {
    RadialCdf out;
    const double R = theta.support_radius;
    const int d = theta.dim;
    out.r.push_back(R * 1e-12);
    for (double b : geometric_breakpoints(R * 1e-12, R, 128)) {
        if (b > out.r.back()) out.r.push_back(b);
    }
    const Fn1 g = [&](double s) { return theta(s) * std::pow(s, d - 1); };
    out.cdf.resize(out.r.size());
    out.cdf[0] = gk15(g, 0.0, out.r[0]).value;
    for (std::size_t k = 1; k < out.r.size(); ++k)
        out.cdf[k] = out.cdf[k - 1] + gk15(g, out.r[k - 1], out.r[k]).value;
    out.total = out.cdf.back();
    return out;
}

bool radially_monotone(const RadialProfile& theta) {
    double prev = HUGE_VAL;
    for (double r = theta.support_radius * 1e-9; r <= theta.support_radius;
         r *= 1.7) {
        const double v = theta(r);
        if (v > prev * (1.0 + 1e-12)) return false;
        prev = v;
    }
    return true;
}

}  // namespace

ParticleEnsemble sample_initial_datum(const RadialProfile& theta, std::size_t N,
                                      std::uint64_t seed, double kappa) {
    if (N == 0) throw InvalidInput("sample_initial_datum: N must be positive");
    const int d = theta.dim;
    const RadialCdf cdf = build_radial_cdf(theta);
    if (!(cdf.total > 0)) throw InvalidInput("sample_initial_datum: theta vanishes");

    ParticleEnsemble ens;
    ens.dim = d;
    ens.kappa = kappa;
    ens.rng_seed = seed;
    ens.x.resize(N);
    ens.v.resize(N);
    ens.w.assign(N, 1.0 / static_cast<double>(N));
    Rng rng(seed);

    const bool monotone = radially_monotone(theta);
    std::vector<double> majorant;
    if (!monotone) {
        // Piecewise-constant dominating envelope of theta(r) r^{d-1}.
        majorant.resize(cdf.r.size(), 0.0);
        for (std::size_t k = 1; k < cdf.r.size(); ++k) {
            double m = 0;
            for (int s = 0; s <= 8; ++s) {
                const double rr = cdf.r[k - 1] + (cdf.r[k] - cdf.r[k - 1]) * s / 8.0;
                m = std::max(m, theta(rr) * std::pow(rr, d - 1));
            }
            majorant[k] = m * 1.25;
        }
    }

    const Fn1 pdf = [&](double s) { return theta(s) * std::pow(s, d - 1); };
    // Mass between a knot and an interior point, Simpson on the narrow cell.
    const auto cell_mass = [&](double r0, double rr) {
        return (rr - r0) / 6.0 * (pdf(r0) + 4.0 * pdf(0.5 * (r0 + rr)) + pdf(rr));
    };

    std::size_t accepted = 0, proposed = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double radius;
        if (monotone) {
            const double target = rng.uniform() * cdf.total;
            const auto it = std::lower_bound(cdf.cdf.begin(), cdf.cdf.end(), target);
            const std::size_t k = static_cast<std::size_t>(it - cdf.cdf.begin());
            if (k == 0) {
                radius = cdf.r[0] * (target / cdf.cdf[0]);
            } else {
                const double r0 = cdf.r[k - 1], r1 = cdf.r[k];
                const double excess = target - cdf.cdf[k - 1];
                radius = r0 + (excess / (cdf.cdf[k] - cdf.cdf[k - 1])) * (r1 - r0);
                // Newton refinement against the true in-cell mass; the linear
                // seed alone biases the in-cell law toward uniform.
                for (int it2 = 0; it2 < 3; ++it2) {
                    const double g = pdf(radius);
                    if (!(g > 0)) break;
                    radius -= (cell_mass(r0, radius) - excess) / g;
                    radius = std::clamp(radius, r0, r1);
                }
            }
        } else {
            // Rejection under the envelope, cell chosen by envelope mass.
            std::vector<double> env_mass(cdf.r.size(), 0.0);
            double env_total = 0;
            for (std::size_t k = 1; k < cdf.r.size(); ++k) {
                env_mass[k] = majorant[k] * (cdf.r[k] - cdf.r[k - 1]);
                env_total += env_mass[k];
            }
            while (true) {
                if (++proposed > 16 && accepted * 10000 < proposed)
                    throw SamplerFailure(
                        "sample_initial_datum: rejection acceptance below 1e-4; "
                        "supply a monotone profile or refine the majorant");
                double pick = rng.uniform() * env_total;
                std::size_t k = 1;
                while (k + 1 < cdf.r.size() && pick > env_mass[k]) {
                    pick -= env_mass[k];
                    ++k;
                }
                const double rr = cdf.r[k - 1] + rng.uniform() * (cdf.r[k] - cdf.r[k - 1]);
                if (rng.uniform() * majorant[k] <= theta(rr) * std::pow(rr, d - 1)) {
                    radius = rr;
                    ++accepted;
                    break;
                }
            }
        }
        ens.x[i] = rng.direction(d) * radius;
        ens.v[i] = rng.in_ball(d, std::pow(theta(radius), 1.0 / d));
    }
    ens.validate();
    return ens;
}

void refresh_field(SimulationState& state, const KernelSpec& spec) {
    state.field = field_at_points(spec, state.ens.x, state.ens.w, state.ens.x, true);
}

void step(SimulationState& state, const KernelSpec& spec, const ForceLaw& force, double dt,
          bool corrector) {
    if (!(dt > 0)) throw InvalidInput("step: dt must be positive");
    auto& ens = state.ens;
    const std::size_t N = ens.size();
    if (state.field.size() != N) refresh_field(state, spec);

    const double half = 0.5 * dt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        ens.v[k] += state.field[k] * half;
    }

    std::vector<Vec> sources = corrector ? std::vector<Vec>() : ens.x;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        ens.x[k] += force(state.t + half, ens.x[k], ens.v[k]) * dt;
    }

    state.field = corrector
                      ? field_at_points(spec, ens.x, ens.w, ens.x, true)
                      : field_at_points(spec, sources, ens.w, ens.x, true);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(N); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        ens.v[k] += state.field[k] * half;
    }
    state.t += dt;
}

double auto_box_half(const ParticleEnsemble& ens, double margin) {
    double m = 0;
    for (const auto& p : ens.x)
        for (int k = 0; k < ens.dim; ++k) m = std::max(m, std::abs(p[k]));
    return std::max(m * margin, 1e-6);
}

GridDensity estimate_density(const ParticleEnsemble& ens, int cells_per_axis, double box_half,
                             double* coverage) {
    GridDensity g;
    g.dim = ens.dim;
    g.cells_per_axis = cells_per_axis;
    g.box_half = box_half;
    g.values.assign(g.cell_count(), 0.0);
    const double h = g.cell_size();
    const int n = cells_per_axis;
    const int d = ens.dim;

    double deposited = 0;
    for (std::size_t p = 0; p < ens.size(); ++p) {
        int base[3] = {0, 0, 0};
        double frac[3] = {0, 0, 0};
        bool inside = true;
        for (int k = 0; k < d; ++k) {
            const double gk = (ens.x[p][k] + box_half) / h - 0.5;
            const double fl = std::floor(gk);
            base[k] = static_cast<int>(fl);
            frac[k] = gk - fl;
            if (base[k] < -1 || base[k] > n - 1) inside = false;
        }
        if (!inside) continue;
        const auto deposit = [&](int i, int j, int k, double m) {
            if (i < 0 || i >= n || j < 0 || j >= n) return;
            if (d == 3 && (k < 0 || k >= n)) return;
            const std::size_t idx = d == 3
                                        ? (static_cast<std::size_t>(i) * n + j) * n + k
                                        : static_cast<std::size_t>(i) * n + j;
            g.values[idx] += m;
            deposited += m;
        };
        const double w = ens.w[p];
        if (d == 2) {
            deposit(base[0], base[1], 0, w * (1 - frac[0]) * (1 - frac[1]));
            deposit(base[0] + 1, base[1], 0, w * frac[0] * (1 - frac[1]));
            deposit(base[0], base[1] + 1, 0, w * (1 - frac[0]) * frac[1]);
            deposit(base[0] + 1, base[1] + 1, 0, w * frac[0] * frac[1]);
        } else {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c) {
                        const double m = w * (a ? frac[0] : 1 - frac[0]) *
                                         (b ? frac[1] : 1 - frac[1]) *
                                         (c ? frac[2] : 1 - frac[2]);
                        deposit(base[0] + a, base[1] + b, base[2] + c, m);
                    }
        }
    }
    const double cov = deposited;  // total weight is 1
    if (coverage) *coverage = cov;
    if (cov < 0.99)
        throw InvalidInput("estimate_density: box covers less than 99% of the mass");
    const double cell_vol = std::pow(h, d);
    for (auto& v : g.values) v /= cell_vol;
    return g;
}

DiagnosticsRecord diagnostics(const SimulationState& state, const GrowthFunction& theta_growth,
                              const std::vector<double>& p_set, int grid_cells,
                              double box_half) {
    const auto& ens = state.ens;
    DiagnosticsRecord rec;
    rec.t = state.t;
    rec.mass = ens.total_weight();
    rec.first_moment = ens.first_moment();
    rec.min_weight = *std::min_element(ens.w.begin(), ens.w.end());
    rec.kinetic_energy = deterministic_sum(ens.size(), [&](std::size_t i) {
        return 0.5 * ens.w[i] * norm_sq(ens.v[i]);
    });
    for (int k = 0; k < ens.dim; ++k)
        rec.momentum[k] = deterministic_sum(ens.size(), [&](std::size_t i) {
            return ens.w[i] * ens.v[i][k];
        });
    rec.p_set = p_set;
    for (double p : p_set)
        rec.velocity_moments.push_back(deterministic_sum(ens.size(), [&](std::size_t i) {
            return ens.w[i] * std::pow(norm(ens.v[i]), p);
        }));
    const GridDensity rho = estimate_density(ens, grid_cells, box_half, &rec.coverage);
    rec.yudovich_ratio = 0;
    for (double p : p_set) {
        rec.rho_lp.push_back(rho.lp_norm(p));
        rec.rho_lp_ul.push_back(lp_ul_norm(rho, p));
        rec.yudovich_ratio =
            std::max(rec.yudovich_ratio, rec.rho_lp_ul.back() / theta_growth(p));
    }
    return rec;
}

namespace {
double bump(double s) {
    const double s2 = s * s;
    return s2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0;
}
// b'(s)/s, smooth through s = 0.
double bump_slope_over_s(double s) {
    const double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    const double q = 1.0 - s2;
    return -2.0 * bump(s) / (q * q);
}
}  // namespace

double TestFunction::value(double t, const Vec& x, const Vec& v) const {
    const double s = t / T;
    const double chi = 1.0 - 3.0 * s * s + 2.0 * s * s * s;
    return chi * bump(norm(x - x0) / rx) * bump(norm(v - v0) / rv);
}

double TestFunction::dt(double t, const Vec& x, const Vec& v) const {
    const double s = t / T;
    const double dchi = 6.0 * (s * s - s) / T;
    return dchi * bump(norm(x - x0) / rx) * bump(norm(v - v0) / rv);
}

Vec TestFunction::grad_x(double t, const Vec& x, const Vec& v) const {
    const double s = t / T;
    const double chi = 1.0 - 3.0 * s * s + 2.0 * s * s * s;
    const double sx = norm(x - x0) / rx;
    return (x - x0) * (chi * bump_slope_over_s(sx) / (rx * rx) * bump(norm(v - v0) / rv));
}

Vec TestFunction::grad_v(double t, const Vec& x, const Vec& v) const {
    const double s = t / T;
    const double chi = 1.0 - 3.0 * s * s + 2.0 * s * s * s;
    const double sv = norm(v - v0) / rv;
    return (v - v0) * (chi * bump_slope_over_s(sv) / (rv * rv) * bump(norm(x - x0) / rx));
}

WeakFormAccumulator::WeakFormAccumulator(std::vector<TestFunction> tests, const ForceLaw& force,
                                         double box_half)
    : tests_(std::move(tests)), force_(force) {
    if (box_half > 0) {
        for (const auto& psi : tests_) {
            double reach = psi.rx;
            for (int k = 0; k < 3; ++k) reach = std::max(reach, std::abs(psi.x0[k]) + psi.rx);
            if (reach > box_half)
                throw InvalidInput(
                    "WeakFormAccumulator: test-function support exceeds the recorded box");
        }
    }
    pairings_.resize(tests_.size());
    initial_term_.resize(tests_.size(), 0.0);
}

void WeakFormAccumulator::add_state(const SimulationState& state) {
    const auto& ens = state.ens;
    if (state.field.size() != ens.size())
        throw InvalidInput("WeakFormAccumulator: state lacks a field snapshot");
    const bool first = times_.empty();
    times_.push_back(state.t);
    for (std::size_t q = 0; q < tests_.size(); ++q) {
        const auto& psi = tests_[q];
        const double pairing = deterministic_sum(ens.size(), [&](std::size_t i) {
            const double dt_term = psi.dt(state.t, ens.x[i], ens.v[i]);
            const Vec gx = psi.grad_x(state.t, ens.x[i], ens.v[i]);
            const Vec gv = psi.grad_v(state.t, ens.x[i], ens.v[i]);
            const Vec F = force_(state.t, ens.x[i], ens.v[i]);
            return ens.w[i] * (dt_term + dot(F, gx) + dot(state.field[i], gv));
        });
        pairings_[q].push_back(pairing);
        if (first)
            initial_term_[q] = deterministic_sum(ens.size(), [&](std::size_t i) {
                return ens.w[i] * psi.value(0.0, ens.x[i], ens.v[i]);
            });
    }
}

std::vector<double> WeakFormAccumulator::residuals() const {
    const std::size_t n = times_.size();
    if (n < 4) throw InvalidInput("WeakFormAccumulator: too few samples");
    const double h = (times_.back() - times_.front()) / static_cast<double>(n - 1);
    std::vector<double> out;
    for (std::size_t q = 0; q < tests_.size(); ++q) {
        const auto& f = pairings_[q];
        const std::size_t intervals = n - 1;
        double integral = 0;
        std::size_t start = 0;
        if (intervals % 2 == 1) {
            // 3/8 rule on the first three intervals keeps cubic exactness.
            integral += 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
            start = 3;
        }
        for (std::size_t k = start; k + 2 <= n - 1; k += 2)
            integral += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        out.push_back(std::abs(integral + initial_term_[q]));
    }
    return out;
}

}  // namespace vpy
