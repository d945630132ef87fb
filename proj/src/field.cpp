#include "vpy/field.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/quadrature.hpp"
#include "vpy/reduce.hpp"
#include "vpy/rng.hpp"

namespace vpy {

Vec eval_kernel(const KernelSpec& spec, const Vec& z) {
    const double r2 = norm_sq(z);
    if (r2 == 0.0) {
        if (spec.regularization > 0) return Vec();
        throw SingularityError("eval_kernel: z = 0 with zero regularization");
    }
    if (spec.dim == 2) {
        const double q2 = std::max(r2, spec.regularization * spec.regularization);
        return z * (1.0 / q2);
    }
    const double q = std::max(std::sqrt(r2), spec.regularization);
    return z * (1.0 / (q * q * q));
}

double default_regularization(int dim, std::size_t n_particles) {
    if (n_particles == 0) throw InvalidInput("default_regularization: empty ensemble");
    return 0.3 * std::pow(static_cast<double>(n_particles), -1.0 / dim);
}

namespace {

// One target against all sources: fixed blocks, four interleaved lanes per
// component, pairwise fold of block partials.  The reduction shape depends
// only on the source count and the skipped index (skipped terms add nothing),
// never on threads.
template <int D, bool kSelf>
Vec target_sum(std::span<const Vec> src, std::span<const double> w, const Vec& x, double reg,
               std::ptrdiff_t self) {
    const std::size_t n = src.size();
    const double reg2 = reg * reg;
    std::vector<Vec> partials;
    partials.reserve((n + kReduceBlock - 1) / kReduceBlock);
    for (std::size_t lo = 0; lo < n; lo += kReduceBlock) {
        const std::size_t hi = std::min(lo + kReduceBlock, n);
        double a0[3] = {0, 0, 0}, a1[3] = {0, 0, 0}, a2[3] = {0, 0, 0}, a3[3] = {0, 0, 0};
        int lane = 0;
        for (std::size_t j = lo; j < hi; ++j) {
            if (kSelf && static_cast<std::ptrdiff_t>(j) == self) continue;
            const double dx = x.c[0] - src[j].c[0];
            const double dy = x.c[1] - src[j].c[1];
            const double dz = D == 3 ? x.c[2] - src[j].c[2] : 0.0;
            const double r2 = D == 3 ? dx * dx + dy * dy + dz * dz : dx * dx + dy * dy;
            double f;
            if (r2 == 0.0) {
                if (reg == 0.0)
                    throw SingularityError("field: target coincides with a distinct source");
                continue;  // numerator vanishes
            }
            if (D == 2) {
                f = w[j] / std::max(r2, reg2);
            } else {
                const double q = std::max(std::sqrt(r2), reg);
                f = w[j] / (q * q * q);
            }
            double* acc = lane == 0 ? a0 : lane == 1 ? a1 : lane == 2 ? a2 : a3;
            acc[0] += f * dx;
            acc[1] += f * dy;
            if (D == 3) acc[2] += f * dz;
            lane = (lane + 1) & 3;
        }
        Vec p;
        for (int c = 0; c < D; ++c) p[c] = (a0[c] + a1[c]) + (a2[c] + a3[c]);
        partials.push_back(p);
    }
    if (partials.empty()) return Vec();
    // Pairwise fold, per component.
    const auto fold = [&](auto&& fold_ref, std::size_t lo, std::size_t cnt) -> Vec {
        if (cnt == 1) return partials[lo];
        if (cnt == 2) return partials[lo] + partials[lo + 1];
        const std::size_t half = cnt / 2;
        return fold_ref(fold_ref, lo, half) + fold_ref(fold_ref, lo + half, cnt - half);
    };
    return fold(fold, 0, partials.size());
}

template <int D>
void field_loop(const KernelSpec& spec, std::span<const Vec> src, std::span<const double> w,
                std::span<const Vec> targets, bool self_indexed, bool parallel,
                std::vector<Vec>& out) {
    const double reg = spec.regularization;
    const double kappa = spec.kappa;
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(targets.size());
    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                kappa *
                (self_indexed
                     ? target_sum<D, true>(src, w, targets[static_cast<std::size_t>(i)], reg, i)
                     : target_sum<D, false>(src, w, targets[static_cast<std::size_t>(i)], reg,
                                            -1));
        } catch (const SingularityError& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure)
                failure = std::make_exception_ptr(
                    SingularityError(std::string(e.what()) + " (target " + std::to_string(i) + ")"));
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
#ifndef _OPENMP
    (void)parallel;
#endif
}

std::vector<Vec> field_impl(const KernelSpec& spec, std::span<const Vec> src,
                            std::span<const double> w, std::span<const Vec> targets,
                            bool self_indexed, bool parallel) {
    if (src.size() != w.size()) throw InvalidInput("field: sources/weights size mismatch");
    if (self_indexed && targets.size() != src.size())
        throw InvalidInput("field: self-indexed targets must match the sources");
    std::vector<Vec> out(targets.size());
    if (spec.dim == 2)
        field_loop<2>(spec, src, w, targets, self_indexed, parallel, out);
    else if (spec.dim == 3)
        field_loop<3>(spec, src, w, targets, self_indexed, parallel, out);
    else
        throw InvalidInput("field: dim must be 2 or 3");
    return out;
}

}  // namespace

std::vector<Vec> field_at_points(const KernelSpec& spec, std::span<const Vec> sources,
                                 std::span<const double> weights, std::span<const Vec> targets,
                                 bool self_indexed) {
    return field_impl(spec, sources, weights, targets, self_indexed, true);
}

std::vector<Vec> field_at_points_serial(const KernelSpec& spec, std::span<const Vec> sources,
                                        std::span<const double> weights,
                                        std::span<const Vec> targets, bool self_indexed) {
    return field_impl(spec, sources, weights, targets, self_indexed, false);
}

Vec field_uniform_ball(const KernelSpec& spec, double R, double total_mass, const Vec& x) {
    if (!(R > 0)) throw InvalidInput("field_uniform_ball: R must be positive");
    const double r = norm(x);
    const int d = spec.dim;
    if (r == 0.0) return Vec();
    const double denom = r <= R ? std::pow(R, d) : std::pow(r, d);
    return x * (spec.kappa * total_mass / denom);
}

double radial_field_magnitude(const KernelSpec& spec, const RadialProfile& rho, double r) {
    if (!(r > 0)) return 0.0;
    const int d = spec.dim;
    const double top = std::min(r, rho.support_radius);
    std::vector<double> breaks{0.0};
    for (double b : geometric_breakpoints(top * 1e-12, top, 4)) breaks.push_back(b);
    const double mass = unit_sphere_area(d) *
                        integrate_panels([&](double s) { return rho(s) * std::pow(s, d - 1); },
                                         breaks);
    return mass / std::pow(r, d - 1);
}

double sup_radial_field(const KernelSpec& spec, const RadialProfile& rho) {
    // For rho >= 0 the magnitude M_enc(r)/r^{d-1} peaks on (0, support]; grid
    // sup over one cumulative-mass sweep, support endpoint included.
    const int d = spec.dim;
    const double R = rho.support_radius;
    std::vector<double> breaks{0.0};
    for (double b : geometric_breakpoints(R * 1e-9, R, 16)) breaks.push_back(b);
    double best = 0, mass = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        mass += gk15([&](double s) { return rho(s) * std::pow(s, d - 1); }, breaks[i],
                     breaks[i + 1])
                    .value;
        const double r = breaks[i + 1];
        best = std::max(best, mass / std::pow(r, d - 1));
    }
    return unit_sphere_area(d) * best;
}

OscillationReport oscillation_bound_check(const KernelSpec& spec, std::size_t trials,
                                          std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("oscillation_bound_check: trials must be >= 1");
    Rng rng(seed);
    const int d = spec.dim;
    const KernelSpec exact{d, 1.0, 0.0};
    OscillationReport rep;
    rep.trials = trials;
    auto box_point = [&]() {
        Vec v;
        for (int k = 0; k < d; ++k) v[k] = rng.uniform(-1.0, 1.0);
        return v;
    };
    for (std::size_t t = 0; t < trials; ++t) {
        Vec x, y, z;
        switch (t % 3) {
            case 0:
                x = box_point();
                y = box_point();
                z = box_point();
                break;
            case 1: {
                // Scale-separated: |x-z| << |y-z|.
                z = box_point();
                const double sx = std::pow(10.0, rng.uniform(-12.0, 0.0));
                const double sy = std::pow(10.0, rng.uniform(-3.0, 0.0));
                x = z + rng.direction(d) * sx;
                y = z + rng.direction(d) * sy;
                break;
            }
            default: {
                // Near-coincident pair far from z.
                z = box_point();
                x = box_point();
                y = x + rng.direction(d) * std::pow(10.0, rng.uniform(-12.0, -1.0));
                break;
            }
        }
        const double axz = norm(x - z), ayz = norm(y - z), axy = norm(x - y);
        if (axz == 0 || ayz == 0 || axy == 0) continue;
        const double num = norm(eval_kernel(exact, x - z) - eval_kernel(exact, y - z));
        const double denom = (1.0 / (axz * std::pow(ayz, d - 1)) +
                              1.0 / (ayz * std::pow(axz, d - 1))) *
                             axy;
        const double ratio = num / denom;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst_x = x;
            rep.worst_y = y;
            rep.worst_z = z;
        }
    }
    return rep;
}

std::vector<std::pair<Vec, Vec>> morrey_pair_sample(const KernelSpec& spec,
                                                    const RadialProfile& rho, int count,
                                                    std::uint64_t seed, double min_sep,
                                                    double max_sep) {
    Rng rng(seed);
    const int d = spec.dim;
    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    const double lo = 0.1 * rho.support_radius, hi = 0.8 * rho.support_radius;
    for (int i = 0; i < count; ++i) {
        const double sep = std::exp(rng.uniform(std::log(min_sep), std::log(max_sep)));
        const double base = rng.uniform(lo, hi);
        if (d == 2) {
            const Vec dir = rng.direction(2);
            const Vec x = rng.direction(2) * base;
            pairs.emplace_back(x, x + dir * sep);
        } else {
            // Collinear with the origin: the integral is axisymmetric.
            const Vec x(0, 0, base);
            pairs.emplace_back(x, Vec(0, 0, base + sep));
        }
    }
    return pairs;
}

namespace {

// Angular breakpoints on [0, pi]: a uniform base plus geometric ladders
// toward the kernel spike at alpha = 0 and, optionally, toward a second
// integrable singularity at alpha_sing.
std::vector<double> angular_breaks(double spike_depth, double sing_angle, bool refine_sing) {
    std::vector<double> b{0.0};
    const int k_spike = std::clamp(static_cast<int>(std::ceil(-std::log2(spike_depth / M_PI))) + 6,
                                   10, 52);
    for (int k = k_spike; k >= 1; --k) b.push_back(M_PI * std::pow(2.0, -k));
    for (int i = 1; i <= 10; ++i) b.push_back(M_PI * 0.5 * i / 10.0 + M_PI * 0.5);
    for (int i = 1; i < 10; ++i) b.push_back(M_PI * 0.5 * i / 10.0);
    if (refine_sing && sing_angle > 0 && sing_angle < M_PI) {
        for (int k = 1; k <= 16; ++k) {
            const double off = M_PI * std::pow(2.0, -k - 2);
            if (sing_angle - off > 0) b.push_back(sing_angle - off);
            if (sing_angle + off < M_PI) b.push_back(sing_angle + off);
        }
        b.push_back(sing_angle);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

}  // namespace

MorreyReport morrey_continuity_check(const KernelSpec& spec, const RadialProfile& rho,
                                     const Modulus& modulus,
                                     const std::vector<std::pair<Vec, Vec>>& pairs,
                                     int radial_per_octave) {
    const int d = spec.dim;
    const KernelSpec exact{d, 1.0, 0.0};
    MorreyReport rep;
    rep.radial_per_octave = radial_per_octave;
    rep.pairs.resize(pairs.size());
    rep.sup_field = sup_radial_field(spec, rho);

    std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(pairs.size()); ++pi) {
      try {
        const Vec x = pairs[static_cast<std::size_t>(pi)].first;
        const Vec y = pairs[static_cast<std::size_t>(pi)].second;
        const Vec e = y - x;
        const double eps = norm(e);
        const double xr = norm(x);
        const Vec ehat = e * (1.0 / eps);
        // Unit normal to ehat; for an axis-aligned ehat fall back to e1.
        Vec n1(-ehat.c[1], ehat.c[0]);
        const double n1n = norm(n1);
        n1 = n1n > 1e-12 ? n1 * (1.0 / n1n) : Vec(1, 0, 0);
        // Integrand in w = z - x, polar around w = 0:
        //   |K(w) - K(w - e)| rho(|x + w|).
        const auto F = [&](const Vec& w) {
            const Vec z = x + w;
            const double zr = norm(z);
            if (zr > rho.support_radius) return 0.0;
            const double rv = rho(zr);
            if (rv == 0.0) return 0.0;
            // Quadrature nodes can land on the singular points to the last
            // bit when r cos(alpha) crosses eps within half an ulp; the
            // singularity is integrable, so a measure-zero node contributes
            // nothing.
            if (norm_sq(w) == 0.0 || norm_sq(w - e) == 0.0) return 0.0;
            return norm(eval_kernel(exact, w) - eval_kernel(exact, w - e)) * rv;
        };
        // Angle of the rho singularity (z = 0 <=> w = -x) from ehat.
        const double cos_sing = std::clamp(dot(Vec() - x, ehat) / std::max(xr, 1e-300), -1.0, 1.0);
        const double sing_angle = std::acos(cos_sing);

        const double r_max = xr + rho.support_radius + eps;
        const Fn1 ring = [&](double r) {
            const double spike = std::max(std::abs(r - eps), eps * 1e-13) / std::max(r, eps);
            const bool near_kernel = r > 0.2 * eps && r < 5.0 * eps;
            const bool near_origin = xr > 0 && r > 0.2 * xr && r < 5.0 * xr;
            const auto breaks =
                angular_breaks(near_kernel ? spike : 0.5, sing_angle, near_origin);
            double ang = 0;
            if (d == 2) {
                const Fn1 f_pos = [&](double a) {
                    return F(ehat * (r * std::cos(a)) + n1 * (r * std::sin(a)));
                };
                const Fn1 f_neg = [&](double a) {
                    return F(ehat * (r * std::cos(a)) - n1 * (r * std::sin(a)));
                };
                for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
                    ang += gk15(f_pos, breaks[i], breaks[i + 1]).value;
                    ang += gk15(f_neg, breaks[i], breaks[i + 1]).value;
                }
                return r * ang;
            }
            // d = 3, axisymmetric around ehat (pairs are collinear with 0).
            const Fn1 f = [&](double a) {
                return std::sin(a) * F(ehat * (r * std::cos(a)) + n1 * (r * std::sin(a)));
            };
            for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
                ang += gk15(f, breaks[i], breaks[i + 1]).value;
            return 2.0 * M_PI * r * r * ang;
        };

        // Radial panels: geometric ladder plus graded refinement toward the
        // two singular rings r = eps and r = |x|.
        std::vector<double> rb{0.0};
        const double r_lo = eps * std::pow(2.0, -10);
        for (double b : geometric_breakpoints(r_lo, r_max, radial_per_octave)) rb.push_back(b);
        for (int k = 1; k <= 20; ++k) {
            const double off = eps * std::pow(2.0, -k);
            rb.push_back(eps - off);
            rb.push_back(eps + off);
            if (xr > 0 && k <= 14) {
                rb.push_back(xr * (1.0 - std::pow(2.0, -k)));
                rb.push_back(xr * (1.0 + std::pow(2.0, -k)));
            }
        }
        rb.push_back(eps);
        std::sort(rb.begin(), rb.end());
        rb.erase(std::unique(rb.begin(), rb.end()), rb.end());
        while (rb.size() > 1 && rb.back() > r_max) rb.pop_back();

        double integral = 0;
        for (std::size_t i = 0; i + 1 < rb.size(); ++i)
            integral += gk15(ring, rb[i], rb[i + 1]).value;

        auto& out = rep.pairs[static_cast<std::size_t>(pi)];
        out.x = x;
        out.y = y;
        out.separation = eps;
        out.integral = integral;
        out.ratio = integral / modulus.phi(eps);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
          if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& pr : rep.pairs) rep.sup_ratio = std::max(rep.sup_ratio, pr.ratio);
    return rep;
}

}  // namespace vpy
