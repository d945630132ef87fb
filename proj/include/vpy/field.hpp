#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/growth.hpp"
#include "vpy/yudovich.hpp"

namespace vpy {

struct KernelSpec {
    int dim = 3;
    double kappa = 1.0;               // +1 repulsive, -1 attractive
    double regularization = 0.0;       // 0 = exact kernel
};

// K(z) = z / max(|z|, regularization)^d.  Throws SingularityError at z = 0
// with zero regularization.
Vec eval_kernel(const KernelSpec& spec, const Vec& z);

// Default blob cutoff for N-particle simulations: 0.3 N^{-1/d}.
double default_regularization(int dim, std::size_t n_particles);

// E(x) = kappa sum_j w_j K(x - s_j) at every target.  When self_indexed is
// set, targets[i] corresponds to sources[i] and the i = j term is skipped.
// Each target uses the fixed blocked-pairwise reduction; the OpenMP driver
// parallelizes over targets only, so results are bit-identical to the serial
// reference at any thread count.
std::vector<Vec> field_at_points(const KernelSpec& spec, std::span<const Vec> sources,
                                 std::span<const double> weights, std::span<const Vec> targets,
                                 bool self_indexed = false);
std::vector<Vec> field_at_points_serial(const KernelSpec& spec, std::span<const Vec> sources,
                                        std::span<const double> weights,
                                        std::span<const Vec> targets, bool self_indexed = false);

// Closed-form field of the uniform ball of given total mass: kappa m x / R^d
// inside, kappa m x / |x|^d outside.
Vec field_uniform_ball(const KernelSpec& spec, double R, double total_mass, const Vec& x);

// |K * rho|(r) for a radial density: kappa-free magnitude M_enc(r) / r^{d-1}.
double radial_field_magnitude(const KernelSpec& spec, const RadialProfile& rho, double r);
double sup_radial_field(const KernelSpec& spec, const RadialProfile& rho);

struct OscillationReport {
    double max_ratio = 0;
    std::size_t trials = 0;
    Vec worst_x, worst_y, worst_z;
};

// Empirical constant of the kernel oscillation inequality
//   |K(x-z) - K(y-z)| <= C (1/(|x-z| |y-z|^{d-1}) + 1/(|y-z| |x-z|^{d-1})) |x-y|
// over random triples, including stressed scale-separated ones.
OscillationReport oscillation_bound_check(const KernelSpec& spec, std::size_t trials,
                                          std::uint64_t seed);

struct MorreyPairResult {
    Vec x, y;
    double separation = 0;
    double integral = 0;  // int |K(x-z) - K(y-z)| rho(z) dz
    double ratio = 0;     // integral / phi(|x-y|)
};

struct MorreyReport {
    std::vector<MorreyPairResult> pairs;
    double sup_ratio = 0;
    double sup_field = 0;  // sup_x |K * rho|
    int radial_per_octave = 0;
};

// Pairs (x, y) for the continuity check: base points in the bulk of the
// support, separations on a log ladder down to min_sep.  d = 3 pairs are kept
// collinear with the origin so the integral reduces to an axisymmetric one.
std::vector<std::pair<Vec, Vec>> morrey_pair_sample(const KernelSpec& spec,
                                                    const RadialProfile& rho, int count,
                                                    std::uint64_t seed, double min_sep = 1e-8,
                                                    double max_sep = 1e-2);

MorreyReport morrey_continuity_check(const KernelSpec& spec, const RadialProfile& rho,
                                     const Modulus& modulus,
                                     const std::vector<std::pair<Vec, Vec>>& pairs,
                                     int radial_per_octave = 2);

}  // namespace vpy
