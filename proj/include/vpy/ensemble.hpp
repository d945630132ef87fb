#pragma once

#include <cstdint>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/reduce.hpp"

namespace vpy {

// Weighted particles (x_i, v_i, w_i) in phase space R^{2d} representing a
// probability measure.
struct ParticleEnsemble {
    int dim = 2;
    double kappa = 1.0;
    std::uint64_t rng_seed = 0;
    std::vector<Vec> x, v;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    double total_weight() const { return deterministic_sum(w.data(), w.size()); }

    double first_moment() const {
        return deterministic_sum(size(), [this](std::size_t i) {
            return w[i] * (norm(x[i]) + norm(v[i]));
        });
    }

    void validate() const {
        if (dim < 2 || dim > 3) throw InvalidInput("ParticleEnsemble: dim must be 2 or 3");
        if (x.size() != v.size() || x.size() != w.size())
            throw InvalidInput("ParticleEnsemble: array size mismatch");
        for (double wi : w)
            if (!(wi > 0)) throw InvalidInput("ParticleEnsemble: weights must be positive");
        if (std::abs(total_weight() - 1.0) > 1e-12)
            throw InvalidInput("ParticleEnsemble: weights must sum to 1");
        for (std::size_t i = 0; i < size(); ++i)
            if (!is_finite(x[i]) || !is_finite(v[i]))
                throw InvalidInput("ParticleEnsemble: non-finite state");
    }
};

// Snapshots of an evolving ensemble on a time grid.
struct EnsembleTrajectory {
    std::vector<double> times;
    std::vector<ParticleEnsemble> states;
};

// Euclidean phase-space distance |p - q| on R^{2d}.
inline double phase_distance(const ParticleEnsemble& a, std::size_t i,
                             const ParticleEnsemble& b, std::size_t j) {
    return std::sqrt(norm_sq(a.x[i] - b.x[j]) + norm_sq(a.v[i] - b.v[j]));
}

}  // namespace vpy
