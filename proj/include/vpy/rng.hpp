#pragma once

#include <cstdint>
#include <random>

#include "vpy/common.hpp"

namespace vpy {

// mt19937_64 with in-repo value transforms.  The standard pins the engine's
// output sequence exactly; the standard *distributions* are
// implementation-defined, so every transform we rely on for reproducible
// artifacts lives here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Marsaglia polar method; the pair order is fixed.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Uniform direction on S^{d-1}.
    Vec direction(int d) {
        Vec g;
        double n2;
        do {
            for (int k = 0; k < d; ++k) g[k] = gaussian();
            n2 = norm_sq(g);
        } while (n2 == 0.0);
        return g * (1.0 / std::sqrt(n2));
    }

    // Uniform in the ball of radius R.
    Vec in_ball(int d, double R) {
        const double r = R * std::pow(uniform(), 1.0 / d);
        return direction(d) * r;
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace vpy
