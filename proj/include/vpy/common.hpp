#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vpy {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy shared by all modules.  The CLI maps these onto exit codes:
// InvalidInput -> 2, numeric/domain/range/sampler/singularity failures -> 3,
// PropertyViolation -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidInput : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct RangeExceeded : Error {
    using Error::Error;
};
struct SingularityError : Error {
    using Error::Error;
};
struct SamplerFailure : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};
struct PropertyViolation : Error {
    using Error::Error;
};
struct NumericFailure : Error {
    NumericFailure(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    double achieved_error = 0;
};

// Point in R^d for d <= 3.  Unused components stay exactly 0 so that norms and
// arithmetic are dimension-agnostic.
struct Vec {
    std::array<double, 3> c{0, 0, 0};

    Vec() = default;
    Vec(double x, double y) : c{x, y, 0} {}
    Vec(double x, double y, double z) : c{x, y, z} {}

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        c[0] += o.c[0];
        c[1] += o.c[1];
        c[2] += o.c[2];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        c[0] -= o.c[0];
        c[1] -= o.c[1];
        c[2] -= o.c[2];
        return *this;
    }
    Vec& operator*=(double s) {
        c[0] *= s;
        c[1] *= s;
        c[2] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator-(Vec a) {
        a.c[0] = -a.c[0];
        a.c[1] = -a.c[1];
        a.c[2] = -a.c[2];
        return a;
    }
    friend bool operator==(const Vec& a, const Vec& b) { return a.c == b.c; }
};

inline double dot(const Vec& a, const Vec& b) {
    return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2];
}
inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline bool is_finite(const Vec& a) {
    return std::isfinite(a.c[0]) && std::isfinite(a.c[1]) && std::isfinite(a.c[2]);
}

// Volume of the unit ball and surface measure of the unit sphere.
inline double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw InvalidInput("unit_ball_volume: dim must be 1, 2 or 3");
    }
}
inline double unit_sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        default: throw InvalidInput("unit_sphere_area: dim must be 1, 2 or 3");
    }
}

}  // namespace vpy
