#pragma once

#include <functional>
#include <vector>

#include "vpy/common.hpp"

namespace vpy {

using Fn1 = std::function<double(double)>;

struct PanelResult {
    double value = 0;
    double error = 0;
};

// 15-point Gauss-Kronrod rule on [a, b]; error estimate from the embedded
// 7-point Gauss rule.
PanelResult gk15(const Fn1& f, double a, double b);

// Globally adaptive GK15.  Throws NumericFailure (carrying the achieved error
// estimate) if the tolerance is not reached within max_panels.
double integrate_adaptive(const Fn1& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0.0, int max_panels = 4000);

// Non-adaptive sum of GK15 panels over consecutive breakpoints.
double integrate_panels(const Fn1& f, const std::vector<double>& breaks);

// Breakpoints {a, a*ratio^1, ..., b} geometric in magnitude (a > 0).
std::vector<double> geometric_breakpoints(double a, double b, int per_octave);

// log of the integral of exp(g(u)) du over GK15 panels; log-sum-exp over all
// nodes, safe for exponents spanning thousands.
double log_integrate_panels(const Fn1& g, const std::vector<double>& breaks);

// Monotone piecewise-cubic interpolation table.  With exact slopes it is a
// plain Hermite interpolant; otherwise Fritsch-Carlson slopes keep it
// shape-preserving.
class CubicTable {
  public:
    CubicTable() = default;
    CubicTable(std::vector<double> x, std::vector<double> y);                          // PCHIP
    CubicTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy);  // exact slopes

    double operator()(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

  private:
    std::vector<double> x_, y_, d_;
};

// Regularized upper incomplete gamma Q(a, x); chi-square tail p-values are
// Q(dof/2, chi2/2).
double gamma_q(double a, double x);

// Dense solve / determinant for systems of order <= 8 (Gaussian elimination
// with partial pivoting).  A is row-major n*n and is clobbered.
std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b);
double determinant(std::vector<double> A, int n);

}  // namespace vpy
