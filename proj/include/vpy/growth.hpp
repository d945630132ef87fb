#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vpy/common.hpp"
#include "vpy/quadrature.hpp"

namespace vpy {

// log_m: identity for m = 0, |log| followed by m-1 plain logs for m >= 1.
// Throws DomainError when an intermediate log is not defined.
double iterated_log(int m, double r);

// exp_m(1): 1, e, e^e, e^(e^e).  Not representable beyond m = 3.
double iterated_exp_one(int m);

enum class GrowthKind { Constant, Power, IteratedLog, Tabulated };

// Positive non-decreasing growth function p -> Theta(p).
class GrowthFunction {
  public:
    static GrowthFunction constant(double value);
    // p^(1/alpha) for p >= 1, held at 1 below (keeps the function positive and
    // non-decreasing on all of [0, inf)).
    static GrowthFunction power(double alpha);
    // Theta_m: p * log_1(p)^2 ... log_m(p)^2 above exp_m(1), constant below.
    static GrowthFunction iterated_log(int m);
    // Linear interpolation of (p, value) knots, constant extension both sides.
    static GrowthFunction tabulated(std::vector<std::pair<double, double>> knots);

    double operator()(double p) const;

    GrowthKind kind() const { return kind_; }
    int log_depth() const { return m_; }
    double parameter() const { return param_; }
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    std::string describe() const;

  private:
    GrowthFunction() = default;
    GrowthKind kind_ = GrowthKind::Constant;
    double param_ = 1;
    int m_ = 0;
    std::vector<std::pair<double, double>> knots_;
};

struct OsgoodReport {
    enum class Verdict { Diverges, Converges, Inconclusive };
    Verdict verdict = Verdict::Inconclusive;
    // (eps, integral from eps to r0 of dr/sqrt(Phi)); non-decreasing as eps
    // shrinks.
    std::vector<std::pair<double, double>> samples;
    double slope_estimate = 0;  // d log I / d log log(1/eps) over the tail
    // Least-squares exponents of the integrand model
    //   1/sqrt(Phi(e^-u)) * e^-u  ~  C u^-s (log u)^-q (loglog u)^-r,
    // for which the integral diverges iff (s,q,r) <= (1,1,1) lexicographically.
    double fit_s = 0, fit_q = 0, fit_r = 0;
    double tol_s = 0, tol_q = 0, tol_r = 0;  // decision bands, echoed for tests
    std::string describe() const;
};

// The modulus pair (phi, Phi) with the Psi_{delta,c} machinery.
//
// The growth-function form has the three branches
//   phi(0) = 0,
//   phi(r) = r |log r| Theta(|log r|)        on (0, e^{-d-1}),
//   phi(r) = e^{-d-1} (d+1) Theta(d+1)       on [e^{-d-1}, inf),
// and Phi(r) = int_0^r phi.  A general continuous phi with a closed-form
// primitive is accepted through from_phi (the Gronwall machinery does not
// care where phi came from).
class Modulus {
  public:
    Modulus(GrowthFunction theta, int dim);
    static Modulus from_phi(Fn1 phi, Fn1 Phi);

    double phi(double r) const;

    // Fast path: cubic table in log-log coordinates below the junction, exact
    // linear continuation above it.
    double Phi(double r) const;
    // Direct substitution-aware quadrature (u = -log s); the oracle for the
    // table.  Relative error <= 1e-12 of the smooth transformed integrand.
    double Phi_quadrature(double r) const;

    // sqrt(2 c Phi(s)) evaluated through logs below the table range, where
    // Phi itself underflows; keeps Psi meaningful for delta down to 1e-300.
    double sqrt_2c_phi(double c, double s) const;

    // Psi_{delta,c}(t) = int_0^t ds / (delta + sqrt(2 c Phi(s))).
    double psi(double delta, double c, double t) const;
    // Monotone inversion: returns t with |psi(t) - y| <= 1e-10 (1 + y).
    // Throws RangeExceeded when y > psi(t_max).
    double psi_inverse(double delta, double c, double y, double t_max = 1e3,
                       double guess = -1) const;

    // Extended-range Psi taking log(delta) directly: in u = -log s the
    // integrand 1/(e^{u - D} + sqrt(2c) e^{-u} ... ) is polynomial-scale, so
    // delta far below the double underflow threshold stays computable.
    // Growth-function moduli only.
    double psi_log_delta(double log_delta, double c, double t) const;
    double psi_log_delta_inverse(double log_delta, double c, double y,
                                 double t_max = 1e3) const;

    int dim() const { return dim_; }
    double junction() const { return junction_; }
    double plateau_value() const { return scale_ * plateau_; }
    bool theta_backed() const { return theta_ != nullptr; }
    const GrowthFunction& theta() const;
    double scale() const { return scale_; }
    // Same modulus with phi (and hence Phi) multiplied by k.
    Modulus scaled(double k) const;

    // Numeric verdict on int_{0+} dr / sqrt(Phi(r)) = inf.  Theta-backed
    // moduli only; r0 must lie below the junction.
    OsgoodReport osgood_verdict(double r0 = -1, double eps_min = 1e-300) const;

  private:
    Modulus() = default;
    double transformed_tail(double a) const;  // S(a) = int e^{-2w}(a+w)Theta(a+w) dw
    void build_table();

    std::shared_ptr<const GrowthFunction> theta_;
    int dim_ = 0;
    double junction_ = HUGE_VAL;
    double plateau_ = 0;  // unscaled plateau value of phi
    double scale_ = 1;
    Fn1 custom_phi_, custom_Phi_;
    CubicTable log_phi_table_;  // (a, log S(a)) with a = -log r
    double table_a_lo_ = 0, table_a_hi_ = 0;
    double Phi_at_junction_ = 0;  // unscaled
};

}  // namespace vpy
