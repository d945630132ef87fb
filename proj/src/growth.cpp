#include "vpy/growth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vpy {

double iterated_log(int m, double r) {
    if (m < 0) throw InvalidInput("iterated_log: m must be >= 0");
    if (m == 0) return r;
    if (!(r > 0)) throw DomainError("iterated_log: r must be positive");
    double y = std::fabs(std::log(r));
    for (int k = 2; k <= m; ++k) {
        if (!(y > 0)) throw DomainError("iterated_log: intermediate log not defined");
        y = std::log(y);
    }
    return y;
}

double iterated_exp_one(int m) {
    if (m < 0) throw InvalidInput("iterated_exp_one: m must be >= 0");
    if (m > 3) throw RangeExceeded("iterated_exp_one: exp_m(1) overflows for m > 3");
    double e = 1.0;
    for (int k = 0; k < m; ++k) e = std::exp(e);
    return e;
}

GrowthFunction GrowthFunction::constant(double value) {
    if (!(value > 0)) throw InvalidInput("GrowthFunction::constant: value must be positive");
    GrowthFunction g;
    g.kind_ = GrowthKind::Constant;
    g.param_ = value;
    return g;
}

GrowthFunction GrowthFunction::power(double alpha) {
    if (!(alpha >= 1)) throw InvalidInput("GrowthFunction::power: alpha must be >= 1");
    GrowthFunction g;
    g.kind_ = GrowthKind::Power;
    g.param_ = alpha;
    return g;
}

GrowthFunction GrowthFunction::iterated_log(int m) {
    if (m < 0 || m > 3) throw InvalidInput("GrowthFunction::iterated_log: m must be in [0, 3]");
    GrowthFunction g;
    g.kind_ = GrowthKind::IteratedLog;
    g.m_ = m;
    return g;
}

GrowthFunction GrowthFunction::tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw InvalidInput("GrowthFunction::tabulated: empty knot list");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!(knots[i].second > 0))
            throw InvalidInput("GrowthFunction::tabulated: values must be positive");
        if (i > 0 && !(knots[i].first > knots[i - 1].first))
            throw InvalidInput("GrowthFunction::tabulated: p knots must be strictly increasing");
    }
    GrowthFunction g;
    g.kind_ = GrowthKind::Tabulated;
    g.knots_ = std::move(knots);
    return g;
}

double GrowthFunction::operator()(double p) const {
    if (!(p >= 0)) throw InvalidInput("GrowthFunction: p must be >= 0");
    switch (kind_) {
        case GrowthKind::Constant:
            return param_;
        case GrowthKind::Power:
            return std::pow(std::max(p, 1.0), 1.0 / param_);
        case GrowthKind::IteratedLog: {
            const double em = iterated_exp_one(m_);
            const double q = std::max(p, em);
            double v = q;
            double y = std::log(q);  // log_1(q), q >= 1
            for (int k = 1; k <= m_; ++k) {
                v *= y * y;
                y = std::log(y);
            }
            return v;
        }
        case GrowthKind::Tabulated: {
            if (p <= knots_.front().first) return knots_.front().second;
            if (p >= knots_.back().first) return knots_.back().second;
            auto it = std::upper_bound(knots_.begin(), knots_.end(), p,
                                       [](double a, const auto& k) { return a < k.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double t = (p - lo.first) / (hi.first - lo.first);
            return lo.second + t * (hi.second - lo.second);
        }
    }
    throw Error("GrowthFunction: unreachable");
}

std::string GrowthFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case GrowthKind::Constant: os << "constant(" << param_ << ")"; break;
        case GrowthKind::Power: os << "power(alpha=" << param_ << ")"; break;
        case GrowthKind::IteratedLog: os << "iterated_log(m=" << m_ << ")"; break;
        case GrowthKind::Tabulated: os << "tabulated(n=" << knots_.size() << ")"; break;
    }
    return os.str();
}

std::string OsgoodReport::describe() const {
    std::ostringstream os;
    switch (verdict) {
        case Verdict::Diverges: os << "diverges"; break;
        case Verdict::Converges: os << "converges"; break;
        case Verdict::Inconclusive: os << "inconclusive"; break;
    }
    os << " (s=" << fit_s << ", q=" << fit_q << ", r=" << fit_r << ")";
    return os.str();
}

Modulus::Modulus(GrowthFunction theta, int dim) {
    if (dim < 2) throw InvalidInput("Modulus: dim must be >= 2");
    theta_ = std::make_shared<GrowthFunction>(std::move(theta));
    dim_ = dim;
    junction_ = std::exp(-static_cast<double>(dim + 1));
    plateau_ = junction_ * (dim + 1) * (*theta_)(static_cast<double>(dim + 1));
    build_table();
}

Modulus Modulus::from_phi(Fn1 phi, Fn1 Phi) {
    if (!phi || !Phi) throw InvalidInput("Modulus::from_phi: phi and Phi required");
    Modulus m;
    m.custom_phi_ = std::move(phi);
    m.custom_Phi_ = std::move(Phi);
    return m;
}

const GrowthFunction& Modulus::theta() const {
    if (!theta_) throw InvalidInput("Modulus: no growth function behind a custom phi");
    return *theta_;
}

Modulus Modulus::scaled(double k) const {
    if (!(k > 0)) throw InvalidInput("Modulus::scaled: factor must be positive");
    Modulus m = *this;
    m.scale_ *= k;
    return m;
}

double Modulus::phi(double r) const {
    if (r <= 0) return 0.0;
    if (custom_phi_) return scale_ * custom_phi_(r);
    if (r >= junction_) return scale_ * plateau_;
    const double u = -std::log(r);
    return scale_ * r * u * (*theta_)(u);
}

// S(a) = int_0^inf e^{-2w} (a+w) Theta(a+w) dw, so that Phi(e^-a) = e^{-2a} S(a)
// below the junction.
double Modulus::transformed_tail(double a) const {
    const auto& th = *theta_;
    const Fn1 f = [&](double w) { return std::exp(-2.0 * w) * (a + w) * th(a + w); };
    if (theta_->kind() == GrowthKind::Tabulated) {
        // Piecewise-linear integrand; kinks make tight tolerances expensive.
        return integrate_adaptive(f, 0.0, 45.0, 3e-10, 0.0, 40000);
    }
    return integrate_adaptive(f, 0.0, 45.0, 1e-13, 0.0, 4000);
}

void Modulus::build_table() {
    table_a_lo_ = dim_ + 1.0;
    table_a_hi_ = -std::log(1e-28);
    const double step = std::log(10.0) / 128.0;
    std::vector<double> a, logS, slope;
    for (double t = table_a_lo_; t < table_a_hi_ + step; t += step) {
        const double S = transformed_tail(t);
        a.push_back(t);
        logS.push_back(std::log(S));
        // d/da log S(a) = 2 - a Theta(a) / S(a), by differentiating
        // S(a) = e^{2a} int_a^inf e^{-2v} v Theta(v) dv.
        slope.push_back(2.0 - t * (*theta_)(t) / S);
    }
    log_phi_table_ = CubicTable(a, logS, slope);
    Phi_at_junction_ = std::exp(-2.0 * table_a_lo_) * transformed_tail(table_a_lo_);
}

double Modulus::Phi_quadrature(double r) const {
    if (r <= 0) return 0.0;
    if (custom_phi_) {
        // phi is continuous with phi(0) = 0; geometric panels toward 0.
        std::vector<double> breaks{0.0};
        const double lo = r * 1e-12;
        for (double x : geometric_breakpoints(lo, r, 4)) breaks.push_back(x);
        return scale_ * integrate_panels([this](double s) { return custom_phi_(s); }, breaks);
    }
    const double rr = std::min(r, junction_);
    const double a = -std::log(rr);
    double v = std::exp(-2.0 * a) * transformed_tail(a);
    if (r > junction_) v += (r - junction_) * plateau_;
    return scale_ * v;
}

double Modulus::Phi(double r) const {
    if (r <= 0) return 0.0;
    if (custom_Phi_) return scale_ * custom_Phi_(r);
    if (r >= junction_) return scale_ * (Phi_at_junction_ + (r - junction_) * plateau_);
    const double a = -std::log(r);
    if (a > table_a_hi_) return Phi_quadrature(r);
    return scale_ * std::exp(-2.0 * a + log_phi_table_(a));
}

double Modulus::sqrt_2c_phi(double c, double s) const {
    if (s <= 0) return 0.0;
    if (custom_Phi_ || s >= 1e-28) return std::sqrt(2.0 * c * Phi(s));
    const double a = -std::log(s);
    double logS;
    if (a <= table_a_hi_) {
        logS = log_phi_table_(a);
    } else {
        // Leading asymptote S(a) ~ a Theta(a) / 2, matched to the table edge.
        const double edge = log_phi_table_(table_a_hi_) -
                            std::log(0.5 * table_a_hi_ * (*theta_)(table_a_hi_));
        logS = std::log(0.5 * a * (*theta_)(a)) + edge;
    }
    // log of sqrt(2c e^{-2a} S(a)); exp may denormalize or flush to zero,
    // which the callers' delta floor absorbs.
    return std::exp(0.5 * (std::log(2.0 * c * scale_) + logS) - a);
}

double Modulus::psi(double delta, double c, double t) const {
    if (!(delta > 0) || !(c >= 0)) throw InvalidInput("psi: need delta > 0 and c >= 0");
    if (!(t >= 0)) throw InvalidInput("psi: t must be >= 0");
    if (t == 0) return 0.0;
    if (c == 0) return t / delta;
    const Fn1 f = [&](double s) { return 1.0 / (delta + sqrt_2c_phi(c, s)); };
    const double knee = delta * 1e-4;
    if (t <= knee * 16) return integrate_adaptive(f, 0.0, t, 1e-12);
    std::vector<double> breaks{0.0};
    for (double x : geometric_breakpoints(knee, t, 6)) breaks.push_back(x);
    return integrate_panels(f, breaks);
}

double Modulus::psi_log_delta(double log_delta, double c, double t) const {
    if (!(c > 0)) throw InvalidInput("psi_log_delta: c must be positive");
    if (!(t >= 0)) throw InvalidInput("psi_log_delta: t must be >= 0");
    if (log_delta > std::log(1e-290)) return psi(std::exp(log_delta), c, t);
    if (!theta_backed())
        throw InvalidInput("psi_log_delta: requires a growth-function modulus");
    if (t == 0) return 0.0;

    const double D = -log_delta;
    // sqrt(2 c Phi(e^{-u})) e^{u} = sqrt(2 c scale S(u)), polynomial in u.
    const auto h = [&](double u) {
        double logS;
        if (u <= table_a_hi_) {
            logS = u >= table_a_lo_ ? log_phi_table_(u)
                                    : std::log(transformed_tail(std::max(u, 0.0)));
        } else {
            const double edge = log_phi_table_(table_a_hi_) -
                                std::log(0.5 * table_a_hi_ * (*theta_)(table_a_hi_));
            logS = std::log(0.5 * u * (*theta_)(u)) + edge;
        }
        return std::exp(0.5 * (std::log(2.0 * c * scale_) + logS));
    };

    double total = 0;
    double u_lo;  // upper end in s == lower end in u
    if (t > junction_) {
        // Plateau region: Phi linear, delta utterly negligible there.
        const Fn1 f = [&](double s) { return 1.0 / std::sqrt(2.0 * c * Phi(s)); };
        total += integrate_adaptive(f, junction_, t, 1e-11);
        u_lo = table_a_lo_;
    } else {
        u_lo = -std::log(t);
    }
    // The knee e^{u-D} spans ~90 u-units around D.  Beyond D ~ 1e9 that width
    // sits below one ulp of u; the knee's contribution (~90/h(D)) is far
    // below any tolerance, so the integral is simply cut at u = D.
    const bool resolve_knee = D < 1e9;
    const double u_hi = resolve_knee ? D + 45.0 : D;
    if (u_hi > u_lo) {
        const Fn1 g = resolve_knee
                          ? Fn1([&](double u) { return 1.0 / (std::exp(u - D) + h(u)); })
                          : Fn1([&](double u) { return 1.0 / h(u); });
        std::vector<double> breaks = geometric_breakpoints(u_lo, u_hi, 24);
        if (resolve_knee && D - 50.0 > u_lo) {
            for (int i = 0; i <= 64; ++i) {
                const double k = D - 50.0 + 100.0 * i / 64.0;
                if (k > u_lo && k < u_hi) breaks.push_back(k);
            }
            std::sort(breaks.begin(), breaks.end());
            breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        }
        total += integrate_panels(g, breaks);
    }
    return total;
}

double Modulus::psi_log_delta_inverse(double log_delta, double c, double y,
                                      double t_max) const {
    if (!(y >= 0)) throw InvalidInput("psi_log_delta_inverse: y must be >= 0");
    if (log_delta > std::log(1e-290))
        return psi_inverse(std::exp(log_delta), c, y, t_max);
    if (y == 0) return 0.0;
    if (psi_log_delta(log_delta, c, t_max) < y)
        throw RangeExceeded("psi_log_delta_inverse: y exceeds psi at the bracket ceiling");
    // Bisection in log t: the root can sit hundreds of orders of magnitude
    // below 1.
    double llo = std::log(1e-308), lhi = std::log(t_max);
    if (psi_log_delta(log_delta, c, 1e-308) >= y) return 0.0;
    for (int it = 0; it < 96; ++it) {
        const double mid = 0.5 * (llo + lhi);
        (psi_log_delta(log_delta, c, std::exp(mid)) < y ? llo : lhi) = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

double Modulus::psi_inverse(double delta, double c, double y, double t_max, double guess) const {
    if (!(y >= 0)) throw InvalidInput("psi_inverse: y must be >= 0");
    if (y == 0) return 0.0;
    if (c == 0) {
        if (y * delta > t_max)
            throw RangeExceeded("psi_inverse: y exceeds psi at the bracket ceiling");
        return y * delta;
    }
    if (psi(delta, c, t_max) < y)
        throw RangeExceeded("psi_inverse: y exceeds psi at the bracket ceiling");
    double lo = 0.0, hi = t_max;
    double t = (guess > 0 && guess < t_max) ? guess : std::min(y * delta, 0.5 * t_max);
    if (t <= 0) t = 0.5 * t_max;
    const double tol = 1e-10 * (1.0 + y);
    for (int it = 0; it < 200; ++it) {
        const double v = psi(delta, c, t);
        if (std::abs(v - y) <= tol) return t;
        if (v < y)
            lo = t;
        else
            hi = t;
        // Newton step with psi'(t) = 1/(delta + sqrt(2 c Phi(t))).
        double step = (y - v) * (delta + sqrt_2c_phi(c, t));
        double tn = t + step;
        if (!(tn > lo) || !(tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
    }
    throw NumericFailure("psi_inverse: no convergence", std::abs(psi(delta, c, t) - y));
}

OsgoodReport Modulus::osgood_verdict(double r0, double eps_min) const {
    if (!theta_backed())
        throw InvalidInput("osgood_verdict: requires a growth-function modulus");
    if (r0 < 0) r0 = junction_ * 0.999;
    if (!(r0 > 0) || r0 >= junction_)
        throw InvalidInput("osgood_verdict: r0 must lie below the junction");
    if (!(eps_min > 0) || eps_min >= r0)
        throw InvalidInput("osgood_verdict: eps grid must descend below r0");

    // In u = -log r the truncated integral is int_{u0}^{u_eps} du / sqrt(S(u)),
    // free of underflow all the way to eps = 1e-300.
    const double u0 = -std::log(r0);
    const double u_max = -std::log(eps_min);
    const Fn1 g = [&](double u) { return 1.0 / std::sqrt(scale_ * transformed_tail(u)); };

    OsgoodReport rep;
    const double dec = std::log(10.0);
    double integral = 0.0;
    double u_prev = u0;
    for (double u = u0 + dec; u < u_max + 0.5 * dec; u += dec) {
        const double ue = std::min(u, u_max);
        integral += gk15(g, u_prev, 0.5 * (u_prev + ue)).value +
                    gk15(g, 0.5 * (u_prev + ue), ue).value;
        rep.samples.emplace_back(std::exp(-ue), integral);
        u_prev = ue;
        if (ue >= u_max) break;
    }

    // Regress log g on {1, log u, loglog u, logloglog u}; for the model family
    //   g = C u^-s (log u)^-q (loglog u)^-r
    // the integral over [u0, inf) diverges iff s < 1, or s = 1 and q < 1, or
    // s = q = 1 and r <= 1.
    const int nfit = 400;
    std::vector<double> A(16, 0.0), rhs(4, 0.0);
    for (int i = 0; i < nfit; ++i) {
        const double u = u0 + (u_max - u0) * (i + 0.5) / nfit;
        const double x1 = std::log(u);
        const double x2 = std::log(std::max(x1, 1e-3));
        const double x3 = std::log(std::max(x2, 5e-2));
        const double b[4] = {1.0, -x1, -x2, -x3};
        const double lg = std::log(g(u));
        for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) A[p * 4 + q] += b[p] * b[q];
            rhs[p] += b[p] * lg;
        }
    }
    const std::vector<double> coef = solve_linear(A, rhs);
    rep.fit_s = coef[1];
    rep.fit_q = coef[2];
    rep.fit_r = coef[3];
    rep.tol_s = 0.10;
    rep.tol_q = 0.25;
    rep.tol_r = 0.50;

    using V = OsgoodReport::Verdict;
    if (rep.fit_s < 1.0 - rep.tol_s)
        rep.verdict = V::Diverges;
    else if (rep.fit_s > 1.0 + rep.tol_s)
        rep.verdict = V::Converges;
    else if (rep.fit_q < 1.0 - rep.tol_q)
        rep.verdict = V::Diverges;
    else if (rep.fit_q > 1.0 + rep.tol_q)
        rep.verdict = V::Converges;
    else if (rep.fit_r <= 1.0 + rep.tol_r)
        rep.verdict = V::Diverges;
    else
        rep.verdict = V::Inconclusive;

    // Log-log growth rate of the truncated integral over the tail half.
    const std::size_t n = rep.samples.size();
    if (n >= 4) {
        const auto& mid = rep.samples[n / 2];
        const auto& last = rep.samples[n - 1];
        const double lu_mid = std::log(-std::log(mid.first));
        const double lu_last = std::log(-std::log(last.first));
        rep.slope_estimate = (std::log(last.second) - std::log(mid.second)) / (lu_last - lu_mid);
    }
    return rep;
}

}  // namespace vpy
