#include "vpy/yudovich.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/quadrature.hpp"
#include "vpy/reduce.hpp"

namespace vpy {

RadialProfile RadialProfile::scaled(double k) const {
    if (!(k > 0)) throw InvalidInput("RadialProfile::scaled: factor must be positive");
    RadialProfile out = *this;
    auto base = value;
    out.value = [base, k](double r) { return k * base(r); };
    if (log_value_u) {
        auto lbase = log_value_u;
        const double lk = std::log(k);
        out.log_value_u = [lbase, lk](double u) { return lk + lbase(u); };
    }
    out.height = height * k;
    return out;
}

std::string RadialProfile::describe() const {
    std::ostringstream os;
    switch (kind) {
        case ProfileKind::UniformBall: os << "uniform_ball(R=" << support_radius << ")"; break;
        case ProfileKind::IteratedLogProfile:
            os << "theta_m(m=" << m << ", support=" << support_radius << ")";
            break;
        case ProfileKind::PowerLogProfile: os << "power_log(alpha=" << alpha << ")"; break;
        case ProfileKind::Custom: os << "custom(support=" << support_radius << ")"; break;
    }
    return os.str();
}

double eps_cutoff(int m) {
    if (m < 1) throw InvalidInput("eps_cutoff: m must be >= 1");
    if (m > 3) return 1e-300;
    return std::exp(-iterated_exp_one(m - 1));
}

RadialProfile uniform_ball_profile(int dim, double R, double height) {
    if (!(R > 0) || !(height >= 0)) throw InvalidInput("uniform_ball_profile: bad parameters");
    RadialProfile p;
    p.dim = dim;
    p.support_radius = R;
    p.height = height;
    p.kind = ProfileKind::UniformBall;
    p.value = [height](double) { return height; };
    const double lh = height > 0 ? std::log(height) : -HUGE_VAL;
    p.log_value_u = [lh](double) { return lh; };
    return p;
}

namespace {
// |log_m(e^{-u})| as a function of u > 0: m-1 plain logs applied to u.
double iterated_log_of_u(int m, double u) {
    double y = u;
    for (int k = 2; k <= m; ++k) {
        if (!(y > 0)) throw DomainError("iterated_log: intermediate log not defined");
        y = std::log(y);
    }
    return std::fabs(y);
}
}  // namespace

RadialProfile ell_profile(int dim, int m, double cutoff) {
    if (m < 1) throw InvalidInput("ell_profile: m must be >= 1");
    if (cutoff < 0) cutoff = eps_cutoff(m);
    RadialProfile p;
    p.dim = dim;
    p.support_radius = cutoff;
    p.kind = ProfileKind::IteratedLogProfile;
    p.m = m;
    p.value = [m](double r) { return r > 0 ? std::fabs(iterated_log(m, r)) : 0.0; };
    p.log_value_u = [m](double u) { return std::log(iterated_log_of_u(m, u)); };
    return p;
}

RadialProfile theta_m_profile(int dim, int m) {
    if (m < 0) throw InvalidInput("theta_m_profile: m must be >= 0");
    RadialProfile p;
    p.dim = dim;
    p.support_radius = eps_cutoff(m + 1);
    p.kind = ProfileKind::IteratedLogProfile;
    p.m = m;
    p.value = [m](double r) {
        if (!(r > 0)) return 0.0;
        double v = std::fabs(std::log(r));  // ell_1 on the support
        double y = v;
        for (int k = 2; k <= m + 1; ++k) {
            y = std::log(y);
            v *= y * y;
        }
        return v;
    };
    p.log_value_u = [m](double u) {
        double lv = std::log(u);
        double y = u;
        for (int k = 2; k <= m + 1; ++k) {
            y = std::log(y);
            lv += 2.0 * std::log(y);
        }
        return lv;
    };
    return p;
}

RadialProfile power_log_profile(int dim, double alpha) {
    if (!(alpha >= 1)) throw InvalidInput("power_log_profile: alpha must be >= 1");
    RadialProfile p;
    p.dim = dim;
    p.support_radius = eps_cutoff(1);
    p.kind = ProfileKind::PowerLogProfile;
    p.alpha = alpha;
    p.value = [alpha](double r) {
        return r > 0 ? std::pow(std::fabs(std::log(r)), 1.0 / alpha) : 0.0;
    };
    p.log_value_u = [alpha](double u) { return std::log(u) / alpha; };
    return p;
}

// log of S_d int_0^R theta(r)^p r^{d-1} dr via u = -log r; the transformed
// exponent p log theta(e^-u) - d u is peaked near u = p/d for the
// iterated-log family and at the support edge for bounded profiles.
double log_lp_norm_radial(const RadialProfile& profile, double p) {
    if (!(p >= 1)) throw InvalidInput("lp_norm_radial: p must be >= 1");
    if (!profile.value) throw InvalidInput("lp_norm_radial: empty profile");
    const int d = profile.dim;
    const double uR = -std::log(profile.support_radius);

    const Fn1 h = [&](double u) {
        if (u < uR) return -HUGE_VAL;
        if (profile.log_value_u) return p * profile.log_value_u(u) - d * u;
        if (u > 700.0)
            throw NumericFailure("lp_norm_radial: profile lacks a log-form evaluator "
                                 "and e^{-u} underflows on the needed range",
                                 0);
        const double v = profile(std::exp(-u));
        if (!(v > 0)) return -HUGE_VAL;
        return p * std::log(v) - d * u;
    };

    // Coarse scan for the exponent peak.
    const double scan_hi = uR + std::max(60.0, 3.0 * p / d + 60.0);
    double u_peak = uR, h_peak = -HUGE_VAL;
    const int nscan = 1024;
    for (int i = 0; i <= nscan; ++i) {
        const double u = uR + (scan_hi - uR) * i / nscan;
        const double val = h(u);
        if (val > h_peak) {
            h_peak = val;
            u_peak = u;
        }
    }
    const double sigma = std::max(std::sqrt(p) / d, 0.5);
    const double lo = std::max(uR, u_peak - 15.0 * sigma);
    const double hi = u_peak + 15.0 * sigma;
    std::vector<double> breaks;
    if (lo > uR) {
        const int nhead = 24;
        for (int i = 0; i < nhead; ++i) breaks.push_back(uR + (lo - uR) * i / nhead);
    }
    const int ndense = 180;
    for (int i = 0; i <= ndense; ++i) breaks.push_back(lo + (hi - lo) * i / ndense);
    const int ntail = 30;
    for (int i = 1; i <= ntail; ++i) breaks.push_back(hi + 80.0 * i / ntail);

    const double log_integral = log_integrate_panels(h, breaks);
    return (std::log(unit_sphere_area(d)) + log_integral) / p;
}

double lp_norm_radial(const RadialProfile& profile, double p) {
    return std::exp(log_lp_norm_radial(profile, p));
}

std::size_t GridDensity::cell_count() const {
    std::size_t n = 1;
    for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(cells_per_axis);
    return n;
}

void GridDensity::validate() const {
    if (dim < 1 || dim > 3) throw InvalidInput("GridDensity: dim must be 1..3");
    if (cells_per_axis <= 0 || !(box_half > 0)) throw InvalidInput("GridDensity: empty grid");
    if (values.size() != cell_count()) throw InvalidInput("GridDensity: value array size mismatch");
}

double GridDensity::total_mass() const {
    const double cell_vol = std::pow(cell_size(), dim);
    return cell_vol * deterministic_sum(values.data(), values.size());
}

double GridDensity::lp_norm(double p) const {
    if (!(p >= 1)) throw InvalidInput("GridDensity::lp_norm: p must be >= 1");
    double mx = 0;
    for (double v : values) mx = std::max(mx, v);
    if (mx == 0) return 0.0;
    const double log_mx = std::log(mx);
    const double s = deterministic_sum(values.size(), [&](std::size_t i) {
        const double v = values[i];
        return v > 0 ? std::exp(p * (std::log(v) - log_mx)) : 0.0;
    });
    return std::exp(log_mx + (std::log(s) + dim * std::log(cell_size())) / p);
}

GridDensity rasterize(const RadialProfile& profile, int cells_per_axis, double box_half) {
    GridDensity g;
    g.dim = profile.dim;
    g.cells_per_axis = cells_per_axis;
    g.box_half = box_half;
    g.values.assign(g.cell_count(), 0.0);
    const double h = g.cell_size();
    const int n = cells_per_axis;
    const int d = profile.dim;
    // 2-point-per-axis subsampled cell average.
    const double off[2] = {-0.25 * h, 0.25 * h};
    const auto fill = [&](std::size_t idx, const Vec& center) {
        double acc = 0;
        int cnt = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < (d == 3 ? 2 : 1); ++c) {
                    Vec q = center;
                    q[0] += off[a];
                    q[1] += off[b];
                    if (d == 3) q[2] += off[c];
                    acc += profile(norm(q));
                    ++cnt;
                }
        g.values[idx] = acc / cnt;
    };
    if (d == 2) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fill(static_cast<std::size_t>(i) * n + j,
                     Vec(-box_half + (i + 0.5) * h, -box_half + (j + 0.5) * h));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    fill((static_cast<std::size_t>(i) * n + j) * n + k,
                         Vec(-box_half + (i + 0.5) * h, -box_half + (j + 0.5) * h,
                             -box_half + (k + 0.5) * h));
    }
    return g;
}

namespace {

// In-ball volume fractions for cells at integer offsets from a node-centred
// unit ball, by 4^d subsampling.  Depends only on the cell size.
struct BallStencil {
    std::vector<std::array<int, 3>> offsets;
    std::vector<double> fraction;
};

BallStencil make_stencil(int d, double h) {
    BallStencil st;
    const int reach = static_cast<int>(std::ceil(1.0 / h)) + 1;
    const int sub = 4;
    for (int i = -reach; i <= reach; ++i)
        for (int j = -reach; j <= reach; ++j)
            for (int k = (d == 3 ? -reach : 0); k <= (d == 3 ? reach : 0); ++k) {
                // Cell centre offset from the node: (i+0.5, j+0.5, k+0.5) h.
                int inside = 0, total = 0;
                for (int a = 0; a < sub; ++a)
                    for (int b = 0; b < sub; ++b)
                        for (int c = 0; c < (d == 3 ? sub : 1); ++c) {
                            const double x = (i + (a + 0.5) / sub) * h;
                            const double y = (j + (b + 0.5) / sub) * h;
                            const double z = d == 3 ? (k + (c + 0.5) / sub) * h : 0.0;
                            ++total;
                            if (x * x + y * y + z * z <= 1.0) ++inside;
                        }
                if (inside > 0) {
                    st.offsets.push_back({i, j, k});
                    st.fraction.push_back(static_cast<double>(inside) / total);
                }
            }
    return st;
}

}  // namespace

double lp_ul_norm(const GridDensity& rho, double p) {
    rho.validate();
    if (!(p >= 1)) throw InvalidInput("lp_ul_norm: p must be >= 1");
    const double h = rho.cell_size();
    if (h > 0.25) throw InvalidInput("lp_ul_norm: cell size must be <= 0.25 to resolve unit balls");
    const int n = rho.cells_per_axis;
    const int d = rho.dim;
    const BallStencil st = make_stencil(d, h);
    const double cell_vol = std::pow(h, d);

    const auto cell_value = [&](int i, int j, int k) -> double {
        if (i < 0 || i >= n || j < 0 || j >= n) return 0.0;
        if (d == 3 && (k < 0 || k >= n)) return 0.0;
        const std::size_t idx = d == 3
                                    ? (static_cast<std::size_t>(i) * n + j) * n + k
                                    : static_cast<std::size_t>(i) * n + j;
        return rho.values[idx];
    };

    const int nodes = n + 1;
    const std::size_t node_count =
        d == 3 ? static_cast<std::size_t>(nodes) * nodes * nodes
               : static_cast<std::size_t>(nodes) * nodes;
    double best = 0.0;
#ifdef _OPENMP
#pragma omp parallel for reduction(max : best) schedule(static)
#endif
    for (std::ptrdiff_t node = 0; node < static_cast<std::ptrdiff_t>(node_count); ++node) {
        int ni, nj, nk = 0;
        if (d == 3) {
            ni = static_cast<int>(node / (nodes * nodes));
            nj = static_cast<int>((node / nodes) % nodes);
            nk = static_cast<int>(node % nodes);
        } else {
            ni = static_cast<int>(node / nodes);
            nj = static_cast<int>(node % nodes);
        }
        // Largest cell value inside the ball first, then log-sum-exp.
        double mx = 0;
        for (std::size_t s = 0; s < st.offsets.size(); ++s) {
            const auto& o = st.offsets[s];
            mx = std::max(mx, cell_value(ni + o[0], nj + o[1], nk + o[2]));
        }
        if (mx == 0) continue;
        const double log_mx = std::log(mx);
        double acc = 0;
        for (std::size_t s = 0; s < st.offsets.size(); ++s) {
            const auto& o = st.offsets[s];
            const double v = cell_value(ni + o[0], nj + o[1], nk + o[2]);
            if (v > 0) acc += st.fraction[s] * std::exp(p * (std::log(v) - log_mx));
        }
        const double norm_p = std::exp(log_mx + (std::log(acc) + std::log(cell_vol)) / p);
        best = std::max(best, norm_p);
    }
    return best;
}

std::vector<double> default_p_grid() {
    std::vector<double> g;
    for (double p = 1.0; p <= 4096.0; p *= 2.0) g.push_back(p);
    return g;
}

namespace {

NormReport assemble_report(std::vector<double> p_grid, std::vector<double> lp,
                           std::vector<double> lp_ul, const GrowthFunction& theta) {
    NormReport rep;
    rep.p_grid = std::move(p_grid);
    rep.lp_values = std::move(lp);
    rep.lp_ul_values = std::move(lp_ul);
    rep.yudovich_norm = 0;
    rep.saturation_ratio = HUGE_VAL;
    for (std::size_t i = 0; i < rep.p_grid.size(); ++i) {
        const double th = theta(rep.p_grid[i]);
        rep.yudovich_norm = std::max(rep.yudovich_norm, rep.lp_ul_values[i] / th);
        rep.saturation_ratio = std::min(rep.saturation_ratio, rep.lp_values[i] / th);
    }
    const double th_top = theta(rep.p_grid.back());
    rep.top_ratio = rep.lp_values.back() / th_top;
    rep.inverse_top_ratio = th_top / rep.lp_values.back();
    return rep;
}

}  // namespace

NormReport yudovich_report(const RadialProfile& profile, const GrowthFunction& theta,
                           std::vector<double> p_grid) {
    if (p_grid.empty()) p_grid = default_p_grid();
    std::vector<double> lp, lp_ul;
    for (double p : p_grid) lp.push_back(lp_norm_radial(profile, p));
    if (profile.support_radius <= 1.0) {
        lp_ul = lp;  // support inside a unit ball: the sup is attained at the centre
    } else {
        const GridDensity g = rasterize(profile, static_cast<int>(profile.support_radius * 2 / 0.05),
                                        profile.support_radius * 1.05);
        for (double p : p_grid) lp_ul.push_back(lp_ul_norm(g, p));
    }
    return assemble_report(std::move(p_grid), std::move(lp), std::move(lp_ul), theta);
}

NormReport yudovich_report(const GridDensity& rho, const GrowthFunction& theta,
                           std::vector<double> p_grid) {
    if (p_grid.empty()) p_grid = default_p_grid();
    std::vector<double> lp, lp_ul;
    for (double p : p_grid) {
        lp.push_back(rho.lp_norm(p));
        lp_ul.push_back(lp_ul_norm(rho, p));
    }
    return assemble_report(std::move(p_grid), std::move(lp), std::move(lp_ul), theta);
}

SaturationFit saturation_check(int m, int dim, std::vector<double> p_grid, int denominator_depth) {
    if (m < 1) throw InvalidInput("saturation_check: m must be >= 1");
    if (denominator_depth < 0) denominator_depth = m - 1;
    const RadialProfile profile = ell_profile(dim, m);
    SaturationFit fit;
    fit.p_min = std::max(8.0, 2.0 * std::log(1.0 / profile.support_radius));
    if (p_grid.empty()) {
        double p = 1.0;
        while (p < fit.p_min) p *= 2.0;
        for (; p <= 4096.0; p *= 2.0) p_grid.push_back(p);
    }
    fit.p_grid = p_grid;
    fit.a = HUGE_VAL;
    fit.b = 0;
    for (double p : fit.p_grid) {
        if (p < fit.p_min)
            throw InvalidInput("saturation_check: p grid must start at or above p_min");
        const double nrm = lp_norm_radial(profile, p);
        const double denom = iterated_log(denominator_depth, p);
        if (!(denom > 0)) throw PropertyViolation("saturation_check: denominator not positive");
        fit.norms.push_back(nrm);
        fit.ratios.push_back(nrm / denom);
        fit.a = std::min(fit.a, fit.ratios.back());
        fit.b = std::max(fit.b, fit.ratios.back());
    }
    if (!(fit.a > 0) || fit.b / fit.a > 50.0)
        throw PropertyViolation("saturation_check: ratio " + std::to_string(fit.a) + ".." +
                                std::to_string(fit.b) + " not confined to a positive envelope");
    return fit;
}

}  // namespace vpy
