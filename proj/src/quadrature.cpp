#include "vpy/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace vpy {

namespace {

// QUADPACK QK15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace

PanelResult gk15(const Fn1& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int k = 0; k < 7; ++k) {
        fv[k] = f(c - h * kXgk[k]);
        fv[14 - k] = f(c + h * kXgk[k]);
    }
    fv[7] = f(c);
    double kron = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int k = 0; k < 7; ++k) {
        kron += kWgk[k] * (fv[k] + fv[14 - k]);
        if (k % 2 == 1) gauss += kWg[k / 2] * (fv[k] + fv[14 - k]);
    }
    PanelResult r;
    r.value = kron * h;
    r.error = std::abs((kron - gauss) * h);
    return r;
}

double integrate_adaptive(const Fn1& f, double a, double b, double rel_tol, double abs_tol,
                          int max_panels) {
    if (a == b) return 0.0;
    struct Interval {
        double a, b, value, error;
        bool operator<(const Interval& o) const { return error < o.error; }
    };
    std::priority_queue<Interval> heap;
    PanelResult first = gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value;
    double total_err = first.error;
    int panels = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (panels >= max_panels || heap.top().error == 0.0)
            throw NumericFailure("integrate_adaptive: tolerance not reached", total_err);
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        PanelResult left = gk15(f, worst.a, mid);
        PanelResult right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++panels;
    }
    return total;
}

double integrate_panels(const Fn1& f, const std::vector<double>& breaks) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) s += gk15(f, breaks[i], breaks[i + 1]).value;
    return s;
}

std::vector<double> geometric_breakpoints(double a, double b, int per_octave) {
    if (!(a > 0) || !(b > a)) throw InvalidInput("geometric_breakpoints: need 0 < a < b");
    const double step = std::pow(2.0, 1.0 / per_octave);
    std::vector<double> out{a};
    double x = a;
    while (x * step < b) {
        x *= step;
        out.push_back(x);
    }
    out.push_back(b);
    return out;
}

double log_integrate_panels(const Fn1& g, const std::vector<double>& breaks) {
    struct Node {
        double u, w;
    };
    std::vector<Node> nodes;
    nodes.reserve(15 * (breaks.size() - 1));
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double c = 0.5 * (breaks[i] + breaks[i + 1]);
        const double h = 0.5 * (breaks[i + 1] - breaks[i]);
        for (int k = 0; k < 7; ++k) {
            nodes.push_back({c - h * kXgk[k], kWgk[k] * h});
            nodes.push_back({c + h * kXgk[k], kWgk[k] * h});
        }
        nodes.push_back({c, kWgk[7] * h});
    }
    std::vector<double> ex(nodes.size());
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        ex[i] = g(nodes[i].u);
        m = std::max(m, ex[i]);
    }
    if (!std::isfinite(m)) return -HUGE_VAL;
    double s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += nodes[i].w * std::exp(ex[i] - m);
    return m + std::log(s);
}

CubicTable::CubicTable(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw InvalidInput("CubicTable: need >= 2 knots");
    // Fritsch-Carlson monotone slopes.
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (!(h[i] > 0)) throw InvalidInput("CubicTable: x not increasing");
        del[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = del[0];
    d_[n - 1] = del[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0) {
            d_[i] = 0;
        } else {
            const double w1 = 2 * h[i] + h[i - 1];
            const double w2 = h[i] + 2 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
}

CubicTable::CubicTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(dy)) {
    if (x_.size() < 2 || y_.size() != x_.size() || d_.size() != x_.size())
        throw InvalidInput("CubicTable: inconsistent knot arrays");
}

double CubicTable::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y_[i] * (2 * t3 - 3 * t2 + 1) + h * d_[i] * (t3 - 2 * t2 + t) +
           y_[i + 1] * (-2 * t3 + 3 * t2) + h * d_[i + 1] * (t3 - t2);
}

namespace {

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    // Lentz continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0) || x < 0) throw DomainError("gamma_q: need a > 0, x >= 0");
    if (x == 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
        if (A[piv * n + k] == 0.0) throw NumericFailure("solve_linear: singular matrix", 0);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = A[i * n + k] / A[k * n + k];
            for (int j = k; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(b.size());
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * x[j];
        x[i] = s / A[i * n + i];
    }
    return x;
}

double determinant(std::vector<double> A, int n) {
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
        if (A[piv * n + k] == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            det = -det;
        }
        det *= A[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double f = A[i * n + k] / A[k * n + k];
            for (int j = k; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
        }
    }
    return det;
}

}  // namespace vpy
