#include "ecgunc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecgunc/errors.hpp"

namespace ecgunc {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0; // n-1 denominator
    std::size_t n = 0;
};

Moments moments(std::span<const double> s) {
    Moments m;
    m.n = s.size();
    for (double v : s) m.mean += v;
    m.mean /= static_cast<double>(m.n);
    for (double v : s) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(m.n - 1);
    return m;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double x, double a, double b) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return h;
}

double clamp_p(double p) { return std::clamp(p, kPFloor, 1.0); }

} // namespace

double reg_inc_beta(double x, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw NumericError("reg_inc_beta: a and b must be > 0");
    if (x < 0.0 || x > 1.0) throw NumericError("reg_inc_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(x, a, b) / a;
    }
    return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double t_tail(double t, double dof) {
    if (dof <= 0.0) throw NumericError("t_tail: dof must be > 0, got " + std::to_string(dof));
    if (t == 0.0) return 0.5;
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double x = dof / (dof + t * t);
    const double half_two_sided = 0.5 * reg_inc_beta(x, 0.5 * dof, 0.5);
    return t > 0.0 ? half_two_sided : 1.0 - half_two_sided;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b,
                    Alternative alternative) {
    if (a.size() < 2 || b.size() < 2) {
        throw NumericError("welch_t: each sample needs n >= 2 (got " +
                           std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
    }
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (ma.var == 0.0 && mb.var == 0.0) {
        throw NumericError("welch_t: both samples have zero variance");
    }
    const double va = ma.var / static_cast<double>(ma.n);
    const double vb = mb.var / static_cast<double>(mb.n);
    WelchResult r;
    r.t = (ma.mean - mb.mean) / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) /
            (va * va / static_cast<double>(ma.n - 1) + vb * vb / static_cast<double>(mb.n - 1));
    switch (alternative) {
        case Alternative::AGreater: r.p = clamp_p(t_tail(r.t, r.dof)); break;
        case Alternative::BGreater: r.p = clamp_p(t_tail(-r.t, r.dof)); break;
        case Alternative::TwoSided: r.p = clamp_p(2.0 * t_tail(std::abs(r.t), r.dof)); break;
    }
    return r;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw NumericError("pearson: size mismatch (" + std::to_string(x.size()) + " vs " +
                           std::to_string(y.size()) + ")");
    }
    const std::size_t n = x.size();
    if (n < 3) throw NumericError("pearson: needs n >= 3, got " + std::to_string(n));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw NumericError("pearson: an input has zero variance");
    }
    PearsonResult res;
    res.r = sxy / std::sqrt(sxx * syy);
    res.r = std::clamp(res.r, -1.0, 1.0);
    const double denom = 1.0 - res.r * res.r;
    if (denom <= 0.0) {
        res.p = kPFloor;
        return res;
    }
    const double t = res.r * std::sqrt(static_cast<double>(n - 2) / denom);
    res.p = clamp_p(2.0 * t_tail(std::abs(t), static_cast<double>(n - 2)));
    return res;
}

} // namespace ecgunc
