#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "imba/error.hpp"

namespace imba::stats {

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Unbiased (n-1) sample variance.
inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz iteration).
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-12;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::betacf(a, b, x) / a;
    }
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-tailed p-value for a Student-t statistic with df degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
    return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse of normal_cdf by bisection; good to ~1e-12 which is ample here.
inline double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw invalid_argument_error("normal_quantile: p must be in (0,1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct CorrelationResult {
    double r = 0.0;
    double p_two_tailed = 1.0;
    double ci_low = -1.0;
    double ci_high = 1.0;
    std::size_t n = 0;
};

inline CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw invalid_argument_error("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw undefined_correlation_error("pearson: need n >= 3");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw undefined_correlation_error("pearson: constant input");
    CorrelationResult res;
    res.n = n;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - 2);
    if (std::fabs(res.r) >= 1.0) {
        res.p_two_tailed = 0.0;
    } else {
        const double t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
        res.p_two_tailed = student_t_two_tailed(t, df);
    }
    if (n > 3 && std::fabs(res.r) < 1.0) {
        const double z = std::atanh(res.r);
        const double half = 1.96 / std::sqrt(static_cast<double>(n - 3));
        res.ci_low = std::tanh(z - half);
        res.ci_high = std::tanh(z + half);
    } else {
        res.ci_low = res.r >= 1.0 ? 1.0 : -1.0;
        res.ci_high = res.r <= -1.0 ? -1.0 : 1.0;
    }
    return res;
}

// Average ranks, ties averaged (1-based).
inline std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline CorrelationResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw invalid_argument_error("spearman: length mismatch");
    return pearson(ranks(x), ranks(y));
}

// Step-up FDR: reject the k smallest p-values where k is the largest i with
// p_(i) <= q*i/m. Returns flags in input order.
inline std::vector<bool> benjamini_hochberg(const std::vector<double>& p, double q = 0.05) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::size_t cutoff = 0;
    for (std::size_t i = 1; i <= m; ++i) {
        if (p[order[i - 1]] <= q * static_cast<double>(i) / static_cast<double>(m)) cutoff = i;
    }
    std::vector<bool> reject(m, false);
    for (std::size_t i = 0; i < cutoff; ++i) reject[order[i]] = true;
    return reject;
}

struct EffectSize {
    double d = 0.0;
    std::string label;
};

inline std::string effect_label(double d) {
    const double a = std::fabs(d);
    if (a < 0.2) return "negligible";
    if (a < 0.5) return "small";
    if (a < 0.8) return "medium";
    return "large";
}

inline EffectSize cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw invalid_argument_error("cohens_d: each group needs n >= 2");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0));
    if (pooled == 0.0) throw undefined_effect_error("cohens_d: zero pooled standard deviation");
    EffectSize e;
    e.d = (mean(a) - mean(b)) / pooled;
    e.label = effect_label(e.d);
    return e;
}

// Fisher-z power approximation for detecting a correlation rho at sample size n.
inline double power_correlation(double rho, std::size_t n, double alpha = 0.05) {
    if (std::fabs(rho) >= 1.0) throw invalid_argument_error("power_correlation: |rho| must be < 1");
    if (n < 4) throw invalid_argument_error("power_correlation: n must be >= 4");
    const double z = std::fabs(std::atanh(rho));
    const double crit = normal_quantile(1.0 - alpha / 2.0);
    return normal_cdf(z * std::sqrt(static_cast<double>(n - 3)) - crit);
}

} // namespace imba::stats
