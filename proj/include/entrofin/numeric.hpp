#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "entrofin/errors.hpp"

namespace entrofin {

/// Neumaier-compensated summation. Deterministic for a fixed element order,
/// which the reproducibility guarantees elsewhere rely on.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw insufficient_data_error("mean: empty input");
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

/// Central moment of order k with divisor n.
inline double central_moment(std::span<const double> xs, double mu, int k) {
    std::vector<double> terms(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        terms[i] = std::pow(xs[i] - mu, k);
    }
    return compensated_sum(terms) / static_cast<double>(xs.size());
}

/// Population variance (divisor n).
inline double population_variance(std::span<const double> xs, double mu) {
    std::vector<double> terms(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mu;
        terms[i] = d * d;
    }
    return compensated_sum(terms) / static_cast<double>(xs.size());
}

/// Average ranks in 1..n; ties receive the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Boundary of the p = num/den sample quantile over a sorted sample,
/// midpoint-interpolated: if n*p is an integer m the boundary sits halfway
/// between the m-th and (m+1)-th order statistics, otherwise on the
/// ceil(n*p)-th order statistic.
inline double quantile_boundary(std::span<const double> sorted, std::size_t num, std::size_t den) {
    const std::size_t n = sorted.size();
    const std::size_t prod = num * n;
    if (prod % den == 0) {
        const std::size_t m = prod / den; // 1-based
        return 0.5 * (sorted[m - 1] + sorted[m]);
    }
    const std::size_t m = prod / den + 1; // ceil, 1-based
    return sorted[m - 1];
}

inline double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw insufficient_data_error("pearson_correlation: need two equal-length series, n >= 2");
    }
    const double mx = mean(xs);
    const double my = mean(ys);
    std::vector<double> xy(xs.size()), xx(xs.size()), yy(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        xy[i] = dx * dy;
        xx[i] = dx * dx;
        yy[i] = dy * dy;
    }
    const double sxy = compensated_sum(xy);
    const double sxx = compensated_sum(xx);
    const double syy = compensated_sum(yy);
    if (sxx <= 0.0 || syy <= 0.0) {
        throw degenerate_error("pearson_correlation: zero-variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman_rank_correlation(std::span<const double> xs, std::span<const double> ys) {
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson_correlation(rx, ry);
}

namespace detail {

/// Regularized lower incomplete gamma P(a, x) by power series.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction.
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

/// Regularized lower incomplete gamma P(a, x), series/continued-fraction split at x = a + 1.
inline double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw domain_error("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw domain_error("regularized_gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_cf(a, x);
}

/// Upper-tail probability of a chi-square(dof) variate.
inline double chi_square_sf(double x, int dof) {
    if (dof < 1) throw domain_error("chi_square_sf: dof >= 1");
    if (x <= 0.0) return 1.0;
    return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

inline double chi_square_cdf(double x, int dof) {
    return 1.0 - chi_square_sf(x, dof);
}

/// Chi-square quantile by bisection on the CDF.
inline double chi_square_quantile(double p, int dof) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("chi_square_quantile: p in (0,1)");
    double lo = 0.0;
    double hi = static_cast<double>(dof);
    while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi_square_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16). Accurate to ~1e-15
/// over (0,1); used for the reproducible inverse-CDF normal generator.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("inverse_normal_cdf: p in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

} // namespace entrofin
