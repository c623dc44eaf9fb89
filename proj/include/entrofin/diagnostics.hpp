#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/numeric.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<int> dof_or_params;
    bool reject_at_5pct = false;
};

/// Path of a CUSUM-type stability test with its 5% significance band.
struct StabilityPath {
    std::string name;
    std::vector<int> t_index; // 0..m offsets into the recursive-residual sequence
    std::vector<double> path;
    std::vector<double> lower_bound;
    std::vector<double> upper_bound;
    bool crossed = false;
};

namespace detail {

inline TestResult make_chi_sq_result(std::string name, double statistic, int dof,
                                     std::vector<int> params) {
    TestResult t;
    t.name = std::move(name);
    t.statistic = statistic;
    t.p_value = chi_square_sf(statistic, dof);
    t.dof_or_params = std::move(params);
    t.reject_at_5pct = t.p_value < 0.05;
    return t;
}

/// Solve the SPD system A b = rhs by Cholesky, dropping near-singular
/// columns (their coefficients become 0). A is m x m row-major.
inline std::vector<double> cholesky_solve_dropping(std::vector<double> a,
                                                   std::vector<double> rhs, int m) {
    std::vector<double> l(a.size(), 0.0);
    std::vector<bool> dropped(m, false);
    double scale = 0.0;
    for (int j = 0; j < m; ++j) scale = std::max(scale, std::abs(a[j * m + j]));
    const double tol = 1e-12 * std::max(scale, 1e-300);
    for (int j = 0; j < m; ++j) {
        double d = a[j * m + j];
        for (int k = 0; k < j; ++k) d -= l[j * m + k] * l[j * m + k];
        if (d <= tol) {
            dropped[j] = true;
            l[j * m + j] = 1.0;
            for (int i = j + 1; i < m; ++i) l[i * m + j] = 0.0;
            continue;
        }
        l[j * m + j] = std::sqrt(d);
        for (int i = j + 1; i < m; ++i) {
            double s = a[i * m + j];
            for (int k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
            l[i * m + j] = s / l[j * m + j];
        }
    }
    // forward then back substitution, with dropped rows pinned to zero
    std::vector<double> y(m, 0.0);
    for (int i = 0; i < m; ++i) {
        if (dropped[i]) continue;
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= l[i * m + k] * y[k];
        y[i] = s / l[i * m + i];
    }
    std::vector<double> b(m, 0.0);
    for (int i = m - 1; i >= 0; --i) {
        if (dropped[i]) continue;
        double s = y[i];
        for (int k = i + 1; k < m; ++k) s -= l[k * m + i] * b[k];
        b[i] = s / l[i * m + i];
    }
    return b;
}

/// 5% two-sided critical value for max_t |s_t - t/m| of the CUSUM-of-squares
/// path, as c0 = g(m) / sqrt(m). g(m) follows Durbin's large-sample theory:
/// sqrt(m) * max-deviation converges to sqrt(2) * sup|Brownian bridge|, whose
/// 5% point is 1.3581 * sqrt(2) = 1.9206. Finite-m entries were Monte Carlo
/// calibrated (>= 30,000 replications per entry, statistic computed on iid
/// standard normals) and are interpolated linearly in 1/sqrt(m).
inline double cusum_sq_critical_5pct(std::size_t m) {
    struct Entry {
        std::size_t m;
        double g;
    };
    static constexpr std::array<Entry, 17> table = {{{10, 1.4928},
                                                     {15, 1.5911},
                                                     {20, 1.6466},
                                                     {30, 1.6982},
                                                     {50, 1.7526},
                                                     {75, 1.7841},
                                                     {100, 1.8070},
                                                     {150, 1.8292},
                                                     {200, 1.8411},
                                                     {300, 1.8538},
                                                     {500, 1.8669},
                                                     {750, 1.8785},
                                                     {1000, 1.8861},
                                                     {1500, 1.8900},
                                                     {2000, 1.8923},
                                                     {3000, 1.8995},
                                                     {5000, 1.9068}}};
    constexpr double g_infinity = 1.9206;
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    if (m <= table.front().m) return table.front().g / sqrt_m;
    double g;
    if (m >= table.back().m) {
        // interpolate toward the asymptote at u = 1/sqrt(m) -> 0
        const double u = 1.0 / sqrt_m;
        const double u_last = 1.0 / std::sqrt(static_cast<double>(table.back().m));
        g = g_infinity + (table.back().g - g_infinity) * (u / u_last);
    } else {
        std::size_t hi = 1;
        while (table[hi].m < m) ++hi;
        const auto& a = table[hi - 1];
        const auto& b = table[hi];
        const double ua = 1.0 / std::sqrt(static_cast<double>(a.m));
        const double ub = 1.0 / std::sqrt(static_cast<double>(b.m));
        const double u = 1.0 / sqrt_m;
        g = a.g + (b.g - a.g) * (u - ua) / (ub - ua);
    }
    return g / sqrt_m;
}

} // namespace detail

/// Jarque-Bera normality test: JB = n/6 (S^2 + K^2/4), chi-square(2) tail.
/// S and K are the divisor-n sample skewness and excess kurtosis.
inline TestResult jarque_bera(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 20) throw insufficient_data_error("jarque_bera: need n >= 20");
    const double mu = mean(x);
    const double m2 = population_variance(x, mu);
    if (!(m2 > 0.0)) throw degenerate_error("jarque_bera: zero variance");
    const double m3 = central_moment(x, mu, 3);
    const double m4 = central_moment(x, mu, 4);
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;
    const double jb = static_cast<double>(n) / 6.0 * (skew * skew + 0.25 * kurt * kurt);
    return detail::make_chi_sq_result("jarque_bera", jb, 2, {2});
}

/// Ljung-Box portmanteau test on the first `lags` autocorrelations.
inline TestResult ljung_box(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (lags < 1) throw domain_error("ljung_box: lags >= 1 required");
    if (n <= 3 * static_cast<std::size_t>(lags)) {
        throw insufficient_data_error("ljung_box: need n > 3*lags");
    }
    const double mu = mean(x);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mu;
    double denom = 0.0;
    for (double v : d) denom += v * v;
    if (!(denom > 0.0)) throw degenerate_error("ljung_box: zero variance");
    const double dn = static_cast<double>(n);
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) {
        double num = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            num += d[t] * d[t - k];
        }
        const double rho = num / denom;
        q += rho * rho / (dn - k);
    }
    q *= dn * (dn + 2.0);
    return detail::make_chi_sq_result("ljung_box", q, lags, {lags});
}

/// Engle ARCH LM test: regress x_t^2 on its own lags, LM = n_aux * R^2,
/// chi-square(lags) tail.
inline TestResult engle_arch(std::span<const double> x, int lags) {
    const std::size_t n = x.size();
    if (lags < 1) throw domain_error("engle_arch: lags >= 1 required");
    if (n <= 3 * static_cast<std::size_t>(lags) + 1) {
        throw insufficient_data_error("engle_arch: need n > 3*lags + 1");
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * x[i];

    const std::size_t q = static_cast<std::size_t>(lags);
    const std::size_t n_aux = n - q;
    double ybar = 0.0;
    for (std::size_t t = q; t < n; ++t) ybar += z[t];
    ybar /= static_cast<double>(n_aux);
    double sst = 0.0;
    for (std::size_t t = q; t < n; ++t) sst += (z[t] - ybar) * (z[t] - ybar);
    // squares that are constant to machine precision carry no ARCH signal;
    // without this guard the auxiliary fit runs on pure rounding noise
    const double sq_scale = std::max(std::abs(ybar), 1e-300);
    if (sst <= static_cast<double>(n_aux) * (1e-14 * sq_scale) * (1e-14 * sq_scale)) {
        sst = 0.0;
    }

    double r_squared = 0.0;
    if (sst > 0.0) {
        // centered regressor columns: col k = z_{t-1-k} over t = q..n-1
        std::vector<double> colmean(q, 0.0);
        for (std::size_t k = 0; k < q; ++k) {
            for (std::size_t t = q; t < n; ++t) colmean[k] += z[t - 1 - k];
            colmean[k] /= static_cast<double>(n_aux);
        }
        std::vector<double> a(q * q, 0.0), rhs(q, 0.0);
        for (std::size_t t = q; t < n; ++t) {
            const double dy = z[t] - ybar;
            for (std::size_t k = 0; k < q; ++k) {
                const double dk = z[t - 1 - k] - colmean[k];
                rhs[k] += dk * dy;
                for (std::size_t l = 0; l <= k; ++l) {
                    a[k * q + l] += dk * (z[t - 1 - l] - colmean[l]);
                }
            }
        }
        for (std::size_t k = 0; k < q; ++k) {
            for (std::size_t l = k + 1; l < q; ++l) a[k * q + l] = a[l * q + k];
        }
        const auto b = detail::cholesky_solve_dropping(a, rhs, static_cast<int>(q));
        double explained = 0.0;
        for (std::size_t k = 0; k < q; ++k) explained += b[k] * rhs[k];
        r_squared = std::clamp(explained / sst, 0.0, 1.0);
    }
    const double lm = static_cast<double>(n_aux) * r_squared;
    return detail::make_chi_sq_result("engle_arch", lm, lags, {lags});
}

/// Standardized one-step-ahead prediction errors of the recursively re-fit
/// two-parameter regression of stock on market. Under a stable model with
/// normal errors these are iid N(0, sigma^2).
inline std::vector<double> recursive_residuals(const ReturnSeries& stock,
                                               const ReturnSeries& market) {
    require_aligned(stock, market);
    const std::size_t n = stock.n();
    if (n < 12) throw insufficient_data_error("recursive_residuals: need n >= 12");
    const auto& y = stock.values;
    const auto& x = market.values;

    // S = X'X and c = X'y over the growing window, 2x2 with design (1, x_t)
    double s00 = 0.0, s01 = 0.0, s11 = 0.0, c0 = 0.0, c1 = 0.0;
    double xscale = 0.0;
    for (double v : x) xscale = std::max(xscale, std::abs(v));
    const double det_tol = 1e-28 * std::max(xscale * xscale, 1e-300);

    std::size_t t = 0;
    for (; t < n; ++t) {
        s00 += 1.0;
        s01 += x[t];
        s11 += x[t] * x[t];
        c0 += y[t];
        c1 += x[t] * y[t];
        if (t >= 1 && s00 * s11 - s01 * s01 > det_tol * s00 * s00) break;
    }
    if (t >= n - 1) {
        throw degenerate_error("recursive_residuals: regressor has no variation");
    }
    ++t; // first prediction target

    std::vector<double> w;
    w.reserve(n - t);
    for (; t < n; ++t) {
        const double det = s00 * s11 - s01 * s01;
        const double i00 = s11 / det, i01 = -s01 / det, i11 = s00 / det;
        const double beta1 = i01 * c0 + i11 * c1; // slope
        const double beta0 = i00 * c0 + i01 * c1; // intercept
        const double pred = beta0 + beta1 * x[t];
        const double f = 1.0 + (i00 + 2.0 * i01 * x[t] + i11 * x[t] * x[t]);
        w.push_back((y[t] - pred) / std::sqrt(f));
        s00 += 1.0;
        s01 += x[t];
        s11 += x[t] * x[t];
        c0 += y[t];
        c1 += x[t] * y[t];
    }
    return w;
}

/// CUSUM of recursive residuals with the 5% Brown-Durbin-Evans lines
/// +/- 0.948 (sqrt(m) + 2 j / sqrt(m)).
inline StabilityPath cusum(std::span<const double> w) {
    const std::size_t m = w.size();
    if (m < 2) throw insufficient_data_error("cusum: need at least 2 recursive residuals");
    const bool all_zero = std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; });
    const double mu = mean(w);
    double ss = 0.0;
    for (double v : w) ss += (v - mu) * (v - mu);
    // an exactly-fitting model gives w == 0: report the flat path; a nonzero
    // constant w has undefined scale and is an error
    const double sigma = all_zero ? 1.0 : std::sqrt(ss / static_cast<double>(m - 1));
    if (!(sigma > 0.0)) throw degenerate_error("cusum: recursive residuals have zero variance");

    StabilityPath p;
    p.name = "CUSUM";
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    p.t_index.resize(m + 1);
    p.path.resize(m + 1);
    p.lower_bound.resize(m + 1);
    p.upper_bound.resize(m + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
        if (j > 0) acc += w[j - 1] / sigma;
        const double bound = 0.948 * (sqrt_m + 2.0 * static_cast<double>(j) / sqrt_m);
        p.t_index[j] = static_cast<int>(j);
        p.path[j] = acc;
        p.lower_bound[j] = -bound;
        p.upper_bound[j] = bound;
        if (p.path[j] < p.lower_bound[j] || p.path[j] > p.upper_bound[j]) p.crossed = true;
    }
    return p;
}

/// CUSUM of squared recursive residuals against the t-proportional line with
/// the 5% band from cusum_sq_critical_5pct. The path runs exactly from 0 to 1.
inline StabilityPath cusum_sq(std::span<const double> w) {
    const std::size_t m = w.size();
    if (m < 1) throw insufficient_data_error("cusum_sq: empty residual vector");
    std::vector<double> prefix(m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        acc += w[j] * w[j];
        prefix[j] = acc;
    }
    const double total = prefix.back();
    if (!(total > 0.0)) throw degenerate_error("cusum_sq: all recursive residuals are zero");

    StabilityPath p;
    p.name = "CUSUM_Q";
    const double c0 = detail::cusum_sq_critical_5pct(m);
    p.t_index.resize(m + 1);
    p.path.resize(m + 1);
    p.lower_bound.resize(m + 1);
    p.upper_bound.resize(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double center = static_cast<double>(j) / static_cast<double>(m);
        p.t_index[j] = static_cast<int>(j);
        p.path[j] = j == 0 ? 0.0 : prefix[j - 1] / total;
        p.lower_bound[j] = center - c0;
        p.upper_bound[j] = center + c0;
        if (p.path[j] < p.lower_bound[j] || p.path[j] > p.upper_bound[j]) p.crossed = true;
    }
    return p;
}

} // namespace entrofin
