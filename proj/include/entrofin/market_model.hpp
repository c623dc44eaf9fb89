#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/numeric.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

/// OLS market-model fit with the variance decomposition
/// total = beta^2 * sigma_m^2 + sigma_eps^2 (population-variance convention).
struct MarketModelFit {
    double alpha = 0.0;
    double beta = 0.0;
    double r = 0.0;         // linear correlation of the (excess) series
    double r_squared = 0.0;
    double sigma_m_sq = 0.0;
    double systematic_risk = 0.0; // beta^2 * sigma_m^2
    double specific_risk = 0.0;   // population variance of residuals
    double total_variance = 0.0;
    std::vector<double> residuals;
    std::size_t n = 0;
    bool condition_warning = false; // design condition number above 1e8
};

struct RiskDecomposition {
    double systematic = 0.0;
    double specific = 0.0;
    double total = 0.0;
    double systematic_share = 0.0;
};

namespace detail {

/// Core OLS on excess returns. The intercept is handled by centering, i.e.
/// Gram-Schmidt orthogonalization of the regressor against the constant
/// column, rather than solving the raw normal equations.
inline MarketModelFit fit_excess(std::span<const double> stock, std::span<const double> market) {
    const std::size_t n = stock.size();
    if (n < 30) throw insufficient_data_error("fit_market_model: need n >= 30");

    const double mx = mean(market);
    const double my = mean(stock);
    std::vector<double> dx(n), dy(n), dxy(n), dxx(n), dyy(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = market[i] - mx;
        dy[i] = stock[i] - my;
        dxy[i] = dx[i] * dy[i];
        dxx[i] = dx[i] * dx[i];
        dyy[i] = dy[i] * dy[i];
    }
    const double sxx = compensated_sum(dxx);
    const double sxy = compensated_sum(dxy);
    const double syy = compensated_sum(dyy);
    if (!(sxx > 0.0)) {
        throw degenerate_error("fit_market_model: market excess returns are all equal");
    }

    MarketModelFit fit;
    fit.n = n;
    fit.beta = sxy / sxx;
    fit.alpha = my - fit.beta * mx;
    fit.residuals.resize(n);
    std::vector<double> res_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = stock[i] - fit.alpha - fit.beta * market[i];
        res_sq[i] = fit.residuals[i] * fit.residuals[i];
    }
    const double dn = static_cast<double>(n);
    fit.sigma_m_sq = sxx / dn;
    fit.total_variance = syy / dn;
    fit.systematic_risk = fit.beta * fit.beta * fit.sigma_m_sq;
    fit.specific_risk = compensated_sum(res_sq) / dn;
    if (syy > 0.0) {
        fit.r = sxy / std::sqrt(sxx * syy);
        fit.r_squared = fit.r * fit.r;
    }

    // condition number of the [1, x] design via the 2x2 cross-product matrix
    const double sx = mx * dn;
    const double sxx_raw = sxx + mx * mx * dn;
    const double tr = dn + sxx_raw;
    const double det = dn * sxx_raw - sx * sx;
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    const double lam_max = 0.5 * (tr + disc);
    const double lam_min = 0.5 * (tr - disc);
    if (!(lam_min > 0.0) || std::sqrt(lam_max / lam_min) > 1e8) {
        fit.condition_warning = true;
    }
    return fit;
}

} // namespace detail

/// Market model on plain returns (risk-free rate zero).
inline MarketModelFit fit_market_model(const ReturnSeries& stock, const ReturnSeries& market) {
    require_aligned(stock, market);
    return detail::fit_excess(stock.values, market.values);
}

/// Market model on excess returns over a constant risk-free rate.
inline MarketModelFit fit_market_model(const ReturnSeries& stock, const ReturnSeries& market,
                                       double risk_free) {
    require_aligned(stock, market);
    const std::size_t n = stock.n();
    std::vector<double> ys(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = stock.values[i] - risk_free;
        xs[i] = market.values[i] - risk_free;
    }
    return detail::fit_excess(ys, xs);
}

/// Market model on excess returns over a per-period risk-free series.
inline MarketModelFit fit_market_model(const ReturnSeries& stock, const ReturnSeries& market,
                                       const ReturnSeries& risk_free) {
    require_aligned(stock, market);
    require_aligned(stock, risk_free);
    const std::size_t n = stock.n();
    std::vector<double> ys(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = stock.values[i] - risk_free.values[i];
        xs[i] = market.values[i] - risk_free.values[i];
    }
    return detail::fit_excess(ys, xs);
}

/// Re-derives both risk components from the stored fit and asserts the
/// variance-decomposition identity before reporting shares.
inline RiskDecomposition risk_decomposition(const MarketModelFit& fit) {
    RiskDecomposition d;
    d.systematic = fit.beta * fit.beta * fit.sigma_m_sq;
    std::vector<double> res_sq(fit.residuals.size());
    for (std::size_t i = 0; i < fit.residuals.size(); ++i) {
        res_sq[i] = fit.residuals[i] * fit.residuals[i];
    }
    d.specific = compensated_sum(res_sq) / static_cast<double>(fit.n);
    d.total = fit.total_variance;
    const double residual = std::abs(d.total - d.systematic - d.specific);
    const double tol = 1e-12 * std::max(d.total, 1e-300);
    if (residual > tol && residual > 1e-15 * std::max({d.systematic, d.specific, 1.0})) {
        throw internal_error("risk_decomposition: variance identity violated by " +
                             std::to_string(residual));
    }
    d.systematic_share = d.total > 0.0 ? d.systematic / d.total : 1.0;
    return d;
}

} // namespace entrofin
