#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/numeric.hpp"

namespace entrofin {

/// Closing-price history for one ticker. Dates are opaque sortable labels;
/// the library never does calendar arithmetic on them.
struct PriceSeries {
    std::string ticker;
    std::vector<std::string> dates;
    std::vector<double> prices;

    void validate() const {
        if (dates.size() != prices.size()) {
            throw data_error("PriceSeries " + ticker + ": dates/prices length mismatch");
        }
        for (std::size_t i = 0; i < prices.size(); ++i) {
            if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
                throw data_error("PriceSeries " + ticker + ": non-positive price at " + dates[i]);
            }
            if (i > 0 && !(dates[i - 1] < dates[i])) {
                throw data_error("PriceSeries " + ticker + ": dates not strictly increasing at " + dates[i]);
            }
        }
    }
};

/// Log-return series; one element shorter than the prices it came from.
struct ReturnSeries {
    std::string ticker;
    std::vector<std::string> dates;
    std::vector<double> values;

    std::size_t n() const { return values.size(); }
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
    double std_dev = 0.0;
    std::optional<double> skewness;        // unset when variance is zero
    std::optional<double> excess_kurtosis; // unset when variance is zero
};

enum class VarianceDivisor { population, sample };

/// values[t] = ln(prices[t+1] / prices[t]); dates carry the later date of each pair.
inline ReturnSeries log_returns(const PriceSeries& p) {
    p.validate();
    if (p.prices.size() < 2) {
        throw insufficient_data_error("log_returns: series " + p.ticker + " has fewer than 2 prices");
    }
    ReturnSeries r;
    r.ticker = p.ticker;
    r.dates.assign(p.dates.begin() + 1, p.dates.end());
    r.values.resize(p.prices.size() - 1);
    for (std::size_t t = 0; t + 1 < p.prices.size(); ++t) {
        r.values[t] = std::log(p.prices[t + 1] / p.prices[t]);
    }
    return r;
}

/// Moment summary. Central moments always use divisor n; the divisor flag
/// affects only variance/std_dev.
inline SummaryStats describe(const ReturnSeries& r,
                             VarianceDivisor divisor = VarianceDivisor::population) {
    const std::size_t n = r.n();
    if (n < 2) throw insufficient_data_error("describe: need n >= 2");
    SummaryStats s;
    s.n = n;
    s.mean = mean(r.values);
    const double m2 = population_variance(r.values, s.mean);
    s.variance = (divisor == VarianceDivisor::population)
                     ? m2
                     : m2 * static_cast<double>(n) / static_cast<double>(n - 1);
    s.std_dev = std::sqrt(s.variance);
    if (m2 > 0.0) {
        const double m3 = central_moment(r.values, s.mean, 3);
        const double m4 = central_moment(r.values, s.mean, 4);
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

/// Restrict two series to their common dates (two-pointer merge over the
/// sorted date labels). Result series are date-aligned element by element.
inline std::pair<ReturnSeries, ReturnSeries> align(const ReturnSeries& a, const ReturnSeries& b) {
    ReturnSeries ra, rb;
    ra.ticker = a.ticker;
    rb.ticker = b.ticker;
    std::size_t i = 0, j = 0;
    while (i < a.n() && j < b.n()) {
        if (a.dates[i] < b.dates[j]) {
            ++i;
        } else if (b.dates[j] < a.dates[i]) {
            ++j;
        } else {
            ra.dates.push_back(a.dates[i]);
            ra.values.push_back(a.values[i]);
            rb.dates.push_back(b.dates[j]);
            rb.values.push_back(b.values[j]);
            ++i;
            ++j;
        }
    }
    return {std::move(ra), std::move(rb)};
}

/// Restrict every series to the dates common to all of them.
inline std::vector<ReturnSeries> align_all(const std::vector<ReturnSeries>& universe) {
    if (universe.empty()) return {};
    std::vector<std::string> common = universe.front().dates;
    for (std::size_t s = 1; s < universe.size(); ++s) {
        std::vector<std::string> next;
        std::size_t i = 0, j = 0;
        const auto& d = universe[s].dates;
        while (i < common.size() && j < d.size()) {
            if (common[i] < d[j]) {
                ++i;
            } else if (d[j] < common[i]) {
                ++j;
            } else {
                next.push_back(common[i]);
                ++i;
                ++j;
            }
        }
        common = std::move(next);
    }
    std::vector<ReturnSeries> out;
    out.reserve(universe.size());
    for (const auto& s : universe) {
        ReturnSeries r;
        r.ticker = s.ticker;
        r.dates = common;
        r.values.reserve(common.size());
        std::size_t i = 0;
        for (std::size_t j = 0; j < s.dates.size() && i < common.size(); ++j) {
            if (s.dates[j] == common[i]) {
                r.values.push_back(s.values[j]);
                ++i;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Throws unless the two series are element-wise date-aligned.
inline void require_aligned(const ReturnSeries& a, const ReturnSeries& b) {
    if (a.n() != b.n()) {
        throw alignment_error("series " + a.ticker + " and " + b.ticker + " differ in length");
    }
    if (a.dates != b.dates) {
        throw alignment_error("series " + a.ticker + " and " + b.ticker + " are not date-aligned");
    }
}

} // namespace entrofin
