#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/numeric.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

/// SplitMix64 (Steele, Lea & Flood 2014). State transition:
///   state += 0x9E3779B97F4A7C15; z = state;
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
///   output = z ^ (z >> 31)
/// Fixed and documented so fixtures are portable across implementations.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0,1): (k + 0.5) / 2^53 with k the top 53 bits.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by inverse-CDF transform of one uniform draw.
    double normal() { return inverse_normal_cdf(uniform01()); }
};

/// Substream seed for (seed, index): one SplitMix64 step from
/// seed XOR (index + 1) * 0x9E3779B97F4A7C15. Substreams are independent of
/// evaluation order, which keeps batch results thread-count invariant.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ ((index + 1) * 0x9E3779B97F4A7C15ULL));
    return g.next();
}

enum class GeneratorKind {
    gaussian,
    bivariate_gaussian,
    student_t,
    one_factor_universe,
    ar1,
    arch1,
    beta_break,
};

/// Seeded generator configuration. params is a kind-specific real map; see
/// generate() for the recognized keys and their defaults.
struct GeneratorConfig {
    GeneratorKind kind = GeneratorKind::gaussian;
    std::map<std::string, double> params;
    std::size_t n = 0;
    std::uint64_t seed = 1;

    double param(const std::string& key, double fallback) const {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return params.count(key) > 0; }
};

namespace detail {

/// ISO-8601 label `offset` days after 2000-01-03.
inline std::string synth_date(std::size_t offset) {
    using namespace std::chrono;
    const sys_days base = sys_days{year{2000} / 1 / 3};
    const year_month_day ymd{base + days{static_cast<long>(offset)}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline std::vector<std::string> synth_dates(std::size_t n) {
    std::vector<std::string> d(n);
    for (std::size_t t = 0; t < n; ++t) d[t] = synth_date(t + 1);
    return d;
}

inline ReturnSeries make_series(std::string ticker, std::vector<double> values) {
    ReturnSeries r;
    r.ticker = std::move(ticker);
    r.dates = synth_dates(values.size());
    r.values = std::move(values);
    return r;
}

inline std::string asset_ticker(std::size_t i, std::size_t n_assets) {
    std::size_t width = 2;
    for (std::size_t v = n_assets; v >= 100; v /= 10) ++width;
    std::string digits = std::to_string(i + 1);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "A" + digits;
}

/// Linear ramp param: uses `<key>_min`/`<key>_max` when present, else `<key>`.
inline double ramp_param(const GeneratorConfig& cfg, const std::string& key, double fallback,
                         std::size_t i, std::size_t count) {
    if (cfg.has(key + "_min") || cfg.has(key + "_max")) {
        const double lo = cfg.param(key + "_min", cfg.param(key, fallback));
        const double hi = cfg.param(key + "_max", cfg.param(key, fallback));
        if (count <= 1) return 0.5 * (lo + hi);
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return cfg.param(key, fallback);
}

} // namespace detail

/// Deterministic synthetic return series for the given config. Output depends
/// only on (kind, params, n, seed). Per-series substreams come from
/// substream_seed, so multi-series kinds are evaluation-order independent.
///
/// Kinds and parameters (defaults in parentheses):
///  - gaussian: mu (0), sigma (1); one series "X".
///  - bivariate_gaussian: rho (0); series "X","Y"; per step draw z1 then z2,
///    X = z1, Y = rho*z1 + sqrt(1-rho^2)*z2.
///  - student_t: nu (4, integer >= 3); per step draw z, then nu chi-square
///    normals; X = z / sqrt(v/nu); one series "X".
///  - one_factor_universe: n_assets (20), sigma_m (0.01), beta (1) or
///    beta_min/beta_max ramp, sigma_eps (0.01) or sigma_eps_min/_max ramp;
///    series "MKT" (substream 0) plus one per asset (substream i+1) with
///    r_i = beta_i * m + eps_i.
///  - ar1: phi (0.5, |phi| < 1), sigma (1); stationary start; one series "X".
///  - arch1: alpha1 (0.5, in [0,1)), alpha0 (1 - alpha1); x_t = s_t * z_t with
///    s_t^2 = alpha0 + alpha1 * x_{t-1}^2, stationary start; one series "X".
///  - beta_break: sigma_m (1), sigma_eps (1), beta (1), beta2 (beta),
///    mean_shift (0), sigma_ratio (1), break_point (0.5, fraction of n);
///    series "MKT","STK" with STK = a_t + b_t * MKT + s_t * eps, where the
///    post-break segment uses a = mean_shift, b = beta2, s = sigma_ratio.
inline std::vector<ReturnSeries> generate(const GeneratorConfig& cfg) {
    if (cfg.n < 1) throw config_error("generate: n >= 1 required");
    switch (cfg.kind) {
    case GeneratorKind::gaussian: {
        const double mu = cfg.param("mu", 0.0);
        const double sigma = cfg.param("sigma", 1.0);
        if (!(sigma > 0.0)) throw config_error("gaussian: sigma > 0 required");
        SplitMix64 g(substream_seed(cfg.seed, 0));
        std::vector<double> x(cfg.n);
        for (auto& v : x) v = mu + sigma * g.normal();
        return {detail::make_series("X", std::move(x))};
    }
    case GeneratorKind::bivariate_gaussian: {
        const double rho = cfg.param("rho", 0.0);
        if (!(std::abs(rho) < 1.0)) throw config_error("bivariate_gaussian: |rho| < 1 required");
        const double c = std::sqrt(1.0 - rho * rho);
        SplitMix64 g(substream_seed(cfg.seed, 0));
        std::vector<double> x(cfg.n), y(cfg.n);
        for (std::size_t t = 0; t < cfg.n; ++t) {
            const double z1 = g.normal();
            const double z2 = g.normal();
            x[t] = z1;
            y[t] = rho * z1 + c * z2;
        }
        std::vector<ReturnSeries> out;
        out.push_back(detail::make_series("X", std::move(x)));
        out.push_back(detail::make_series("Y", std::move(y)));
        return out;
    }
    case GeneratorKind::student_t: {
        const double nu_real = cfg.param("nu", 4.0);
        const int nu = static_cast<int>(nu_real);
        if (!(nu_real > 2.0) || static_cast<double>(nu) != nu_real || nu < 3) {
            throw config_error("student_t: integer nu >= 3 required");
        }
        SplitMix64 g(substream_seed(cfg.seed, 0));
        std::vector<double> x(cfg.n);
        for (auto& v : x) {
            const double z = g.normal();
            double chi2 = 0.0;
            for (int i = 0; i < nu; ++i) {
                const double w = g.normal();
                chi2 += w * w;
            }
            v = z / std::sqrt(chi2 / nu);
        }
        return {detail::make_series("X", std::move(x))};
    }
    case GeneratorKind::one_factor_universe: {
        const auto n_assets = static_cast<std::size_t>(cfg.param("n_assets", 20.0));
        const double sigma_m = cfg.param("sigma_m", 0.01);
        if (n_assets < 1) throw config_error("one_factor_universe: n_assets >= 1 required");
        if (!(sigma_m > 0.0)) throw config_error("one_factor_universe: sigma_m > 0 required");
        SplitMix64 gm(substream_seed(cfg.seed, 0));
        std::vector<double> market(cfg.n);
        for (auto& v : market) v = sigma_m * gm.normal();
        std::vector<ReturnSeries> out;
        out.push_back(detail::make_series("MKT", market));
        for (std::size_t i = 0; i < n_assets; ++i) {
            const double beta = detail::ramp_param(cfg, "beta", 1.0, i, n_assets);
            const double sigma_eps = detail::ramp_param(cfg, "sigma_eps", 0.01, i, n_assets);
            if (!(sigma_eps > 0.0)) throw config_error("one_factor_universe: sigma_eps > 0 required");
            SplitMix64 gi(substream_seed(cfg.seed, i + 1));
            std::vector<double> r(cfg.n);
            for (std::size_t t = 0; t < cfg.n; ++t) {
                r[t] = beta * market[t] + sigma_eps * gi.normal();
            }
            out.push_back(detail::make_series(detail::asset_ticker(i, n_assets), std::move(r)));
        }
        return out;
    }
    case GeneratorKind::ar1: {
        const double phi = cfg.param("phi", 0.5);
        const double sigma = cfg.param("sigma", 1.0);
        if (!(std::abs(phi) < 1.0)) throw config_error("ar1: |phi| < 1 required");
        if (!(sigma > 0.0)) throw config_error("ar1: sigma > 0 required");
        SplitMix64 g(substream_seed(cfg.seed, 0));
        std::vector<double> x(cfg.n);
        double prev = sigma / std::sqrt(1.0 - phi * phi) * g.normal(); // stationary start
        for (auto& v : x) {
            prev = phi * prev + sigma * g.normal();
            v = prev;
        }
        return {detail::make_series("X", std::move(x))};
    }
    case GeneratorKind::arch1: {
        const double alpha1 = cfg.param("alpha1", 0.5);
        const double alpha0 = cfg.param("alpha0", 1.0 - alpha1);
        if (!(alpha1 >= 0.0 && alpha1 < 1.0)) throw config_error("arch1: alpha1 in [0,1) required");
        if (!(alpha0 > 0.0)) throw config_error("arch1: alpha0 > 0 required");
        SplitMix64 g(substream_seed(cfg.seed, 0));
        std::vector<double> x(cfg.n);
        double prev_sq = alpha0 / (1.0 - alpha1); // stationary start at unconditional variance
        for (auto& v : x) {
            const double s2 = alpha0 + alpha1 * prev_sq;
            v = std::sqrt(s2) * g.normal();
            prev_sq = v * v;
        }
        return {detail::make_series("X", std::move(x))};
    }
    case GeneratorKind::beta_break: {
        const double sigma_m = cfg.param("sigma_m", 1.0);
        const double sigma_eps = cfg.param("sigma_eps", 1.0);
        const double beta = cfg.param("beta", 1.0);
        const double beta2 = cfg.param("beta2", beta);
        const double mean_shift = cfg.param("mean_shift", 0.0);
        const double sigma_ratio = cfg.param("sigma_ratio", 1.0);
        const double break_point = cfg.param("break_point", 0.5);
        if (!(sigma_m > 0.0) || !(sigma_eps > 0.0) || !(sigma_ratio > 0.0)) {
            throw config_error("beta_break: variances > 0 required");
        }
        if (!(break_point > 0.0 && break_point < 1.0)) {
            throw config_error("beta_break: break_point in (0,1) required");
        }
        const auto t_break = static_cast<std::size_t>(break_point * static_cast<double>(cfg.n));
        SplitMix64 gm(substream_seed(cfg.seed, 0));
        SplitMix64 ge(substream_seed(cfg.seed, 1));
        std::vector<double> market(cfg.n), stock(cfg.n);
        for (std::size_t t = 0; t < cfg.n; ++t) {
            market[t] = sigma_m * gm.normal();
            const bool post = t >= t_break;
            const double a = post ? mean_shift : 0.0;
            const double b = post ? beta2 : beta;
            const double s = post ? sigma_eps * sigma_ratio : sigma_eps;
            stock[t] = a + b * market[t] + s * ge.normal();
        }
        std::vector<ReturnSeries> out;
        out.push_back(detail::make_series("MKT", std::move(market)));
        out.push_back(detail::make_series("STK", std::move(stock)));
        return out;
    }
    }
    throw config_error("generate: unknown kind");
}

/// Price path realizing a return series: p_0 = initial_price at first_date,
/// p_t = p_(t-1) * exp(r_t) dated like r_t.
inline PriceSeries prices_from_returns(const ReturnSeries& r, const std::string& first_date,
                                       double initial_price = 100.0) {
    if (!(initial_price > 0.0)) throw domain_error("prices_from_returns: initial price > 0");
    PriceSeries p;
    p.ticker = r.ticker;
    p.dates.reserve(r.n() + 1);
    p.prices.reserve(r.n() + 1);
    p.dates.push_back(first_date);
    p.prices.push_back(initial_price);
    double price = initial_price;
    for (std::size_t t = 0; t < r.n(); ++t) {
        price *= std::exp(r.values[t]);
        p.dates.push_back(r.dates[t]);
        p.prices.push_back(price);
    }
    return p;
}

} // namespace entrofin
