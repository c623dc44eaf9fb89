#pragma once

// Shared fixture builders and oracles for the test suites. Everything here
// is deliberately independent of the library implementation paths it is
// used to check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "entrofin/csv.hpp"
#include "entrofin/series.hpp"
#include "entrofin/synth.hpp"

namespace test_fixtures {

inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("entrofin_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Brute-force plug-in MI of a discrete sample: direct double sum over the
/// contingency table, written independently of the grid estimator.
inline double contingency_mi(const std::vector<int>& xs, const std::vector<int>& ys,
                             int support) {
    std::vector<double> joint(static_cast<std::size_t>(support) * support, 0.0);
    std::vector<double> px(support, 0.0), py(support, 0.0);
    const double n = static_cast<double>(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        joint[xs[t] * support + ys[t]] += 1.0;
        px[xs[t]] += 1.0;
        py[ys[t]] += 1.0;
    }
    double mi = 0.0;
    for (int i = 0; i < support; ++i) {
        for (int j = 0; j < support; ++j) {
            const double c = joint[i * support + j];
            if (c == 0.0) continue;
            mi += (c / n) * std::log((c / n) / ((px[i] / n) * (py[j] / n)));
        }
    }
    return mi;
}

/// 4x4-support sample with exactly balanced marginals: a sum of seeded
/// permutation matrices, so every value holds exactly n/4 of each margin and
/// the equiprobable 4-bin grid separates the support values one per cell.
inline std::pair<std::vector<int>, std::vector<int>>
balanced_discrete_sample(std::size_t n_perms, std::uint64_t seed) {
    std::vector<int> xs, ys;
    entrofin::SplitMix64 g(seed);
    for (std::size_t p = 0; p < n_perms; ++p) {
        std::vector<int> perm = {0, 1, 2, 3};
        for (int i = 3; i > 0; --i) {
            const int j = static_cast<int>(g.uniform01() * (i + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int v = 0; v < 4; ++v) {
            xs.push_back(v);
            ys.push_back(perm[v]);
        }
    }
    for (std::size_t i = xs.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(g.uniform01() * static_cast<double>(i + 1));
        std::swap(xs[i], xs[j]);
        std::swap(ys[i], ys[j]);
    }
    return {std::move(xs), std::move(ys)};
}

inline entrofin::ReturnSeries series_from_ints(const std::vector<int>& v, std::string ticker) {
    entrofin::ReturnSeries r;
    r.ticker = std::move(ticker);
    r.values.reserve(v.size());
    r.dates.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r.values.push_back(static_cast<double>(v[i]));
        r.dates.push_back("d" + std::to_string(100000 + i));
    }
    return r;
}

/// One-factor universe price CSV (benchmark "MKT" plus n_assets stocks) with
/// linearly ramped loadings and idiosyncratic volatilities.
inline std::filesystem::path write_universe_csv(const std::filesystem::path& file,
                                                std::size_t n, std::size_t n_assets,
                                                std::uint64_t seed, double sigma_m,
                                                double beta_min, double beta_max,
                                                double sigma_eps_min, double sigma_eps_max) {
    entrofin::GeneratorConfig cfg;
    cfg.kind = entrofin::GeneratorKind::one_factor_universe;
    cfg.n = n;
    cfg.seed = seed;
    cfg.params["n_assets"] = static_cast<double>(n_assets);
    cfg.params["sigma_m"] = sigma_m;
    cfg.params["beta_min"] = beta_min;
    cfg.params["beta_max"] = beta_max;
    cfg.params["sigma_eps_min"] = sigma_eps_min;
    cfg.params["sigma_eps_max"] = sigma_eps_max;
    const auto series = entrofin::generate(cfg);
    std::vector<entrofin::PriceSeries> prices;
    prices.reserve(series.size());
    for (const auto& s : series) {
        prices.push_back(entrofin::prices_from_returns(s, "2000-01-03"));
    }
    entrofin::write_prices_wide(file.string(), prices);
    return file;
}

} // namespace test_fixtures
