#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "entrofin/entropy.hpp"
#include "entrofin/errors.hpp"
#include "entrofin/series.hpp"
#include "entrofin/synth.hpp"

namespace entrofin {

struct Portfolio {
    std::vector<std::string> tickers;
    std::vector<double> weights; // non-negative, sum to 1

    void validate() const {
        if (tickers.size() != weights.size()) {
            throw domain_error("Portfolio: tickers/weights length mismatch");
        }
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw domain_error("Portfolio: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw domain_error("Portfolio: weights sum to " + std::to_string(sum));
        }
    }
};

inline Portfolio equal_weight_portfolio(std::vector<std::string> tickers) {
    Portfolio p;
    const double w = 1.0 / static_cast<double>(tickers.size());
    p.weights.assign(tickers.size(), w);
    p.tickers = std::move(tickers);
    return p;
}

/// Weighted combination of member log returns. Exact only for simple
/// returns; kept as the convention that makes the entropy/std-dev
/// diversification comparison well-defined on log-return inputs.
inline ReturnSeries portfolio_returns(const std::vector<ReturnSeries>& universe,
                                      const Portfolio& p) {
    p.validate();
    if (p.tickers.empty()) throw domain_error("portfolio_returns: empty portfolio");
    std::vector<const ReturnSeries*> members;
    members.reserve(p.tickers.size());
    for (const auto& t : p.tickers) {
        const ReturnSeries* found = nullptr;
        for (const auto& s : universe) {
            if (s.ticker == t) {
                found = &s;
                break;
            }
        }
        if (!found) throw domain_error("portfolio_returns: unknown ticker " + t);
        members.push_back(found);
    }
    for (std::size_t i = 1; i < members.size(); ++i) {
        require_aligned(*members[0], *members[i]);
    }
    ReturnSeries out;
    out.ticker = "PORTFOLIO";
    out.dates = members[0]->dates;
    out.values.assign(members[0]->n(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double w = p.weights[i];
        for (std::size_t t = 0; t < out.values.size(); ++t) {
            out.values[t] += w * members[i]->values[t];
        }
    }
    return out;
}

struct DiversificationCurve {
    std::vector<int> k;
    std::vector<double> avg_std;
    std::vector<double> avg_entropy; // nats
    int replications = 0;
    std::uint64_t seed = 0;
};

namespace detail {

/// k distinct indices from 0..n-1 by partial Fisher-Yates on the substream.
inline std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, SplitMix64& g) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(g.uniform01() *
                                                           static_cast<double>(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace detail

/// Random equal-weight portfolio experiment: for each size k = 1..max_k,
/// draws `replications` seeded k-subsets and records the mean standard
/// deviation and mean differential entropy of the portfolio returns. The
/// random stream is split per (k, replication), so results do not depend on
/// evaluation order. k == universe size has a single possible subset and is
/// evaluated once.
inline DiversificationCurve diversification_curve(const std::vector<ReturnSeries>& universe,
                                                  int max_k, int replications,
                                                  std::uint64_t seed, HistogramSpec spec = {}) {
    const std::size_t n_assets = universe.size();
    if (max_k < 1 || static_cast<std::size_t>(max_k) > n_assets) {
        throw domain_error("diversification_curve: need 1 <= max_k <= universe size");
    }
    if (replications < 1) throw domain_error("diversification_curve: replications >= 1");
    for (std::size_t i = 1; i < n_assets; ++i) require_aligned(universe[0], universe[i]);

    DiversificationCurve curve;
    curve.replications = replications;
    curve.seed = seed;
    for (int k = 1; k <= max_k; ++k) {
        const bool exhaustive = static_cast<std::size_t>(k) == n_assets;
        const int reps = exhaustive ? 1 : replications;
        std::vector<double> stds(reps), ents(reps);
        for (int rep = 0; rep < reps; ++rep) {
            SplitMix64 g(substream_seed(seed, static_cast<std::uint64_t>(k) * 0x10000ULL +
                                                  static_cast<std::uint64_t>(rep)));
            const auto idx = detail::sample_subset(n_assets, static_cast<std::size_t>(k), g);
            std::vector<std::string> tickers(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) tickers[i] = universe[idx[i]].ticker;
            const ReturnSeries port = portfolio_returns(universe, equal_weight_portfolio(tickers));
            const SummaryStats s = describe(port);
            stds[rep] = s.std_dev;
            ents[rep] = differential_entropy(port, spec).value;
        }
        curve.k.push_back(k);
        curve.avg_std.push_back(compensated_sum(stds) / reps);
        curve.avg_entropy.push_back(compensated_sum(ents) / reps);
    }
    return curve;
}

} // namespace entrofin
