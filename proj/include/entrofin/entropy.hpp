#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/histogram.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

enum class EntropyEstimator { plug_in_equidistant, plug_in_equiprobable, parametric_normal };

struct EntropyEstimate {
    double value = 0.0; // nats
    EntropyEstimator estimator = EntropyEstimator::plug_in_equiprobable;
    int bins_used = 0;  // per axis for joint/conditional estimates
    std::size_t n = 0;
};

/// Shannon entropy of a discrete distribution in nats; 0 * ln 0 := 0.
inline double entropy_discrete(std::span<const double> p) {
    double sum = 0.0;
    double h = 0.0;
    for (double pi : p) {
        if (pi < 0.0) throw domain_error("entropy_discrete: negative probability");
        sum += pi;
        if (pi > 0.0) h -= pi * std::log(pi);
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw domain_error("entropy_discrete: probabilities sum to " + std::to_string(sum));
    }
    return h;
}

/// Differential entropy of a normal with standard deviation sigma: ln(sqrt(2*pi*e)*sigma).
inline double normal_entropy(double sigma) {
    if (!(sigma > 0.0)) throw domain_error("normal_entropy: sigma > 0 required");
    constexpr double half_ln_two_pi_e = 1.4189385332046727;
    return half_ln_two_pi_e + std::log(sigma);
}

namespace detail {

struct HistogramParts {
    double discrete = 0.0;   // -sum p ln p
    double width = 0.0;      // sum p ln w, converts to a differential estimate
    int nonempty = 0;
};

inline HistogramParts histogram_parts(std::span<const std::size_t> counts,
                                      std::span<const double> edges, std::size_t n) {
    HistogramParts parts;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        const double p = static_cast<double>(counts[i]) / static_cast<double>(n);
        const double w = edges[i + 1] - edges[i];
        if (!(w > 0.0)) {
            throw degenerate_error("differential entropy: occupied cell of zero width (heavy ties)");
        }
        parts.discrete -= p * std::log(p);
        parts.width += p * std::log(w);
        ++parts.nonempty;
    }
    return parts;
}

inline double miller_madow_term(int nonempty, std::size_t n) {
    return (static_cast<double>(nonempty) - 1.0) / (2.0 * static_cast<double>(n));
}

inline EntropyEstimator scheme_tag(BinScheme scheme) {
    return scheme == BinScheme::equidistant ? EntropyEstimator::plug_in_equidistant
                                            : EntropyEstimator::plug_in_equiprobable;
}

/// Joint plug-in entropy of a 2-D grid, with cell-area correction.
inline double grid_joint_entropy(const Grid2D& g, bool miller_madow = false) {
    double h = 0.0;
    int nonempty = 0;
    for (int i = 0; i < g.bx(); ++i) {
        const double wx = g.x_edges[i + 1] - g.x_edges[i];
        for (int j = 0; j < g.by(); ++j) {
            const std::size_t c = g.count(i, j);
            if (c == 0) continue;
            const double wy = g.y_edges[j + 1] - g.y_edges[j];
            if (!(wx > 0.0) || !(wy > 0.0)) {
                throw degenerate_error("joint entropy: occupied cell of zero area (heavy ties)");
            }
            const double p = static_cast<double>(c) / static_cast<double>(g.n);
            h += -p * std::log(p) + p * std::log(wx * wy);
            ++nonempty;
        }
    }
    if (miller_madow) h += miller_madow_term(nonempty, g.n);
    return h;
}

/// Marginal plug-in entropy read off one axis of a shared grid.
inline double grid_marginal_entropy(const Grid2D& g, bool x_axis, bool miller_madow = false) {
    const auto counts = x_axis ? g.x_marginal() : g.y_marginal();
    const auto& edges = x_axis ? g.x_edges : g.y_edges;
    const auto parts = histogram_parts(counts, edges, g.n);
    double h = parts.discrete + parts.width;
    if (miller_madow) h += miller_madow_term(parts.nonempty, g.n);
    return h;
}

} // namespace detail

/// Histogram plug-in estimate of differential entropy: -sum p ln p + sum p ln w.
/// The width term makes the value comparable with ln(sigma) and with the
/// parametric normal baseline.
inline EntropyEstimate differential_entropy(const ReturnSeries& x, HistogramSpec spec = {},
                                            bool miller_madow = false) {
    const std::size_t n = x.n();
    const int bins = resolve_bins(spec, n, /*joint=*/false);
    if (n < 4 * static_cast<std::size_t>(bins)) {
        throw insufficient_data_error("differential_entropy: need n >= 4*bins");
    }
    const auto edges = cell_edges(x.values, spec.scheme, bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : x.values) ++counts[cell_index(edges, v)];
    const auto parts = detail::histogram_parts(counts, edges, n);
    double h = parts.discrete + parts.width;
    if (miller_madow) h += detail::miller_madow_term(parts.nonempty, n);
    return {h, detail::scheme_tag(spec.scheme), bins, n};
}

/// Joint differential entropy over a 2-D histogram with per-axis cells.
inline EntropyEstimate joint_entropy(const ReturnSeries& x, const ReturnSeries& y,
                                     HistogramSpec spec = {}, bool miller_madow = false) {
    require_aligned(x, y);
    const std::size_t n = x.n();
    const int bins = resolve_bins(spec, n, /*joint=*/true);
    if (n < 4 * static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins)) {
        throw insufficient_data_error("joint_entropy: need n >= 4*bins^2");
    }
    const Grid2D g = make_grid(x.values, y.values, spec.scheme, bins);
    return {detail::grid_joint_entropy(g, miller_madow), detail::scheme_tag(spec.scheme), bins, n};
}

/// Conditional entropy H(X|Y) = H(X,Y) - H(Y), with H(Y) read off the same
/// grid axis so the chain-rule identity holds exactly.
inline EntropyEstimate conditional_entropy(const ReturnSeries& x, const ReturnSeries& y,
                                           HistogramSpec spec = {}, bool miller_madow = false) {
    require_aligned(x, y);
    const std::size_t n = x.n();
    const int bins = resolve_bins(spec, n, /*joint=*/true);
    if (n < 4 * static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins)) {
        throw insufficient_data_error("conditional_entropy: need n >= 4*bins^2");
    }
    const Grid2D g = make_grid(x.values, y.values, spec.scheme, bins);
    const double h = detail::grid_joint_entropy(g, miller_madow) -
                     detail::grid_marginal_entropy(g, /*x_axis=*/false, miller_madow);
    return {h, detail::scheme_tag(spec.scheme), bins, n};
}

} // namespace entrofin
