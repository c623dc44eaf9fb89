#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/numeric.hpp"

namespace entrofin {

enum class BinScheme { equidistant, equiprobable };

/// Binning scheme for plug-in entropy estimates. bins == 0 selects the
/// default rule: ceil(n^(1/3)) univariate, ceil(n^(1/4)) per axis bivariate.
struct HistogramSpec {
    BinScheme scheme = BinScheme::equiprobable;
    int bins = 0;
};

inline int default_bins_univariate(std::size_t n) {
    return static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
}

inline int default_bins_joint_axis(std::size_t n) {
    return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 0.25)));
}

inline int resolve_bins(const HistogramSpec& spec, std::size_t n, bool joint) {
    const int b = spec.bins > 0 ? spec.bins
                                : (joint ? default_bins_joint_axis(n) : default_bins_univariate(n));
    if (b < 2) throw domain_error("histogram: bins >= 2 required");
    return b;
}

/// Cell edges for one axis. Cell i covers (edges[i], edges[i+1]] except the
/// first, which also includes its left endpoint. Equiprobable boundaries are
/// midpoint-interpolated sample quantiles; outer edges sit on the data range.
inline std::vector<double> cell_edges(std::span<const double> xs, BinScheme scheme, int bins) {
    if (xs.size() < 2) throw insufficient_data_error("cell_edges: need n >= 2");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (!(hi > lo)) throw degenerate_error("cell_edges: all values equal");
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    edges.front() = lo;
    edges.back() = hi;
    if (scheme == BinScheme::equidistant) {
        const double w = (hi - lo) / bins;
        for (int j = 1; j < bins; ++j) edges[j] = lo + w * j;
    } else {
        for (int j = 1; j < bins; ++j) {
            edges[j] = quantile_boundary(sorted, static_cast<std::size_t>(j),
                                         static_cast<std::size_t>(bins));
        }
    }
    return edges;
}

/// Cell index for x. Values on a boundary go to the lower cell; the data
/// minimum belongs to cell 0.
inline int cell_index(std::span<const double> edges, double x) {
    const int bins = static_cast<int>(edges.size()) - 1;
    // first edge index >= x, then step back one cell
    const auto it = std::lower_bound(edges.begin() + 1, edges.end(), x);
    int idx = static_cast<int>(it - edges.begin()) - 1;
    if (idx < 0) idx = 0;
    if (idx >= bins) idx = bins - 1;
    return idx;
}

/// Bivariate histogram with per-axis edges shared by the joint/marginal/MI
/// computations that must satisfy exact decomposition identities.
struct Grid2D {
    std::vector<double> x_edges;
    std::vector<double> y_edges;
    std::vector<std::size_t> counts; // row-major [ix * by + iy]
    std::size_t n = 0;

    int bx() const { return static_cast<int>(x_edges.size()) - 1; }
    int by() const { return static_cast<int>(y_edges.size()) - 1; }
    std::size_t count(int ix, int iy) const {
        return counts[static_cast<std::size_t>(ix) * by() + iy];
    }
    std::vector<std::size_t> x_marginal() const {
        std::vector<std::size_t> m(bx(), 0);
        for (int i = 0; i < bx(); ++i)
            for (int j = 0; j < by(); ++j) m[i] += count(i, j);
        return m;
    }
    std::vector<std::size_t> y_marginal() const {
        std::vector<std::size_t> m(by(), 0);
        for (int i = 0; i < bx(); ++i)
            for (int j = 0; j < by(); ++j) m[j] += count(i, j);
        return m;
    }
};

inline Grid2D make_grid(std::span<const double> xs, std::span<const double> ys,
                        BinScheme scheme, int bins_per_axis) {
    Grid2D g;
    g.n = xs.size();
    g.x_edges = cell_edges(xs, scheme, bins_per_axis);
    g.y_edges = cell_edges(ys, scheme, bins_per_axis);
    g.counts.assign(static_cast<std::size_t>(bins_per_axis) * bins_per_axis, 0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const int ix = cell_index(g.x_edges, xs[t]);
        const int iy = cell_index(g.y_edges, ys[t]);
        ++g.counts[static_cast<std::size_t>(ix) * bins_per_axis + iy];
    }
    return g;
}

} // namespace entrofin
