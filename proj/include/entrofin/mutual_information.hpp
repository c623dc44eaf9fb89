#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "entrofin/entropy.hpp"
#include "entrofin/errors.hpp"
#include "entrofin/histogram.hpp"
#include "entrofin/numeric.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

enum class MiEstimator { adaptive, grid, parametric_normal };

struct MiEstimate {
    double value = 0.0; // nats, >= 0
    MiEstimator estimator = MiEstimator::grid;
    std::size_t cells = 0; // nonempty cells (grid) or nonempty leaves (adaptive)
    std::size_t n = 0;
    bool degenerate_input = false; // set when a constant series forced MI = 0
};

/// Half-open cell (x_lo, x_hi] x (y_lo, y_hi] in rank space; 0 or 4 children
/// that tile the parent exactly.
struct PartitionCell {
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;
    std::size_t count = 0;
    std::vector<PartitionCell> children;

    bool is_leaf() const { return children.empty(); }
};

struct PartitionTree {
    PartitionCell root;
    std::size_t n = 0;

    std::vector<const PartitionCell*> leaves() const {
        std::vector<const PartitionCell*> out;
        std::vector<const PartitionCell*> stack{&root};
        while (!stack.empty()) {
            const PartitionCell* c = stack.back();
            stack.pop_back();
            if (c->is_leaf()) {
                out.push_back(c);
            } else {
                for (const auto& ch : c->children) stack.push_back(&ch);
            }
        }
        return out;
    }
};

struct AdaptiveMiOptions {
    double alpha = 0.05;  // significance of the chi-square split test
    int min_count = 16;   // cells below this are never split
    int max_depth = 20;
};

namespace detail {

inline MiEstimate clamp_mi(double raw, MiEstimator tag, std::size_t cells, std::size_t n) {
    if (raw < -1e-9) {
        throw internal_error("mutual information sum " + std::to_string(raw) +
                             " below -1e-9; estimator inconsistency");
    }
    return {std::max(raw, 0.0), tag, cells, n, false};
}

inline bool is_constant(std::span<const double> xs) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] != xs[0]) return false;
    }
    return true;
}

/// Plug-in MI of a contingency grid: sum p_ij ln(p_ij / (p_i. p_.j)).
/// Cell widths cancel, so no area correction appears.
inline double grid_mutual_information(const Grid2D& g, std::size_t* nonempty = nullptr) {
    const auto mx = g.x_marginal();
    const auto my = g.y_marginal();
    const double n = static_cast<double>(g.n);
    double mi = 0.0;
    std::size_t cells = 0;
    for (int i = 0; i < g.bx(); ++i) {
        for (int j = 0; j < g.by(); ++j) {
            const std::size_t c = g.count(i, j);
            if (c == 0) continue;
            const double p = static_cast<double>(c) / n;
            mi += p * std::log(static_cast<double>(c) * n /
                               (static_cast<double>(mx[i]) * static_cast<double>(my[j])));
            ++cells;
        }
    }
    if (nonempty) *nonempty = cells;
    return mi;
}

struct RankPoint {
    double x, y;
};

struct AdaptiveBuilder {
    // critical values for the split test at the requested alpha: 2x2
    // subdivision (3 dof) plus its 4x4 and 8x8 refinements (9 and 49 dof)
    double crit_2x2;
    double crit_4x4;
    double crit_8x8;
    int min_count;
    int max_depth;

    /// Uniformity chi-square over the S x S dyadic subdivision of the cell.
    /// In rank space equal widths are equal marginal masses, so the expected
    /// count under "this cell is uniform" is c / S^2 in every subcell.
    template <int S>
    static double subdivision_chi_sq(std::span<const RankPoint> pts, const PartitionCell& cell) {
        std::size_t obs[S * S] = {0};
        const double fx_scale = S / (cell.x_hi - cell.x_lo);
        const double fy_scale = S / (cell.y_hi - cell.y_lo);
        for (const auto& p : pts) {
            int fx = static_cast<int>((p.x - cell.x_lo) * fx_scale);
            int fy = static_cast<int>((p.y - cell.y_lo) * fy_scale);
            // points sitting exactly on a boundary belong to the lower subcell
            if (fx > 0 && p.x <= cell.x_lo + fx / fx_scale) --fx;
            if (fy > 0 && p.y <= cell.y_lo + fy / fy_scale) --fy;
            fx = std::clamp(fx, 0, S - 1);
            fy = std::clamp(fy, 0, S - 1);
            ++obs[fx * S + fy];
        }
        const double e = static_cast<double>(pts.size()) / (S * S);
        double chi_sq = 0.0;
        for (std::size_t q : obs) {
            const double d = static_cast<double>(q) - e;
            chi_sq += d * d / e;
        }
        return chi_sq;
    }

    void build(PartitionCell& cell, std::span<RankPoint> pts, int depth) {
        cell.count = pts.size();
        if (static_cast<int>(pts.size()) < min_count || depth >= max_depth) return;

        // marginal equiquantization: halve each edge interval at its rank
        // midpoint, which bisects the marginal mass of the edge
        const double mx = 0.5 * (cell.x_lo + cell.x_hi);
        const double my = 0.5 * (cell.y_lo + cell.y_hi);
        if (!(mx > cell.x_lo && mx < cell.x_hi && my > cell.y_lo && my < cell.y_hi)) {
            return; // edge intervals too narrow to halve
        }

        // uniform allocation is tested on the 2x2 subdivision and, for cells
        // large enough to populate them, on the 4x4 and 8x8 refinements; any
        // rejection keeps the split (the coarse statistic alone is blind to
        // finer-scale structure and under-resolves smooth dependence)
        bool reject = subdivision_chi_sq<2>(pts, cell) > crit_2x2;
        if (!reject && pts.size() >= 4 * 16) {
            reject = subdivision_chi_sq<4>(pts, cell) > crit_4x4;
        }
        if (!reject && pts.size() >= 4 * 64) {
            reject = subdivision_chi_sq<8>(pts, cell) > crit_8x8;
        }
        if (!reject) return; // uniform enough: keep as leaf

        // partition points into quadrants in place: x split, then y within halves
        auto x_mid = std::partition(pts.begin(), pts.end(),
                                    [mx](const RankPoint& p) { return p.x <= mx; });
        auto y_mid_lo = std::partition(pts.begin(), x_mid,
                                       [my](const RankPoint& p) { return p.y <= my; });
        auto y_mid_hi = std::partition(x_mid, pts.end(),
                                       [my](const RankPoint& p) { return p.y <= my; });

        cell.children.resize(4);
        cell.children[0] = {cell.x_lo, mx, cell.y_lo, my, 0, {}};
        cell.children[1] = {cell.x_lo, mx, my, cell.y_hi, 0, {}};
        cell.children[2] = {mx, cell.x_hi, cell.y_lo, my, 0, {}};
        cell.children[3] = {mx, cell.x_hi, my, cell.y_hi, 0, {}};
        build(cell.children[0], pts.subspan(0, y_mid_lo - pts.begin()), depth + 1);
        build(cell.children[1],
              pts.subspan(y_mid_lo - pts.begin(), x_mid - y_mid_lo), depth + 1);
        build(cell.children[2],
              pts.subspan(x_mid - pts.begin(), y_mid_hi - x_mid), depth + 1);
        build(cell.children[3],
              pts.subspan(y_mid_hi - pts.begin(), pts.end() - y_mid_hi), depth + 1);
    }
};

} // namespace detail

/// Plug-in MI over an equiprobable-marginal grid (bins per axis). bins == 0
/// selects ceil(n^(1/4)).
inline MiEstimate mutual_information_grid(const ReturnSeries& x, const ReturnSeries& y,
                                          int bins = 0) {
    require_aligned(x, y);
    const std::size_t n = x.n();
    if (n < 2) throw insufficient_data_error("mutual_information_grid: need n >= 2");
    if (detail::is_constant(x.values) || detail::is_constant(y.values)) {
        return {0.0, MiEstimator::grid, 0, n, true};
    }
    const int b = bins > 0 ? bins : default_bins_joint_axis(n);
    if (b < 2) throw domain_error("mutual_information_grid: bins >= 2 required");
    if (n < 4 * static_cast<std::size_t>(b) * static_cast<std::size_t>(b)) {
        throw insufficient_data_error("mutual_information_grid: need n >= 4*bins^2");
    }
    const Grid2D g = make_grid(x.values, y.values, BinScheme::equiprobable, b);
    std::size_t cells = 0;
    const double mi = detail::grid_mutual_information(g, &cells);
    return detail::clamp_mi(mi, MiEstimator::grid, cells, n);
}

/// Marginal-equiquantization adaptive MI. Both coordinates are mapped to
/// average ranks / n, which makes the estimate invariant under strictly
/// increasing transforms. Each cell splits 2x2 at the rank midpoints of its
/// edge intervals (equal marginal mass on both sides) when a chi-square test
/// rejects uniform allocation at level alpha, checked on the 2x2 subdivision
/// (3 dof) and on its 4x4 / 8x8 refinements (9 and 49 dof); otherwise it
/// becomes a leaf. Leaf marginal masses are the rank-interval widths, exact
/// equiquantization for tie-free data.
inline std::pair<MiEstimate, PartitionTree>
mutual_information_adaptive(const ReturnSeries& x, const ReturnSeries& y,
                            AdaptiveMiOptions opts = {}) {
    require_aligned(x, y);
    const std::size_t n = x.n();
    if (n < 100) throw insufficient_data_error("mutual_information_adaptive: need n >= 100");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
        throw domain_error("mutual_information_adaptive: alpha in (0,1)");
    }
    if (opts.min_count < 4 || opts.max_depth < 1) {
        throw domain_error("mutual_information_adaptive: min_count >= 4, max_depth >= 1");
    }

    PartitionTree tree;
    tree.n = n;
    tree.root = {0.0, 1.0, 0.0, 1.0, n, {}};

    if (detail::is_constant(x.values) || detail::is_constant(y.values)) {
        MiEstimate est{0.0, MiEstimator::adaptive, 1, n, true};
        return {est, std::move(tree)};
    }

    const auto rx = average_ranks(x.values);
    const auto ry = average_ranks(y.values);
    std::vector<detail::RankPoint> pts(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = {rx[i] * inv_n, ry[i] * inv_n};
    }

    detail::AdaptiveBuilder builder{chi_square_quantile(1.0 - opts.alpha, 3),
                                    chi_square_quantile(1.0 - opts.alpha, 9),
                                    chi_square_quantile(1.0 - opts.alpha, 49),
                                    opts.min_count, opts.max_depth};
    builder.build(tree.root, pts, 0);

    double raw = 0.0;
    std::size_t nonempty = 0;
    for (const PartitionCell* leaf : tree.leaves()) {
        if (leaf->count == 0) continue;
        const double p = static_cast<double>(leaf->count) * inv_n;
        const double px = leaf->x_hi - leaf->x_lo;
        const double py = leaf->y_hi - leaf->y_lo;
        raw += p * std::log(p / (px * py));
        ++nonempty;
    }
    MiEstimate est = detail::clamp_mi(raw, MiEstimator::adaptive, nonempty, n);
    return {est, std::move(tree)};
}

/// Global correlation coefficient lambda = sqrt(1 - exp(-2 I)), in [0,1).
inline double global_correlation(double mi_nats) {
    if (mi_nats < 0.0) throw domain_error("global_correlation: mutual information >= 0 required");
    return std::sqrt(1.0 - std::exp(-2.0 * mi_nats));
}

inline double global_correlation(const MiEstimate& i) { return global_correlation(i.value); }

/// MI implied by a bivariate normal with linear correlation r: -0.5 ln(1 - r^2).
inline double normal_mutual_information(double r) {
    if (!(std::abs(r) < 1.0)) {
        throw domain_error("normal_mutual_information: |r| < 1 required");
    }
    return -0.5 * std::log(1.0 - r * r);
}

struct EntropyDecomposition {
    double h_x = 0.0;    // grid-marginal entropy of x, width-corrected
    double mi = 0.0;     // grid MI against the benchmark
    double h_cond = 0.0; // h_x - mi, exact by construction
    int bins = 0;
};

/// H(X) = I(X,B) + H(X|B) on one shared equiprobable grid, so the identity
/// holds exactly. bins == 0 selects ceil(n^(1/4)) per axis.
inline EntropyDecomposition entropy_decomposition(const ReturnSeries& x,
                                                  const ReturnSeries& benchmark, int bins = 0) {
    require_aligned(x, benchmark);
    const std::size_t n = x.n();
    if (n < 2) throw insufficient_data_error("entropy_decomposition: need n >= 2");
    const int b = bins > 0 ? bins : default_bins_joint_axis(n);
    if (b < 2) throw domain_error("entropy_decomposition: bins >= 2 required");
    if (n < 4 * static_cast<std::size_t>(b) * static_cast<std::size_t>(b)) {
        throw insufficient_data_error("entropy_decomposition: need n >= 4*bins^2");
    }
    const Grid2D g = make_grid(x.values, benchmark.values, BinScheme::equiprobable, b);
    EntropyDecomposition d;
    d.bins = b;
    d.h_x = detail::grid_marginal_entropy(g, /*x_axis=*/true);
    d.mi = detail::clamp_mi(detail::grid_mutual_information(g), MiEstimator::grid, 0, n).value;
    d.h_cond = d.h_x - d.mi;
    return d;
}

} // namespace entrofin
