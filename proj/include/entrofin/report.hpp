#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "entrofin/csv.hpp"
#include "entrofin/diagnostics.hpp"
#include "entrofin/entropy.hpp"
#include "entrofin/errors.hpp"
#include "entrofin/market_model.hpp"
#include "entrofin/mutual_information.hpp"
#include "entrofin/portfolio.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

using ordered_json = nlohmann::ordered_json;

/// Doubles in reports carry 12 significant digits: enough to reproduce the
/// computation, few enough to keep diffs free of float noise.
inline std::string fmt12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// JSON value holding x rounded to 12 significant digits (still a number).
inline ordered_json j12(double x) {
    if (!std::isfinite(x)) return nullptr;
    return std::stod(fmt12(x));
}

inline ordered_json j12(const std::optional<double>& x) {
    return x ? j12(*x) : ordered_json(nullptr);
}

struct RunConfig {
    std::string input_path;
    CsvFormat format = CsvFormat::wide_format;
    std::string benchmark;
    HistogramSpec hist;            // scheme for standalone entropies; bins 0 = auto
    AdaptiveMiOptions adaptive;
    int lb_lags = 0;               // 0 = ceil(ln n)
    int arch_lags = 5;
    bool diversify = false;
    int max_k = 0;                 // 0 = universe size
    int replications = 200;
    std::string output_dir = ".";
    std::uint64_t seed = 12345;
    int min_rows = 30;
};

struct TickerReport {
    std::string ticker;
    bool ok = false;
    std::string error;
    std::size_t n = 0;
    SummaryStats summary;
    double h_empirical = 0.0; // shared-grid marginal entropy, width-corrected
    double h_normal = 0.0;
    double ln_sigma = 0.0;
    double mi_adaptive = 0.0;
    double mi_grid = 0.0;
    double h_conditional = 0.0;
    double lambda = 0.0;        // from the adaptive MI estimate
    double lambda_normal = 0.0; // |R| via the normal-MI identity
    MarketModelFit fit;
    std::vector<TestResult> diagnostics;
    bool cusum_crossed = false;
    bool cusum_sq_crossed = false;
};

struct RunResult {
    std::vector<TickerReport> tickers; // ordered by ticker
    int warnings = 0;
    bool diversification_written = false;
};

inline ordered_json to_json(const SummaryStats& s) {
    ordered_json j;
    j["n"] = s.n;
    j["mean"] = j12(s.mean);
    j["variance"] = j12(s.variance);
    j["std_dev"] = j12(s.std_dev);
    j["skewness"] = j12(s.skewness);
    j["excess_kurtosis"] = j12(s.excess_kurtosis);
    return j;
}

inline ordered_json to_json(const TestResult& t) {
    ordered_json j;
    j["name"] = t.name;
    j["statistic"] = j12(t.statistic);
    j["p_value"] = j12(t.p_value);
    j["dof_or_params"] = t.dof_or_params;
    j["reject_at_5pct"] = t.reject_at_5pct;
    return j;
}

inline ordered_json to_json(const EntropyEstimate& e) {
    ordered_json j;
    j["value"] = j12(e.value);
    switch (e.estimator) {
    case EntropyEstimator::plug_in_equidistant: j["estimator"] = "plug_in_equidistant"; break;
    case EntropyEstimator::plug_in_equiprobable: j["estimator"] = "plug_in_equiprobable"; break;
    case EntropyEstimator::parametric_normal: j["estimator"] = "parametric_normal"; break;
    }
    j["bins_used"] = e.bins_used;
    j["n"] = e.n;
    return j;
}

inline ordered_json to_json(const MiEstimate& m) {
    ordered_json j;
    j["value"] = j12(m.value);
    switch (m.estimator) {
    case MiEstimator::adaptive: j["estimator"] = "adaptive"; break;
    case MiEstimator::grid: j["estimator"] = "grid"; break;
    case MiEstimator::parametric_normal: j["estimator"] = "parametric_normal"; break;
    }
    j["cells"] = m.cells;
    j["n"] = m.n;
    if (m.degenerate_input) j["degenerate_input"] = true;
    return j;
}

inline ordered_json to_json(const MarketModelFit& f) {
    ordered_json j;
    j["alpha"] = j12(f.alpha);
    j["beta"] = j12(f.beta);
    j["r"] = j12(f.r);
    j["r_squared"] = j12(f.r_squared);
    j["sigma_m_sq"] = j12(f.sigma_m_sq);
    j["systematic_risk"] = j12(f.systematic_risk);
    j["specific_risk"] = j12(f.specific_risk);
    j["total_variance"] = j12(f.total_variance);
    j["n"] = f.n;
    if (f.condition_warning) j["condition_warning"] = true;
    return j;
}

inline ordered_json to_json(const PartitionCell& c) {
    ordered_json j;
    j["x"] = {j12(c.x_lo), j12(c.x_hi)};
    j["y"] = {j12(c.y_lo), j12(c.y_hi)};
    j["count"] = c.count;
    j["children"] = ordered_json::array();
    for (const auto& ch : c.children) j["children"].push_back(to_json(ch));
    return j;
}

inline ordered_json to_json(const PartitionTree& t) {
    ordered_json j;
    j["n"] = t.n;
    j["root"] = to_json(t.root);
    return j;
}

inline ordered_json to_json(const StabilityPath& p) {
    ordered_json j;
    j["name"] = p.name;
    j["crossed"] = p.crossed;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < p.path.size(); ++i) {
        rows.push_back({p.t_index[i], j12(p.path[i]), j12(p.lower_bound[i]), j12(p.upper_bound[i])});
    }
    j["points"] = rows; // [t, path, lower, upper]
    return j;
}

namespace detail {

inline int resolve_lb_lags(int configured, std::size_t n) {
    return configured > 0 ? configured
                          : static_cast<int>(std::ceil(std::log(static_cast<double>(n))));
}

inline TickerReport analyze_ticker(const ReturnSeries& stock_raw, const ReturnSeries& bench_raw,
                                   const RunConfig& cfg) {
    TickerReport rep;
    rep.ticker = stock_raw.ticker;
    try {
        auto [stock, bench] = align(stock_raw, bench_raw);
        stock.ticker = stock_raw.ticker;
        bench.ticker = bench_raw.ticker;
        const std::size_t n = stock.n();
        rep.n = n;
        if (n < 30) throw insufficient_data_error("fewer than 30 overlapping observations");

        rep.summary = describe(stock);
        if (!(rep.summary.std_dev > 0.0)) throw degenerate_error("constant return series");
        rep.ln_sigma = std::log(rep.summary.std_dev);
        rep.h_normal = normal_entropy(rep.summary.std_dev);

        const auto decomp = entropy_decomposition(stock, bench, cfg.hist.bins);
        rep.h_empirical = decomp.h_x;
        rep.mi_grid = decomp.mi;
        rep.h_conditional = decomp.h_cond;

        const auto [mi, tree] = mutual_information_adaptive(stock, bench, cfg.adaptive);
        rep.mi_adaptive = mi.value;
        rep.lambda = global_correlation(mi);

        rep.fit = fit_market_model(stock, bench);
        rep.lambda_normal = global_correlation(normal_mutual_information(rep.fit.r));

        rep.diagnostics.push_back(jarque_bera(rep.fit.residuals));
        rep.diagnostics.push_back(
            ljung_box(rep.fit.residuals, resolve_lb_lags(cfg.lb_lags, n)));
        rep.diagnostics.push_back(engle_arch(rep.fit.residuals, cfg.arch_lags));

        const auto w = recursive_residuals(stock, bench);
        rep.cusum_crossed = cusum(w).crossed;
        rep.cusum_sq_crossed = cusum_sq(w).crossed;
        rep.ok = true;
    } catch (const error& e) {
        rep.ok = false;
        rep.error = e.what();
    }
    return rep;
}

inline ordered_json report_json(const RunConfig& cfg, const RunResult& result) {
    ordered_json j;
    j["benchmark"] = cfg.benchmark;
    j["input"] = cfg.input_path;
    j["seed"] = cfg.seed;
    j["histogram"] = {{"scheme", cfg.hist.scheme == BinScheme::equidistant ? "equidistant"
                                                                           : "equiprobable"},
                      {"bins", cfg.hist.bins}};
    j["adaptive"] = {{"alpha", j12(cfg.adaptive.alpha)},
                     {"min_count", cfg.adaptive.min_count},
                     {"max_depth", cfg.adaptive.max_depth}};
    j["warnings"] = result.warnings;
    ordered_json arr = ordered_json::array();
    for (const auto& r : result.tickers) {
        ordered_json t;
        t["ticker"] = r.ticker;
        t["status"] = r.ok ? "ok" : "failed";
        if (!r.ok) {
            t["error"] = r.error;
            arr.push_back(std::move(t));
            continue;
        }
        t["n"] = r.n;
        t["summary"] = to_json(r.summary);
        t["entropy"] = {{"h_empirical", j12(r.h_empirical)},
                        {"h_normal", j12(r.h_normal)},
                        {"ln_sigma", j12(r.ln_sigma)}};
        t["dependence"] = {{"mi_adaptive", j12(r.mi_adaptive)},
                           {"mi_grid", j12(r.mi_grid)},
                           {"h_conditional", j12(r.h_conditional)},
                           {"lambda", j12(r.lambda)},
                           {"lambda_normal", j12(r.lambda_normal)}};
        t["market_model"] = to_json(r.fit);
        ordered_json diag = ordered_json::array();
        for (const auto& d : r.diagnostics) diag.push_back(to_json(d));
        t["diagnostics"] = std::move(diag);
        t["stability"] = {{"cusum_crossed", r.cusum_crossed},
                          {"cusum_sq_crossed", r.cusum_sq_crossed}};
        arr.push_back(std::move(t));
    }
    j["tickers"] = std::move(arr);
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file " + path.string());
    out << content;
}

} // namespace detail

/// Full batch pipeline: per-stock summary statistics, entropy decomposition
/// against the benchmark, both MI estimators, market-model fit, residual
/// diagnostics and stability flags, plus the optional diversification
/// experiment. Writes report.json, fig1.csv, fig2.csv, diagnostics.csv and
/// (optionally) diversification.csv into cfg.output_dir. Per-ticker failures
/// are recorded and counted, not fatal.
inline RunResult run_full_report(const RunConfig& cfg) {
    const auto prices = load_prices(cfg.input_path, cfg.format, cfg.min_rows);

    const PriceSeries* bench_prices = nullptr;
    for (const auto& p : prices) {
        if (p.ticker == cfg.benchmark) bench_prices = &p;
    }
    if (!bench_prices) {
        throw config_error("benchmark ticker " + cfg.benchmark + " not present in input");
    }
    const ReturnSeries bench = log_returns(*bench_prices);

    std::vector<ReturnSeries> stocks;
    for (const auto& p : prices) {
        if (p.ticker != cfg.benchmark) stocks.push_back(log_returns(p));
    }
    std::sort(stocks.begin(), stocks.end(),
              [](const ReturnSeries& a, const ReturnSeries& b) { return a.ticker < b.ticker; });

    // per-ticker analyses are independent; results land in slots indexed by
    // ticker position, so the merge is deterministic for any worker count
    RunResult result;
    result.tickers.resize(stocks.size());
    {
        const std::size_t workers =
            std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), stocks.size());
        std::atomic<std::size_t> next{0};
        auto run = [&] {
            for (std::size_t i = next.fetch_add(1); i < stocks.size(); i = next.fetch_add(1)) {
                result.tickers[i] = detail::analyze_ticker(stocks[i], bench, cfg);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
        for (auto& th : pool) th.join();
    }
    for (const auto& r : result.tickers) {
        if (!r.ok) ++result.warnings;
    }

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    std::string fig1 = "ticker,ln_sigma,h_empirical,h_normal\n";
    std::string fig2 = "ticker,systematic_risk,mi_adaptive,specific_risk,h_conditional\n";
    std::string diag = "ticker,test,statistic,p_value,reject_at_5pct\n";
    for (const auto& r : result.tickers) {
        if (!r.ok) continue;
        fig1 += r.ticker + ',' + fmt12(r.ln_sigma) + ',' + fmt12(r.h_empirical) + ',' +
                fmt12(r.h_normal) + '\n';
        fig2 += r.ticker + ',' + fmt12(r.fit.systematic_risk) + ',' + fmt12(r.mi_adaptive) + ',' +
                fmt12(r.fit.specific_risk) + ',' + fmt12(r.h_conditional) + '\n';
        for (const auto& t : r.diagnostics) {
            diag += r.ticker + ',' + t.name + ',' + fmt12(t.statistic) + ',' + fmt12(t.p_value) +
                    ',' + (t.reject_at_5pct ? "true" : "false") + '\n';
        }
        diag += r.ticker + ",cusum,,," + (r.cusum_crossed ? "true" : "false") + '\n';
        diag += r.ticker + ",cusum_sq,,," + (r.cusum_sq_crossed ? "true" : "false") + '\n';
    }
    detail::write_text_file(dir / "fig1.csv", fig1);
    detail::write_text_file(dir / "fig2.csv", fig2);
    detail::write_text_file(dir / "diagnostics.csv", diag);

    if (cfg.diversify) {
        try {
            const auto universe = align_all(stocks);
            const int max_k = cfg.max_k > 0 ? cfg.max_k : static_cast<int>(universe.size());
            const auto curve =
                diversification_curve(universe, max_k, cfg.replications, cfg.seed, cfg.hist);
            std::string csv = "k,avg_std,avg_entropy\n";
            for (std::size_t i = 0; i < curve.k.size(); ++i) {
                csv += std::to_string(curve.k[i]) + ',' + fmt12(curve.avg_std[i]) + ',' +
                       fmt12(curve.avg_entropy[i]) + '\n';
            }
            detail::write_text_file(dir / "diversification.csv", csv);
            result.diversification_written = true;
        } catch (const error&) {
            ++result.warnings;
        }
    }

    detail::write_text_file(dir / "report.json", detail::report_json(cfg, result).dump(2) + "\n");
    return result;
}

} // namespace entrofin
