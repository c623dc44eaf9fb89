#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "entrofin/errors.hpp"
#include "entrofin/series.hpp"

namespace entrofin {

/// long: header `date,ticker,close`, one observation per row.
/// wide: header `date,<ticker1>,<ticker2>,...`, empty cell = missing.
enum class CsvFormat { long_format, wide_format };

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

inline std::string strip_bom(std::string s) {
    if (s.size() >= 3 && s[0] == '\xEF' && s[1] == '\xBB' && s[2] == '\xBF') {
        return s.substr(3);
    }
    return s;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_price(const std::string& cell, std::size_t line_no) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw format_error("line " + std::to_string(line_no) + ": cannot parse price '" + cell + "'");
    }
    if (pos != cell.size()) {
        throw format_error("line " + std::to_string(line_no) + ": trailing characters in price '" +
                           cell + "'");
    }
    return v;
}

struct RawSeries {
    std::vector<std::pair<std::string, double>> rows; // (date, price)
};

inline std::vector<PriceSeries> finalize(std::vector<std::string> order,
                                         std::map<std::string, RawSeries>& raw, int min_rows) {
    std::vector<PriceSeries> out;
    for (const auto& ticker : order) {
        auto& rs = raw[ticker];
        std::sort(rs.rows.begin(), rs.rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < rs.rows.size(); ++i) {
            if (rs.rows[i].first == rs.rows[i - 1].first) {
                throw data_error("ticker " + ticker + ": duplicate date " + rs.rows[i].first);
            }
        }
        if (rs.rows.size() < static_cast<std::size_t>(min_rows)) {
            throw insufficient_data_error("ticker " + ticker + ": only " +
                                          std::to_string(rs.rows.size()) + " usable rows (need " +
                                          std::to_string(min_rows) + ")");
        }
        PriceSeries p;
        p.ticker = ticker;
        p.dates.reserve(rs.rows.size());
        p.prices.reserve(rs.rows.size());
        for (auto& [date, price] : rs.rows) {
            p.dates.push_back(std::move(date));
            p.prices.push_back(price);
        }
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace detail

/// Parse closing prices from a CSV stream. Rows with a missing price are
/// dropped for that ticker only; non-positive prices are data errors. A
/// ticker with fewer than min_rows usable rows raises insufficient_data.
inline std::vector<PriceSeries> parse_prices(std::istream& in, CsvFormat format,
                                             int min_rows = 30) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("line 1: empty input");
    line = detail::strip_bom(detail::strip_cr(line));
    const auto header = detail::split_csv_line(line);

    std::map<std::string, detail::RawSeries> raw;
    std::vector<std::string> order;
    std::size_t line_no = 1;

    if (format == CsvFormat::wide_format) {
        if (header.size() < 2 || detail::lower(header[0]) != "date") {
            throw format_error("line 1: wide header must be date,<ticker>,...");
        }
        for (std::size_t c = 1; c < header.size(); ++c) {
            const std::string& t = header[c];
            if (t.empty()) throw format_error("line 1: empty ticker name in header");
            if (raw.count(t)) throw format_error("line 1: duplicate ticker " + t);
            raw[t];
            order.push_back(t);
        }
        while (std::getline(in, line)) {
            ++line_no;
            line = detail::strip_cr(line);
            if (line.empty()) continue;
            const auto cells = detail::split_csv_line(line);
            if (cells.size() != header.size()) {
                throw format_error("line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(header.size()) + " cells, got " +
                                   std::to_string(cells.size()));
            }
            const std::string& date = cells[0];
            if (date.empty()) {
                throw format_error("line " + std::to_string(line_no) + ": empty date");
            }
            for (std::size_t c = 1; c < cells.size(); ++c) {
                if (cells[c].empty()) continue; // missing price: drop row for this ticker
                const double price = detail::parse_price(cells[c], line_no);
                if (!(price > 0.0)) {
                    throw data_error("ticker " + header[c] + " at " + date +
                                     ": non-positive price");
                }
                raw[header[c]].rows.emplace_back(date, price);
            }
        }
    } else {
        if (header.size() != 3 || detail::lower(header[0]) != "date" ||
            detail::lower(header[1]) != "ticker" || detail::lower(header[2]) != "close") {
            throw format_error("line 1: long header must be date,ticker,close");
        }
        while (std::getline(in, line)) {
            ++line_no;
            line = detail::strip_cr(line);
            if (line.empty()) continue;
            const auto cells = detail::split_csv_line(line);
            if (cells.size() != 3) {
                throw format_error("line " + std::to_string(line_no) + ": expected 3 cells, got " +
                                   std::to_string(cells.size()));
            }
            const std::string& date = cells[0];
            const std::string& ticker = cells[1];
            if (date.empty() || ticker.empty()) {
                throw format_error("line " + std::to_string(line_no) + ": empty date or ticker");
            }
            if (cells[2].empty()) continue;
            const double price = detail::parse_price(cells[2], line_no);
            if (!(price > 0.0)) {
                throw data_error("ticker " + ticker + " at " + date + ": non-positive price");
            }
            if (!raw.count(ticker)) order.push_back(ticker);
            raw[ticker].rows.emplace_back(date, price);
        }
    }
    return detail::finalize(std::move(order), raw, min_rows);
}

inline std::vector<PriceSeries> load_prices(const std::string& path, CsvFormat format,
                                            int min_rows = 30) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open input file " + path);
    return parse_prices(in, format, min_rows);
}

/// Write price series that share one date grid as a wide CSV.
inline void write_prices_wide(std::ostream& out, const std::vector<PriceSeries>& series) {
    if (series.empty()) throw domain_error("write_prices_wide: no series");
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].dates != series[0].dates) {
            throw alignment_error("write_prices_wide: series date grids differ");
        }
    }
    out << "date";
    for (const auto& s : series) out << ',' << s.ticker;
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < series[0].dates.size(); ++r) {
        out << series[0].dates[r];
        for (const auto& s : series) {
            std::snprintf(buf, sizeof(buf), "%.12g", s.prices[r]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

inline void write_prices_wide(const std::string& path, const std::vector<PriceSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file " + path);
    write_prices_wide(out, series);
}

} // namespace entrofin
