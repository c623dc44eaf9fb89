#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "entrofin/csv.hpp"

using namespace entrofin;

namespace {

std::vector<PriceSeries> parse(const std::string& text, CsvFormat fmt, int min_rows = 1) {
    std::istringstream in(text);
    return parse_prices(in, fmt, min_rows);
}

} // namespace

TEST_SUITE("csv") {

TEST_CASE("wide file with two tickers") {
    const auto series = parse("date,A,B\n"
                              "2001-01-01,10,20\n"
                              "2001-01-02,11,21\n"
                              "2001-01-03,12,22\n",
                              CsvFormat::wide_format);
    REQUIRE(series.size() == 2);
    CHECK(series[0].ticker == "A");
    CHECK(series[0].prices == std::vector<double>{10, 11, 12});
    CHECK(series[1].prices == std::vector<double>{20, 21, 22});
}

TEST_CASE("non-positive price is a data error naming ticker and date") {
    try {
        parse("date,A\n2001-01-01,1.0\n2001-01-02,0.0\n", CsvFormat::wide_format);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("A") != std::string::npos);
        CHECK(msg.find("2001-01-02") != std::string::npos);
    }
}

TEST_CASE("long format groups and date-sorts interleaved tickers") {
    const std::string text = "date,ticker,close\n"
                             "2001-01-03,A,12\n"
                             "2001-01-01,B,20\n"
                             "2001-01-01,A,10\n"
                             "2001-01-04,B,23\n"
                             "2001-01-02,A,11\n"
                             "2001-01-02,B,21\n"
                             "2001-01-04,A,13\n"
                             "2001-01-03,B,22\n"
                             "2001-01-05,A,14\n"
                             "2001-01-05,B,24\n";
    const auto series = parse(text, CsvFormat::long_format);

    // line-by-line reference parse of the same 10-row fixture
    std::map<std::string, std::vector<std::pair<std::string, double>>> ref;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        ref[line.substr(c1 + 1, c2 - c1 - 1)].emplace_back(line.substr(0, c1),
                                                           std::stod(line.substr(c2 + 1)));
    }
    for (auto& [t, rows] : ref) std::sort(rows.begin(), rows.end());

    REQUIRE(series.size() == ref.size());
    for (const auto& s : series) {
        const auto& rows = ref.at(s.ticker);
        REQUIRE(s.dates.size() == rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(s.dates[i] == rows[i].first);
            CHECK(s.prices[i] == rows[i].second);
        }
    }
}

TEST_CASE("missing cells drop the row for that ticker only") {
    const auto series = parse("date,A,B\n"
                              "2001-01-01,10,20\n"
                              "2001-01-02,,21\n"
                              "2001-01-03,12,22\n",
                              CsvFormat::wide_format);
    CHECK(series[0].prices == std::vector<double>{10, 12});
    CHECK(series[1].prices == std::vector<double>{20, 21, 22});
}

TEST_CASE("default minimum row count") {
    std::string text = "date,A\n";
    for (int i = 10; i < 39; ++i) text += "2001-01-" + std::to_string(i) + ",5\n";
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_prices(in, CsvFormat::wide_format), insufficient_data_error);
    std::istringstream in2(text);
    CHECK_NOTHROW(parse_prices(in2, CsvFormat::wide_format, 29));
}

TEST_CASE("format errors carry line numbers") {
    try {
        parse("date,A\n2001-01-01,1.0\n2001-01-02,oops\n", CsvFormat::wide_format);
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("when,A\n2001-01-01,1\n", CsvFormat::wide_format), format_error);
    CHECK_THROWS_AS(parse("date,ticker\n", CsvFormat::long_format), format_error);
    CHECK_THROWS_AS(parse("date,A\n2001-01-01,1,9\n", CsvFormat::wide_format), format_error);
    CHECK_THROWS_AS(parse("", CsvFormat::wide_format), format_error);
}

TEST_CASE("duplicate dates are rejected") {
    CHECK_THROWS_AS(parse("date,A\n2001-01-01,1\n2001-01-01,2\n", CsvFormat::wide_format),
                    data_error);
}

TEST_CASE("CRLF and BOM are tolerated") {
    const auto series = parse("\xEF\xBB\xBF"
                              "date,A\r\n2001-01-01,10\r\n2001-01-02,11\r\n",
                              CsvFormat::wide_format);
    REQUIRE(series.size() == 1);
    CHECK(series[0].prices == std::vector<double>{10, 11});
}

TEST_CASE("wide writer round-trips through the parser") {
    PriceSeries a, b;
    a.ticker = "A";
    b.ticker = "B";
    for (int i = 0; i < 5; ++i) {
        const std::string d = "2001-01-0" + std::to_string(i + 1);
        a.dates.push_back(d);
        b.dates.push_back(d);
        a.prices.push_back(100.0 * std::pow(1.01, i));
        b.prices.push_back(50.0 * std::pow(0.99, i));
    }
    std::ostringstream out;
    write_prices_wide(out, {a, b});
    const auto series = parse(out.str(), CsvFormat::wide_format);
    REQUIRE(series.size() == 2);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(series[0].prices[i] == doctest::Approx(a.prices[i]).epsilon(1e-12));
        CHECK(series[1].prices[i] == doctest::Approx(b.prices[i]).epsilon(1e-12));
    }
}

} // TEST_SUITE
