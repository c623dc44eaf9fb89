#include <doctest.h>

#include <cmath>
#include <vector>

#include "entrofin/series.hpp"
#include "entrofin/synth.hpp"

using namespace entrofin;

namespace {

PriceSeries make_prices(std::vector<double> prices) {
    PriceSeries p;
    p.ticker = "T";
    for (std::size_t i = 0; i < prices.size(); ++i) {
        p.dates.push_back("d" + std::to_string(100 + i));
    }
    p.prices = std::move(prices);
    return p;
}

ReturnSeries make_returns(std::vector<double> values) {
    ReturnSeries r;
    r.ticker = "T";
    for (std::size_t i = 0; i < values.size(); ++i) {
        r.dates.push_back("d" + std::to_string(100 + i));
    }
    r.values = std::move(values);
    return r;
}

} // namespace

TEST_SUITE("series") {

TEST_CASE("log returns of [1, e, e]") {
    const auto r = log_returns(make_prices({1.0, std::exp(1.0), std::exp(1.0)}));
    REQUIRE(r.n() == 2);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.values[1] == 0.0);
    CHECK(r.dates[0] == "d101"); // later date of each pair
}

TEST_CASE("constant prices give zero returns") {
    const auto r = log_returns(make_prices({5.0, 5.0, 5.0, 5.0}));
    for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("hand-computed returns for [100, 102, 99]") {
    const auto r = log_returns(make_prices({100.0, 102.0, 99.0}));
    // frozen from an independent calculator evaluation of ln(102/100), ln(99/102)
    CHECK(r.values[0] == doctest::Approx(0.01980262729617973).epsilon(1e-12));
    CHECK(r.values[1] == doctest::Approx(-0.02985296314968116).epsilon(1e-12));
}

TEST_CASE("returns compound back to the price ratio") {
    // property: exp(sum of returns) == last/first within 1e-9 relative
    SplitMix64 g(99);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> prices;
        double p = 50.0 + 100.0 * g.uniform01();
        for (int i = 0; i < 200; ++i) {
            prices.push_back(p);
            p *= std::exp(0.05 * g.normal());
        }
        const auto ps = make_prices(std::move(prices));
        const auto r = log_returns(ps);
        const double ratio = std::exp(compensated_sum(r.values));
        CHECK(ratio == doctest::Approx(ps.prices.back() / ps.prices.front()).epsilon(1e-9));
    }
}

TEST_CASE("log_returns rejects too-short series") {
    CHECK_THROWS_AS(log_returns(make_prices({1.0})), insufficient_data_error);
}

TEST_CASE("price validation") {
    CHECK_THROWS_AS(log_returns(make_prices({1.0, 0.0, 2.0})), data_error);
    PriceSeries p = make_prices({1.0, 2.0});
    p.dates[1] = p.dates[0]; // not strictly increasing
    CHECK_THROWS_AS(p.validate(), data_error);
}

TEST_CASE("describe on a symmetric pair") {
    const auto s = describe(make_returns({-1.0, 1.0}));
    CHECK(s.mean == 0.0);
    CHECK(s.variance == doctest::Approx(1.0).epsilon(1e-15)); // population divisor
    CHECK(*s.skewness == 0.0);
}

TEST_CASE("describe flags the degenerate case instead of NaN") {
    const auto s = describe(make_returns({0.5, 0.5, 0.5, 0.5}));
    CHECK(s.variance == 0.0);
    CHECK_FALSE(s.skewness.has_value());
    CHECK_FALSE(s.excess_kurtosis.has_value());
}

TEST_CASE("describe sample divisor variant") {
    const auto pop = describe(make_returns({1.0, 2.0, 3.0, 4.0}));
    const auto smp = describe(make_returns({1.0, 2.0, 3.0, 4.0}), VarianceDivisor::sample);
    CHECK(smp.variance == doctest::Approx(pop.variance * 4.0 / 3.0).epsilon(1e-15));
    CHECK(pop.std_dev == doctest::Approx(std::sqrt(pop.variance)).epsilon(1e-12));
}

TEST_CASE("describe moments are location invariant and scale equivariant") {
    SplitMix64 g(17);
    std::vector<double> base(500);
    for (auto& v : base) v = g.normal() + 0.3 * std::pow(g.normal(), 3);
    const auto s0 = describe(make_returns(base));

    std::vector<double> shifted = base;
    for (auto& v : shifted) v += 7.25;
    const auto s1 = describe(make_returns(shifted));
    CHECK(s1.mean == doctest::Approx(s0.mean + 7.25).epsilon(1e-12));
    CHECK(s1.variance == doctest::Approx(s0.variance).epsilon(1e-12));
    CHECK(*s1.skewness == doctest::Approx(*s0.skewness).epsilon(1e-9));
    CHECK(*s1.excess_kurtosis == doctest::Approx(*s0.excess_kurtosis).epsilon(1e-9));

    for (double c : {2.5, -2.5}) {
        std::vector<double> scaled = base;
        for (auto& v : scaled) v *= c;
        const auto s2 = describe(make_returns(scaled));
        CHECK(s2.variance == doctest::Approx(c * c * s0.variance).epsilon(1e-12));
        CHECK(*s2.skewness ==
              doctest::Approx((c < 0 ? -1.0 : 1.0) * *s0.skewness).epsilon(1e-9));
        CHECK(*s2.excess_kurtosis == doctest::Approx(*s0.excess_kurtosis).epsilon(1e-9));
    }
}

TEST_CASE("excess kurtosis of seeded normal draws is near zero") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::gaussian;
    cfg.n = 10000;
    cfg.seed = 7;
    const auto s = describe(generate(cfg)[0]);
    // 3x standard error sqrt(24/n) = 0.147
    CHECK(std::abs(*s.excess_kurtosis) < 0.15);
}

TEST_CASE("align keeps only common dates") {
    ReturnSeries a, b;
    a.ticker = "A";
    a.dates = {"d1", "d2", "d4", "d5"};
    a.values = {1.0, 2.0, 4.0, 5.0};
    b.ticker = "B";
    b.dates = {"d2", "d3", "d4"};
    b.values = {20.0, 30.0, 40.0};
    const auto [ra, rb] = align(a, b);
    CHECK(ra.dates == std::vector<std::string>{"d2", "d4"});
    CHECK(ra.values == std::vector<double>{2.0, 4.0});
    CHECK(rb.values == std::vector<double>{20.0, 40.0});
    CHECK_NOTHROW(require_aligned(ra, rb));
    CHECK_THROWS_AS(require_aligned(a, b), alignment_error);
}

TEST_CASE("align_all intersects the whole universe") {
    ReturnSeries a, b, c;
    a.ticker = "A";
    a.dates = {"d1", "d2", "d3"};
    a.values = {1, 2, 3};
    b.ticker = "B";
    b.dates = {"d2", "d3", "d4"};
    b.values = {2, 3, 4};
    c.ticker = "C";
    c.dates = {"d2", "d3"};
    c.values = {9, 8};
    const auto u = align_all({a, b, c});
    for (const auto& s : u) {
        CHECK(s.dates == std::vector<std::string>{"d2", "d3"});
    }
    CHECK(u[0].values == std::vector<double>{2, 3});
    CHECK(u[2].values == std::vector<double>{9, 8});
}

} // TEST_SUITE
