#include <catch_amalgamated.hpp>

#include "gridci/grid.hpp"

using namespace gridci;

namespace {

GenerationSeries make_series(std::map<std::string, std::vector<double>, std::less<>> per_source) {
    GenerationSeries s;
    s.region_id = "R";
    s.start = *parse_utc_timestamp("2022-01-01T00:00Z");
    s.per_source = std::move(per_source);
    return s;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a gridci::Error");
    return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("default source table carries the standard emission factors", "[grid]") {
    const auto table = default_sources();
    CHECK(lookup_source(table, "coal").cef_g_per_kwh == 760.0);
    CHECK(lookup_source(table, "gas").cef_g_per_kwh == 370.0);
    for (const auto& [name, src] : table)
        if (src.renewable) CHECK(src.cef_g_per_kwh == 0.0);
    CHECK(lookup_source(table, "solar").ppa_eligible);
    CHECK(lookup_source(table, "wind").ppa_eligible);
    CHECK_FALSE(lookup_source(table, "hydro").ppa_eligible);
    CHECK_FALSE(lookup_source(table, "coal").ppa_eligible);
}

TEST_CASE("source construction enforces its invariants", "[grid]") {
    CHECK(code_of([] { make_source("gas", -1.0, false, false); }) == ErrorCode::NegativeCef);
    CHECK(code_of([] { make_source("coal", 760.0, false, true); }) == ErrorCode::InvalidSource);
    CHECK_NOTHROW(make_source("hydro", 0.0, true, true));
}

TEST_CASE("validate_series", "[grid]") {
    const auto sources = default_sources();

    SECTION("well-formed input is accepted unchanged") {
        auto s = make_series({{"coal", {10, 10}}, {"solar", {5, 0}}});
        const auto v = validate_series(s, sources);
        CHECK(v == s);
        CHECK(v.hours() == 2);
        CHECK(v.total(0) == 15.0);
        // idempotent
        CHECK(validate_series(v, sources) == v);
    }
    SECTION("negative generation") {
        CHECK(code_of([&] { validate_series(make_series({{"solar", {-1}}}), sources); }) ==
              ErrorCode::NegativeGeneration);
    }
    SECTION("ragged lengths") {
        CHECK(code_of([&] { validate_series(make_series({{"coal", {10, 10}}, {"solar", {5}}}), sources); }) ==
              ErrorCode::LengthMismatch);
    }
    SECTION("undeclared source") {
        CHECK(code_of([&] { validate_series(make_series({{"peat", {1}}}), sources); }) == ErrorCode::UnknownSource);
    }
    SECTION("non-finite value") {
        CHECK(code_of([&] { validate_series(make_series({{"gas", {std::nan("")}}}), sources); }) ==
              ErrorCode::NonFiniteValue);
    }
    SECTION("empty series") {
        CHECK(code_of([&] { validate_series(make_series({{"gas", {}}}), sources); }) == ErrorCode::LengthMismatch);
    }
}

TEST_CASE("PPA portfolios only contract eligible sources", "[grid]") {
    const auto sources = default_sources();
    PpaPortfolio ok;
    ok.fractions = {{"solar", 1.0}, {"wind", 0.3}};
    CHECK_NOTHROW(validate_portfolio(ok, sources));

    for (const char* name : {"coal", "gas", "hydro"}) {
        PpaPortfolio bad;
        bad.fractions = {{name, 0.1}};
        CHECK(code_of([&] { validate_portfolio(bad, sources); }) == ErrorCode::InvalidPortfolio);
    }
    PpaPortfolio zero_on_coal;
    zero_on_coal.fractions = {{"coal", 0.0}};
    CHECK_NOTHROW(validate_portfolio(zero_on_coal, sources));

    PpaPortfolio out_of_range;
    out_of_range.fractions = {{"solar", 1.5}};
    CHECK(code_of([&] { validate_portfolio(out_of_range, sources); }) == ErrorCode::InvalidFraction);
}

TEST_CASE("uniform portfolio sets p on every eligible source", "[grid]") {
    const auto ppa = uniform_portfolio(default_sources(), 0.25);
    CHECK(ppa.fraction("solar") == 0.25);
    CHECK(ppa.fraction("wind") == 0.25);
    CHECK(ppa.fraction("coal") == 0.0);
    CHECK(ppa.fraction("hydro") == 0.0);
    CHECK(uniform_portfolio(default_sources(), 0.0).empty());
    CHECK(code_of([] { uniform_portfolio(default_sources(), -0.1); }) == ErrorCode::InvalidFraction);
}

TEST_CASE("consumer share is bounded", "[grid]") {
    CHECK(make_consumer(0.0).f == 0.0);
    CHECK(make_consumer(1.0).f == 1.0);
    CHECK(code_of([] { make_consumer(1.01); }) == ErrorCode::InvalidFraction);
}

TEST_CASE("timestamps parse and format in UTC", "[grid][time]") {
    const auto ts = parse_utc_timestamp("2022-03-05T17:00Z");
    REQUIRE(ts);
    CHECK(format_utc_hour(*ts) == "2022-03-05T17:00Z");
    CHECK(utc_hour_of_day(*ts) == 17);
    CHECK(utc_month(*ts) == 3);
    CHECK(parse_utc_timestamp("2022-03-05T17:00:00Z") == ts);
    CHECK_FALSE(parse_utc_timestamp("2022-02-30T00:00Z"));
    CHECK_FALSE(parse_utc_timestamp("2022-01-01T00:00"));
    CHECK_FALSE(parse_utc_timestamp("2022-01-01T00:00+01"));
    CHECK_FALSE(is_on_the_hour(*parse_utc_timestamp("2022-01-01T00:30Z")));
}
