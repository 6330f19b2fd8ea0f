#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "xfcs/scenario.hpp"

using namespace xfcs;
using namespace xfcs::scen;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_csv(const std::string& name, const std::string& body) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string hourly_csv(int columns) {
    std::string body = columns == 2 ? "minute,value\n" : "minute,irradiance_w_m2,ambient_c\n";
    for (int h = 0; h < 24; ++h) {
        body += std::to_string(h * 60) + "," + std::to_string(h);
        if (columns == 3) body += ",20";
        body += "\n";
    }
    return body;
}

}  // namespace

TEST_CASE("series ingestion") {
    SECTION("hourly price expands step-constant") {
        auto p = temp_csv("price_hourly.csv", hourly_csv(2));
        auto s = load_series(p, SeriesKind::price);
        REQUIRE(s.size() == 1440);
        REQUIRE(s[0] == Approx(0.0));
        REQUIRE(s[59] == Approx(0.0));
        REQUIRE(s[60] == Approx(1.0));
        REQUIRE(s[119] == Approx(1.0));
    }
    SECTION("hourly weather interpolates linearly") {
        auto p = temp_csv("weather_hourly.csv", hourly_csv(3));
        auto w = load_weather(p);
        REQUIRE(w.irradiance_w_m2[30] == Approx(0.5));
        REQUIRE(w.irradiance_w_m2[90] == Approx(1.5));
        REQUIRE(w.ambient_c[90] == Approx(20.0));
    }
    SECTION("negative irradiance is rejected with a row number") {
        auto p = temp_csv("weather_bad.csv",
                          "minute,irradiance_w_m2,ambient_c\n0,-5,20\n");
        try {
            load_weather(p);
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            REQUIRE(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SECTION("full-resolution file passes through unchanged") {
        std::string body = "minute,value\n";
        for (int m = 0; m < 1440; ++m) body += std::to_string(m) + ",2.5\n";
        auto p = temp_csv("price_full.csv", body);
        auto s = load_series(p, SeriesKind::price);
        REQUIRE(s.size() == 1440);
        REQUIRE(s[1439] == Approx(2.5));
    }
    SECTION("other row counts are rejected") {
        auto p = temp_csv("price_short.csv", "minute,value\n0,1\n60,2\n");
        REQUIRE_THROWS_AS(load_series(p, SeriesKind::price), IngestError);
    }
}

TEST_CASE("scenario assembly pairs seasons with day types") {
    std::array<SeasonInputs, 4> seasons;
    for (int s = 0; s < 4; ++s) {
        seasons[static_cast<std::size_t>(s)].weather.irradiance_w_m2.assign(1440, 100.0 * s);
        seasons[static_cast<std::size_t>(s)].weather.ambient_c.assign(1440, 20.0);
        seasons[static_cast<std::size_t>(s)].price.assign(1440, 0.01 * (s + 1));
    }
    fleet::DemandProfile weekday, weekend;
    weekday.day_type = fleet::DayType::weekday;
    weekend.day_type = fleet::DayType::weekend;
    weekday.energy_kwh[600] = 5.0;
    weekend.energy_kwh[700] = 7.0;
    pv::PvParams pv_params;

    auto set = assemble_scenarios(seasons, weekday, weekend, pv_params);

    SECTION("winter weekend is scenario 1, weekdays take ids 5-8") {
        REQUIRE(set.scenarios[0].id == 1);
        REQUIRE(set.scenarios[0].season == Season::winter);
        REQUIRE(set.scenarios[0].day_type == DayType::weekend);
        REQUIRE(set.scenarios[0].demand[700] == Approx(7.0));
        REQUIRE(set.scenarios[4].day_type == DayType::weekday);
        REQUIRE(set.scenarios[4].demand[600] == Approx(5.0));
    }
    SECTION("weekly weights mix to a full week per season") {
        for (int s = 0; s < 4; ++s)
            REQUIRE(set.scenarios[static_cast<std::size_t>(s)].weekly_weight +
                        set.scenarios[static_cast<std::size_t>(s + 4)].weekly_weight ==
                    Approx(1.0));
    }
    SECTION("annual expansion weight is days over seasons") {
        REQUIRE(set.annual_day_weight() == Approx(91.25));
    }
    SECTION("archive round-trip is bit-identical") {
        fs::path p1 = fs::temp_directory_path() / "set1.json";
        fs::path p2 = fs::temp_directory_path() / "set2.json";
        save_scenario_set(set, p1);
        auto reread = load_scenario_set(p1);
        save_scenario_set(reread, p2);
        std::ifstream f1(p1), f2(p2);
        std::stringstream b1, b2;
        b1 << f1.rdbuf();
        b2 << f2.rdbuf();
        REQUIRE(b1.str() == b2.str());
        REQUIRE(reread.scenarios[3].price == set.scenarios[3].price);
    }
    SECTION("resampling sums demand and averages rates") {
        auto coarse = resample(set, 5);
        REQUIRE(coarse.steps() == 288);
        REQUIRE(coarse.scenarios[0].demand[140] == Approx(7.0));  // minute 700
        REQUIRE(coarse.scenarios[0].price[0] == Approx(0.01));
        double fine_total = 0, coarse_total = 0;
        for (double v : set.scenarios[4].demand) fine_total += v;
        for (double v : coarse.scenarios[4].demand) coarse_total += v;
        REQUIRE(coarse_total == Approx(fine_total).margin(1e-9));
    }
}

TEST_CASE("annualized cost factor") {
    REQUIRE(annualized_cost_factor(0.04, 20) == Approx(0.073582).margin(1e-6));
    REQUIRE(annualized_cost_factor(0.0, 10) == Approx(0.1));
}

TEST_CASE("cycle-life curve interpolation") {
    CycleLifeCurve curve;
    curve.dod_pct = {10, 50, 100};
    curve.cycles = {10000, 2000, 400};

    SECTION("breakpoints reproduce exactly, midpoints interpolate") {
        REQUIRE(curve.cycles_at(50) == Approx(2000));
        REQUIRE(curve.cycles_at(75) == Approx(1200));
        REQUIRE(curve.cycles_at(5) == Approx(10000));    // clamped below
        REQUIRE(curve.cycles_at(120) == Approx(400));    // clamped above
    }
    SECTION("malformed curves rejected") {
        CycleLifeCurve bad;
        bad.dod_pct = {10, 10};
        bad.cycles = {100, 50};
        REQUIRE_THROWS_AS(bad.validate(), ConfigError);
        bad.dod_pct = {10, 20};
        bad.cycles = {100, 100};
        REQUIRE_THROWS_AS(bad.validate(), ConfigError);
    }
    SECTION("scaling divides allowed cycles") {
        auto annual = curve.scaled(1.0 / 20.0);
        REQUIRE(annual.cycles_at(50) == Approx(100));
    }
}

TEST_CASE("scenario set validation") {
    auto set = test::tiny_set(60);
    REQUIRE_NOTHROW(set.validate());
    set.scenarios[0].day_type = DayType::weekday;
    REQUIRE_THROWS_AS(set.validate(), ConfigError);
}
