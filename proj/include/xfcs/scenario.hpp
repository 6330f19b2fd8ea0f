#ifndef XFCS_SCENARIO_HPP
#define XFCS_SCENARIO_HPP

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xfcs/common.hpp"
#include "xfcs/csv.hpp"
#include "xfcs/fleet.hpp"
#include "xfcs/pv.hpp"

namespace xfcs::scen {

using fleet::DayType;

enum class Season { winter = 0, spring = 1, summer = 2, fall = 3 };

inline const char* to_string(Season s) {
    switch (s) {
        case Season::winter: return "winter";
        case Season::spring: return "spring";
        case Season::summer: return "summer";
        case Season::fall: return "fall";
    }
    return "?";
}

inline Season season_from_string(const std::string& s) {
    for (int i = 0; i < 4; ++i)
        if (s == to_string(static_cast<Season>(i))) return static_cast<Season>(i);
    throw ConfigError("unknown season '" + s + "'");
}

/// One representative day: ids 1-4 are the weekend days of winter..fall,
/// ids 5-8 the matching weekdays.
struct Scenario {
    int id = 0;
    Season season = Season::winter;
    DayType day_type = DayType::weekend;
    double weekly_weight = 0;          // 2/7 weekend, 5/7 weekday
    std::vector<double> price;         // $/kWh per step
    std::vector<double> demand;        // kWh per step
    std::vector<double> pv_per_unit;   // per step
};

struct ScenarioSet {
    std::array<Scenario, 8> scenarios;
    int dt_minutes = 1;                // step width of all series
    double days_per_year = 365;
    int seasons = 4;

    int steps() const { return kMinutesPerDay / dt_minutes; }
    double dt_hours() const { return dt_minutes / 60.0; }
    double annual_day_weight() const { return days_per_year / seasons; }

    /// Largest per-step demand energy over all scenarios (E^max of the
    /// power-sizing cap).
    double max_demand_energy() const {
        double m = 0;
        for (const auto& s : scenarios)
            for (double e : s.demand) m = std::max(m, e);
        return m;
    }

    void validate() const {
        int n = steps();
        for (int k = 0; k < 8; ++k) {
            const Scenario& s = scenarios[static_cast<std::size_t>(k)];
            if (s.id != k + 1) throw ConfigError("scenario ids must be 1..8 in order");
            DayType expect = k < 4 ? DayType::weekend : DayType::weekday;
            if (s.day_type != expect)
                throw ConfigError("scenarios 1-4 must be weekends, 5-8 weekdays");
            if (static_cast<int>(s.price.size()) != n ||
                static_cast<int>(s.demand.size()) != n ||
                static_cast<int>(s.pv_per_unit.size()) != n)
                throw ConfigError("scenario series length mismatch");
            for (double p : s.price)
                if (p < 0) throw ConfigError("negative price in scenario");
        }
    }
};

/// Demand-charge tariff: billing maxima of the ξ-minute average import.
struct TariffParams {
    double lambda_mdc = 10;   // $/kW monthly
    double lambda_adc = 18;   // $/kW annual
    int window_minutes = 15;  // ξ
    int month_scale = 3;      // months billed per season max

    int windows_per_day() const { return kMinutesPerDay / window_minutes; }
    void validate() const {
        if (window_minutes <= 0 || kMinutesPerDay % window_minutes != 0)
            throw ConfigError("demand-charge window must divide 1440 minutes");
        if (lambda_mdc < 0 || lambda_adc < 0) throw ConfigError("negative demand charge rate");
    }
};

struct CostParams {
    double bess_power_capex = 300;   // $/kW
    double bess_om = 0;              // $/kW/yr
    double bess_energy_capex = 695;  // $/kWh
    double bess_install = 3.6;       // $/kWh
    double pv_capex = 2277;          // $/kW
    double pv_om = 21;               // $/kW/yr
    double interest = 0.04;
    int lifetime_years = 20;

    void validate() const {
        if (lifetime_years < 1) throw ConfigError("lifetime must be >= 1 year");
        if (interest < 0) throw ConfigError("interest must be >= 0");
    }
};

/// Capital-recovery factor turning capex into an annualized cost.
inline double annualized_cost_factor(double interest, int lifetime_years) {
    if (interest == 0) return 1.0 / lifetime_years;
    double g = std::pow(1.0 + interest, lifetime_years);
    return interest * g / (g - 1.0);
}

struct BessTech {
    double eta_ch = 0.98;
    double eta_dch = 0.98;
    double eta_acdc = 0.95;
    double eta_dcdc = 0.95;
    double ramp_kwh_per_min = 20;    // π
    double ratio_min = 1;            // γ lower: C >= γ_min * P
    double ratio_max = 8;
    double energy_min_kwh = 0;       // box bounds on C_BESS
    double energy_max_kwh = 2400;
    double dod_min = 0.10;           // fractions
    double dod_max = 1.0;
    double demand_cap_kwh = 0;       // E^max; 0 means derive from scenario data

    double converter_eff() const { return eta_acdc * eta_dcdc; }

    void validate() const {
        auto eff_ok = [](double e) { return e > 0 && e <= 1; };
        if (!eff_ok(eta_ch) || !eff_ok(eta_dch) || !eff_ok(eta_acdc) || !eff_ok(eta_dcdc))
            throw ConfigError("efficiencies must be in (0,1]");
        if (ratio_min > ratio_max || energy_min_kwh > energy_max_kwh || dod_min > dod_max)
            throw ConfigError("BESS bound pair out of order");
        if (dod_min < 0 || dod_max > 1) throw ConfigError("DoD bounds must lie in [0,1]");
        if (ramp_kwh_per_min <= 0) throw ConfigError("ramp must be > 0");
    }
};

/// Ordered (DoD, allowed cycles) breakpoints of the cycle-life curve.
struct CycleLifeCurve {
    std::vector<double> dod_pct;
    std::vector<double> cycles;

    void validate() const {
        if (dod_pct.size() < 2 || dod_pct.size() != cycles.size())
            throw ConfigError("cycle-life curve needs >= 2 ordered breakpoints");
        for (std::size_t i = 1; i < dod_pct.size(); ++i) {
            if (!(dod_pct[i] > dod_pct[i - 1]))
                throw ConfigError("cycle-life DoD breakpoints must increase");
            if (!(cycles[i] < cycles[i - 1]))
                throw ConfigError("cycle-life cycles must decrease with DoD");
        }
    }

    /// Linear interpolation of allowed cycles at a DoD given in percent.
    double cycles_at(double dod_pct_value) const {
        validate();
        if (dod_pct_value <= dod_pct.front()) return cycles.front();
        if (dod_pct_value >= dod_pct.back()) return cycles.back();
        for (std::size_t i = 1; i < dod_pct.size(); ++i) {
            if (dod_pct_value <= dod_pct[i]) {
                double f = (dod_pct_value - dod_pct[i - 1]) / (dod_pct[i] - dod_pct[i - 1]);
                return cycles[i - 1] + f * (cycles[i] - cycles[i - 1]);
            }
        }
        return cycles.back();
    }

    CycleLifeCurve scaled(double factor) const {
        CycleLifeCurve out = *this;
        for (double& c : out.cycles) c *= factor;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Series ingestion
// ---------------------------------------------------------------------------

enum class SeriesKind { price, irradiance, ambient_temp, demand };

namespace detail {

/// Expands hourly samples (rows at minutes 0,60,...,1380) to minute scale.
/// Prices and demand are held constant within the hour; weather is
/// interpolated linearly with the last hour held flat.
inline std::vector<double> expand_hourly(const std::vector<double>& hourly, bool interpolate) {
    std::vector<double> out(kMinutesPerDay);
    for (int m = 0; m < kMinutesPerDay; ++m) {
        int h = m / 60;
        if (!interpolate || h >= 23) {
            out[m] = hourly[static_cast<std::size_t>(h)];
        } else {
            double f = (m - h * 60) / 60.0;
            out[m] = hourly[static_cast<std::size_t>(h)] * (1 - f) +
                     hourly[static_cast<std::size_t>(h + 1)] * f;
        }
    }
    return out;
}

inline std::vector<double> to_minutes(const csv::Table& t, const std::filesystem::path& path,
                                      std::size_t col, bool interpolate, bool forbid_negative) {
    std::vector<double> values;
    values.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() <= col)
            throw IngestError(path.string() + ":" + std::to_string(r + 2) + ": missing column");
        double v = t.rows[r][col];
        if (forbid_negative && v < 0)
            throw IngestError(path.string() + ":" + std::to_string(r + 2) + ": negative value " +
                              format_double(v));
        values.push_back(v);
    }
    if (values.size() == kMinutesPerDay) return values;
    if (values.size() == 24) return expand_hourly(values, interpolate);
    throw IngestError(path.string() + ": expected 24 or 1440 data rows, got " +
                      std::to_string(values.size()));
}

}  // namespace detail

/// Loads one value series, accepting hourly or per-minute files.
inline std::vector<double> load_series(const std::filesystem::path& path, SeriesKind kind) {
    csv::Table t = csv::read(path);
    bool interpolate = kind == SeriesKind::irradiance || kind == SeriesKind::ambient_temp;
    bool forbid_negative = kind != SeriesKind::ambient_temp;
    return detail::to_minutes(t, path, 1, interpolate, forbid_negative);
}

/// Weather file with columns minute,irradiance_w_m2,ambient_c.
inline pv::WeatherSeries load_weather(const std::filesystem::path& path) {
    csv::Table t = csv::read(path);
    pv::WeatherSeries w;
    w.irradiance_w_m2 = detail::to_minutes(t, path, 1, true, true);
    w.ambient_c = detail::to_minutes(t, path, 2, true, false);
    return w;
}

// ---------------------------------------------------------------------------
// Assembly and resampling
// ---------------------------------------------------------------------------

struct SeasonInputs {
    pv::WeatherSeries weather;
    std::vector<double> price;  // per minute
};

/// Builds the eight-scenario year from four seasonal inputs and the two
/// generated demand days. Scenario 1 is the winter weekend.
inline ScenarioSet assemble_scenarios(const std::array<SeasonInputs, 4>& seasons,
                                      const fleet::DemandProfile& weekday,
                                      const fleet::DemandProfile& weekend,
                                      const pv::PvParams& pv_params, double days_per_year = 365) {
    ScenarioSet set;
    set.days_per_year = days_per_year;
    std::array<std::vector<double>, 4> pv_pu;
    for (int s = 0; s < 4; ++s) {
        if (seasons[static_cast<std::size_t>(s)].price.size() != kMinutesPerDay)
            throw ConfigError(std::string("missing/short price series for season ") +
                              to_string(static_cast<Season>(s)));
        pv_pu[static_cast<std::size_t>(s)] =
            pv::per_unit_profile(seasons[static_cast<std::size_t>(s)].weather, pv_params);
    }
    for (int k = 0; k < 8; ++k) {
        Scenario& sc = set.scenarios[static_cast<std::size_t>(k)];
        int season_idx = k % 4;
        sc.id = k + 1;
        sc.season = static_cast<Season>(season_idx);
        sc.day_type = k < 4 ? DayType::weekend : DayType::weekday;
        sc.weekly_weight = k < 4 ? 2.0 / 7.0 : 5.0 / 7.0;
        sc.price = seasons[static_cast<std::size_t>(season_idx)].price;
        sc.pv_per_unit = pv_pu[static_cast<std::size_t>(season_idx)];
        sc.demand = (k < 4 ? weekend : weekday).energy_kwh;
    }
    set.validate();
    return set;
}

/// Coarsens the per-minute set to a dt-minute grid: demand energy is summed
/// per step, prices and per-unit PV are averaged.
inline ScenarioSet resample(const ScenarioSet& fine, int dt_minutes) {
    if (fine.dt_minutes != 1) throw ConfigError("resample expects a per-minute scenario set");
    TimeGrid grid = TimeGrid::of(dt_minutes);
    ScenarioSet out = fine;
    out.dt_minutes = dt_minutes;
    int n = grid.steps();
    for (auto& sc : out.scenarios) {
        std::vector<double> price(n, 0), demand(n, 0), pv(n, 0);
        for (int k = 0; k < n; ++k) {
            for (int m = k * dt_minutes; m < (k + 1) * dt_minutes; ++m) {
                price[k] += sc.price[static_cast<std::size_t>(m)];
                demand[k] += sc.demand[static_cast<std::size_t>(m)];
                pv[k] += sc.pv_per_unit[static_cast<std::size_t>(m)];
            }
            price[k] /= dt_minutes;
            pv[k] /= dt_minutes;
        }
        sc.price = std::move(price);
        sc.demand = std::move(demand);
        sc.pv_per_unit = std::move(pv);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON archive
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ScenarioSet& set) {
    nlohmann::json j;
    j["dt_minutes"] = set.dt_minutes;
    j["days_per_year"] = set.days_per_year;
    j["seasons"] = set.seasons;
    j["scenarios"] = nlohmann::json::array();
    for (const auto& s : set.scenarios) {
        nlohmann::json js;
        js["id"] = s.id;
        js["season"] = to_string(s.season);
        js["day_type"] = fleet::to_string(s.day_type);
        js["weekly_weight"] = s.weekly_weight;
        js["price"] = s.price;
        js["demand"] = s.demand;
        js["pv_per_unit"] = s.pv_per_unit;
        j["scenarios"].push_back(std::move(js));
    }
    return j;
}

inline ScenarioSet scenario_set_from_json(const nlohmann::json& j) {
    ScenarioSet set;
    set.dt_minutes = j.at("dt_minutes").get<int>();
    set.days_per_year = j.at("days_per_year").get<double>();
    set.seasons = j.at("seasons").get<int>();
    const auto& arr = j.at("scenarios");
    if (arr.size() != 8) throw IngestError("scenario archive must hold 8 scenarios");
    for (std::size_t k = 0; k < 8; ++k) {
        Scenario& s = set.scenarios[k];
        const auto& js = arr[k];
        s.id = js.at("id").get<int>();
        s.season = season_from_string(js.at("season").get<std::string>());
        s.day_type = js.at("day_type").get<std::string>() == "weekday" ? DayType::weekday
                                                                       : DayType::weekend;
        s.weekly_weight = js.at("weekly_weight").get<double>();
        s.price = js.at("price").get<std::vector<double>>();
        s.demand = js.at("demand").get<std::vector<double>>();
        s.pv_per_unit = js.at("pv_per_unit").get<std::vector<double>>();
    }
    set.validate();
    return set;
}

inline void save_scenario_set(const ScenarioSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path.string());
    out << to_json(set).dump(1) << '\n';
}

inline ScenarioSet load_scenario_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return scenario_set_from_json(j);
}

}  // namespace xfcs::scen

#endif
