#ifndef XFCS_CONFIG_HPP
#define XFCS_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "xfcs/common.hpp"
#include "xfcs/fleet.hpp"
#include "xfcs/robust.hpp"
#include "xfcs/scenario.hpp"
#include "xfcs/sizing.hpp"
#include "xfcs/solve.hpp"

namespace xfcs::cfg {

using nlohmann::json;

struct SeriesPaths {
    std::filesystem::path weather;
    std::filesystem::path price;
};

struct RobustConfig {
    std::optional<robust::UncertaintySpec> price;
    std::optional<robust::UncertaintySpec> demand;
    std::optional<robust::UncertaintySpec> pv;
    bool single_sided_exposure = false;
};

struct AppConfig {
    fleet::FleetConfig fleet;
    fleet::DrivingProfile driving;
    fleet::StationConfig station;
    fleet::CvParams cv;
    pv::PvParams pv_params;
    double pv_cap_max_kw = 300;
    scen::TariffParams tariff;
    scen::CostParams costs;
    scen::BessTech tech;
    scen::CycleLifeCurve curve_raw;           // as configured
    bool annualize_curve = true;              // divide by lifetime for the cycle cap
    std::array<SeriesPaths, 4> series;        // winter..fall
    RobustConfig robust_cfg;
    int dt_minutes = 1;
    int mccormick_partitions = 1;
    double days_per_year = 365;
    mip::BackendConfig backend;

    /// Allowed annual cycles entering the sizing model.
    scen::CycleLifeCurve model_curve() const {
        return annualize_curve ? curve_raw.scaled(1.0 / costs.lifetime_years) : curve_raw;
    }

    fleet::GeneratedProfiles generate_demand() const {
        return fleet::generate_profiles(fleet, station, driving, cv);
    }

    scen::ScenarioSet assemble(const fleet::GeneratedProfiles& demand) const {
        std::array<scen::SeasonInputs, 4> seasons;
        for (int s = 0; s < 4; ++s) {
            seasons[static_cast<std::size_t>(s)].weather =
                scen::load_weather(series[static_cast<std::size_t>(s)].weather);
            seasons[static_cast<std::size_t>(s)].price = scen::load_series(
                series[static_cast<std::size_t>(s)].price, scen::SeriesKind::price);
        }
        return scen::assemble_scenarios(seasons, demand.weekday, demand.weekend, pv_params,
                                        days_per_year);
    }
};

namespace detail {

inline fleet::NormalDist parse_dist(const json& j) {
    fleet::NormalDist d;
    if (j.at("mean").is_string())
        d.mean = parse_clock(j.at("mean").get<std::string>());
    else
        d.mean = j.at("mean").get<double>();
    if (j.at("stddev").is_string())
        d.stddev = parse_clock(j.at("stddev").get<std::string>());
    else
        d.stddev = j.at("stddev").get<double>();
    return d;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

}  // namespace detail

inline AppConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    AppConfig c;
    try {
        const json& fl = j.at("fleet");
        c.fleet.n_evs = fl.at("n_evs").get<int>();
        c.fleet.rng_seed = detail::get_or<std::uint64_t>(fl, "rng_seed", 1);
        c.fleet.mileage_coeff = fl.at("mileage_coeff").get<double>();
        c.fleet.soc_thr_dist = detail::parse_dist(fl.at("soc_thr"));
        c.fleet.soc_target_dist = detail::parse_dist(fl.at("soc_target"));
        auto bounds = fl.at("soc_bounds").get<std::vector<double>>();
        if (bounds.size() != 2) throw ConfigError("fleet.soc_bounds needs two values");
        c.fleet.soc_lower = bounds[0];
        c.fleet.soc_upper = bounds[1];
        for (const json& cat : fl.at("categories")) {
            fleet::EvCategory e;
            e.id = cat.at("id").get<std::string>();
            e.fleet_share = cat.at("share").get<double>();
            e.battery_capacity_kwh = cat.at("battery_kwh").get<double>();
            e.consumption_kwh_per_mile = cat.at("kwh_per_mile").get<double>();
            e.departure_weekday = detail::parse_dist(cat.at("departure_weekday"));
            e.departure_weekend = detail::parse_dist(cat.at("departure_weekend"));
            c.fleet.categories.push_back(std::move(e));
        }
        c.fleet.validate();

        const json& dp = j.at("driving_profile");
        auto wd = dp.at("weekday").get<std::vector<double>>();
        auto we = dp.at("weekend").get<std::vector<double>>();
        if (wd.size() != 24 || we.size() != 24)
            throw ConfigError("driving_profile needs 24 hourly values per day type");
        std::copy(wd.begin(), wd.end(), c.driving.weekday_probs.begin());
        std::copy(we.begin(), we.end(), c.driving.weekend_probs.begin());
        c.driving.validate();

        const json& st = j.at("station");
        c.station.n_ports = st.at("ports").get<int>();
        c.station.n_waiting = st.at("waiting").get<int>();
        c.station.port_power_kw = st.at("port_kw").get<double>();
        c.station.validate();

        if (j.contains("cv")) {
            const json& cv = j.at("cv");
            c.cv.cutoff_soc = detail::get_or(cv, "cutoff_soc", c.cv.cutoff_soc);
            c.cv.min_power_fraction =
                detail::get_or(cv, "min_power_fraction", c.cv.min_power_fraction);
            c.cv.decay_time_constant =
                detail::get_or(cv, "decay_minutes", c.cv.decay_time_constant);
            c.cv.validate();
        }

        const json& pvj = j.at("pv");
        c.pv_params.noct_c = pvj.at("noct_c").get<double>();
        c.pv_params.temp_coeff = pvj.at("temp_coeff").get<double>();
        c.pv_params.losses_pct = detail::get_or(pvj, "losses_pct", 14.0);
        c.pv_cap_max_kw = pvj.at("cap_max_kw").get<double>();
        c.pv_params.validate();

        const json& tf = j.at("tariff");
        c.tariff.lambda_mdc = tf.at("lambda_mdc").get<double>();
        c.tariff.lambda_adc = tf.at("lambda_adc").get<double>();
        c.tariff.window_minutes = tf.at("window_minutes").get<int>();
        c.tariff.month_scale = tf.at("month_scale").get<int>();
        c.tariff.validate();

        const json& co = j.at("costs");
        c.costs.bess_power_capex = co.at("bess_power_capex").get<double>();
        c.costs.bess_om = detail::get_or(co, "bess_om", 0.0);
        c.costs.bess_energy_capex = co.at("bess_energy_capex").get<double>();
        c.costs.bess_install = co.at("bess_install").get<double>();
        c.costs.pv_capex = co.at("pv_capex").get<double>();
        c.costs.pv_om = co.at("pv_om").get<double>();
        c.costs.interest = co.at("interest").get<double>();
        c.costs.lifetime_years = co.at("lifetime_years").get<int>();
        c.costs.validate();

        const json& be = j.at("bess");
        c.tech.eta_ch = be.at("eta_ch").get<double>();
        c.tech.eta_dch = be.at("eta_dch").get<double>();
        c.tech.eta_acdc = be.at("eta_acdc").get<double>();
        c.tech.eta_dcdc = be.at("eta_dcdc").get<double>();
        c.tech.ramp_kwh_per_min = be.at("ramp_kwh_per_min").get<double>();
        auto ratio = be.at("ratio_bounds").get<std::vector<double>>();
        auto energy = be.at("energy_bounds_kwh").get<std::vector<double>>();
        auto dod = be.at("dod_bounds_pct").get<std::vector<double>>();
        if (ratio.size() != 2 || energy.size() != 2 || dod.size() != 2)
            throw ConfigError("bess bounds need [lower, upper] pairs");
        c.tech.ratio_min = ratio[0];
        c.tech.ratio_max = ratio[1];
        c.tech.energy_min_kwh = energy[0];
        c.tech.energy_max_kwh = energy[1];
        c.tech.dod_min = dod[0] / 100.0;
        c.tech.dod_max = dod[1] / 100.0;
        c.tech.demand_cap_kwh = detail::get_or(be, "demand_cap_kwh", 0.0);
        c.tech.validate();

        const json& cl = j.at("cycle_life");
        for (const json& bp : cl.at("breakpoints")) {
            auto pair = bp.get<std::vector<double>>();
            if (pair.size() != 2) throw ConfigError("cycle_life breakpoints are [dod%, cycles]");
            c.curve_raw.dod_pct.push_back(pair[0]);
            c.curve_raw.cycles.push_back(pair[1]);
        }
        c.annualize_curve = detail::get_or(cl, "annualize_over_lifetime", true);
        c.curve_raw.validate();

        const json& se = j.at("series");
        for (int s = 0; s < 4; ++s) {
            const char* season = scen::to_string(static_cast<scen::Season>(s));
            const json& row = se.at(season);
            c.series[static_cast<std::size_t>(s)].weather =
                base_dir / row.at("weather").get<std::string>();
            c.series[static_cast<std::size_t>(s)].price =
                base_dir / row.at("price").get<std::string>();
        }

        if (j.contains("robust")) {
            const json& ro = j.at("robust");
            auto read_spec = [&](const char* key) -> std::optional<robust::UncertaintySpec> {
                if (!ro.contains(key)) return std::nullopt;
                robust::UncertaintySpec s;
                s.half_width = ro.at(key).at("half_width").get<double>();
                double pct = detail::get_or(ro.at(key), "budget_pct", 100.0);
                s.budget_minutes = pct / 100.0 * kMinutesPerDay;
                s.validate();
                return s;
            };
            c.robust_cfg.price = read_spec("price");
            c.robust_cfg.demand = read_spec("demand");
            c.robust_cfg.pv = read_spec("pv");
            c.robust_cfg.single_sided_exposure =
                detail::get_or(ro, "single_sided_exposure", false);
        }

        if (j.contains("sizing")) {
            const json& sz = j.at("sizing");
            c.dt_minutes = detail::get_or(sz, "dt_minutes", 1);
            c.mccormick_partitions = detail::get_or(sz, "mccormick_partitions", 1);
            c.days_per_year = detail::get_or(sz, "days_per_year", 365.0);
            TimeGrid::of(c.dt_minutes);
        }

        const json& so = j.at("solver");
        c.backend.command = so.at("command").get<std::vector<std::string>>();
        c.backend.mip_rel_gap = detail::get_or(so, "mip_rel_gap", 1e-4);
        c.backend.time_limit_s = detail::get_or(so, "time_limit_s", 600.0);
        c.backend.feasibility_tol = detail::get_or(so, "feasibility_tol", 1e-6);
        c.backend.native_sos2 = detail::get_or(so, "native_sos2", false);
        c.backend.polish = detail::get_or(so, "polish", true);
        // relative solver paths resolve against the config location
        for (auto& tok : c.backend.command) {
            if (tok.find('/') != std::string::npos && tok.find('{') == std::string::npos) {
                std::filesystem::path p(tok);
                if (p.is_relative() && std::filesystem::exists(base_dir / p))
                    tok = (base_dir / p).string();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

}  // namespace xfcs::cfg

#endif
