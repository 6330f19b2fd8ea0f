#ifndef XFCS_TESTS_HELPERS_HPP
#define XFCS_TESTS_HELPERS_HPP

#include <functional>
#include <string>

#include "xfcs/scenario.hpp"
#include "xfcs/sizing.hpp"
#include "xfcs/solve.hpp"

namespace xfcs::test {

inline mip::BackendConfig backend(double gap = 1e-6, double time_limit = 300) {
    mip::BackendConfig cfg;
    cfg.command = {"python3", XFCS_SOLVER_SCRIPT, "{lp}", "{sol}", "--gap",   "{gap}",
                   "--time",  "{time}",           "--polish", "{polish}"};
    cfg.mip_rel_gap = gap;
    cfg.time_limit_s = time_limit;
    return cfg;
}

using SeriesFn = std::function<double(int j, int t)>;

/// Synthetic eight-scenario set on a coarse grid. Series default to zero.
inline scen::ScenarioSet tiny_set(int dt_minutes, SeriesFn demand = nullptr,
                                  SeriesFn price = nullptr, SeriesFn pvpu = nullptr) {
    scen::ScenarioSet set;
    set.dt_minutes = dt_minutes;
    int n = set.steps();
    for (int j = 0; j < 8; ++j) {
        auto& sc = set.scenarios[static_cast<std::size_t>(j)];
        sc.id = j + 1;
        sc.season = static_cast<scen::Season>(j % 4);
        sc.day_type = j < 4 ? scen::DayType::weekend : scen::DayType::weekday;
        sc.weekly_weight = j < 4 ? 2.0 / 7.0 : 5.0 / 7.0;
        sc.price.resize(n, 0.0);
        sc.demand.resize(n, 0.0);
        sc.pv_per_unit.resize(n, 0.0);
        for (int t = 0; t < n; ++t) {
            if (demand) sc.demand[static_cast<std::size_t>(t)] = demand(j, t);
            if (price) sc.price[static_cast<std::size_t>(t)] = price(j, t);
            if (pvpu) sc.pv_per_unit[static_cast<std::size_t>(t)] = pvpu(j, t);
        }
    }
    return set;
}

struct Fixture {
    scen::ScenarioSet set;
    scen::TariffParams tariff;
    scen::CostParams costs;
    scen::BessTech tech;
    scen::CycleLifeCurve curve;

    sizing::Inputs inputs() const { return {&set, &tariff, &costs, &tech, &curve}; }
};

/// BESS-free miniature with lossless converters; handy for pinning flows.
inline Fixture fixture(int dt_minutes, SeriesFn demand = nullptr, SeriesFn price = nullptr,
                       SeriesFn pvpu = nullptr) {
    Fixture f;
    f.set = tiny_set(dt_minutes, demand, price, pvpu);
    f.tariff.window_minutes = std::max(15, dt_minutes);
    f.tariff.lambda_mdc = 0;
    f.tariff.lambda_adc = 0;
    f.tech.eta_ch = f.tech.eta_dch = 1.0;
    f.tech.eta_acdc = f.tech.eta_dcdc = 1.0;
    f.tech.energy_min_kwh = 0;
    f.tech.energy_max_kwh = 0;  // no battery unless a test opens the bounds
    f.tech.ramp_kwh_per_min = 1e6;
    f.curve.dod_pct = {10, 50, 100};
    f.curve.cycles = {10000, 2000, 400};
    return f;
}

inline sizing::SizingOptions no_pv_options() {
    sizing::SizingOptions opt;
    opt.pv_cap_max_kw = 0;
    return opt;
}

}  // namespace xfcs::test

#endif
