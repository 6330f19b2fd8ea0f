#ifndef XFCS_ROBUST_HPP
#define XFCS_ROBUST_HPP

#include <array>
#include <optional>
#include <vector>

#include "xfcs/common.hpp"
#include "xfcs/sizing.hpp"

namespace xfcs::robust {

/// Interval half-width and budget for one uncertain input. The budget counts
/// minutes of the day that may sit at their worst-case bound simultaneously.
struct UncertaintySpec {
    double half_width = 0;    // fraction of the forecast
    double budget_minutes = 0;

    void validate() const {
        if (half_width < 0 || half_width >= 1)
            throw ConfigError("uncertainty half-width must be in [0,1)");
        if (budget_minutes < 0 || budget_minutes > kMinutesPerDay)
            throw ConfigError("uncertainty budget must be within [0,1440] minutes");
    }
};

struct RobustSpecs {
    std::optional<UncertaintySpec> price;
    std::optional<UncertaintySpec> demand;
    std::optional<UncertaintySpec> pv;
    // Emit only the printed one-sided exposure bound instead of the
    // absolute-value pair (for comparison runs).
    bool single_sided_exposure = false;
};

struct BoundsPair {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Elementwise (1 +/- w) envelope around a nonnegative forecast series.
inline BoundsPair build_bounds(const std::vector<double>& forecast, const UncertaintySpec& spec) {
    spec.validate();
    BoundsPair out;
    out.lower.reserve(forecast.size());
    out.upper.reserve(forecast.size());
    for (double v : forecast) {
        if (v < 0) throw ConfigError("robust bounds expect a nonnegative forecast");
        out.lower.push_back((1.0 - spec.half_width) * v);
        out.upper.push_back((1.0 + spec.half_width) * v);
    }
    return out;
}

struct RobustVars {
    mip::VarId alpha_price = -1;
    std::vector<mip::VarId> beta_price;                               // per t
    std::array<std::vector<mip::VarId>, sizing::kScenarios> sig_price;  // per (j,t)
    mip::VarId alpha_demand = -1;
    std::array<std::vector<mip::VarId>, sizing::kScenarios> beta_demand, sig_demand;
    mip::VarId alpha_pv = -1;
    std::array<std::vector<mip::VarId>, sizing::kScenarios> beta_pv, sig_pv;
};

namespace detail {

inline double budget_steps(const UncertaintySpec& spec, int dt_minutes) {
    return spec.budget_minutes / dt_minutes;
}

}  // namespace detail

/// Worst-case electricity-price protection: dual variables alpha/beta enter
/// the objective, and per-t dual rows bound them by the half-width-weighted
/// exposure. The exposure magnitude sigma covers both import and export
/// unless the single-sided flag asks for the literal one-sided form.
inline void add_price_robust(sizing::SizingModel& sm, RobustVars& rv, const UncertaintySpec& spec,
                             bool single_sided) {
    spec.validate();
    auto& model = sm.model();
    const auto& v = sm.vars();
    const auto& set = *sm.inputs().scenarios;
    const int steps = sm.steps();
    auto inf = std::numeric_limits<double>::infinity();

    rv.alpha_price = model.add_variable("alphaL", mip::VarKind::cont, 0, inf);
    for (int t = 0; t < steps; ++t) {
        char name[24];
        std::snprintf(name, sizeof(name), "betaL_t%04d", t);
        rv.beta_price.push_back(model.add_variable(name, mip::VarKind::cont, 0, inf));
    }
    for (int j = 0; j < sizing::kScenarios; ++j) {
        rv.sig_price[j].resize(steps);
        for (int t = 0; t < steps; ++t) {
            rv.sig_price[j][t] =
                model.add_variable(sizing::detail::jt("sigL", j, t), mip::VarKind::cont, 0, inf);
            mip::LinExpr pos;
            pos.add(rv.sig_price[j][t], 1.0).add(v.e_ac[j][t], -1.0);
            model.add_constraint(sizing::detail::jt("sgLp", j, t), pos, mip::Sense::ge, 0.0);
            if (!single_sided) {
                mip::LinExpr neg;
                neg.add(rv.sig_price[j][t], 1.0).add(v.e_ac[j][t], 1.0);
                model.add_constraint(sizing::detail::jt("sgLn", j, t), neg, mip::Sense::ge, 0.0);
            }
        }
    }

    const double w = set.annual_day_weight();
    for (int t = 0; t < steps; ++t) {
        mip::LinExpr dual;
        dual.add(rv.alpha_price, 1.0).add(rv.beta_price[static_cast<std::size_t>(t)], 1.0);
        for (int j = 0; j < sizing::kScenarios; ++j) {
            const auto& sc = set.scenarios[static_cast<std::size_t>(j)];
            double hw = spec.half_width * sc.price[static_cast<std::size_t>(t)];
            dual.add(rv.sig_price[j][t], -w * sc.weekly_weight * hw);
        }
        model.add_constraint("duL_t" + std::to_string(t), dual, mip::Sense::ge, 0.0);
    }

    mip::LinExpr& extra = sm.objective_extras();
    extra.add(rv.alpha_price, detail::budget_steps(spec, set.dt_minutes));
    for (int t = 0; t < steps; ++t) extra.add(rv.beta_price[static_cast<std::size_t>(t)], 1.0);
}

/// Demand and PV uncertainty: replaces the nominal energy balance with the
/// worst-case-inflated form and adds the matching dual rows.
inline void add_demand_pv_robust(sizing::SizingModel& sm, RobustVars& rv,
                                 const std::optional<UncertaintySpec>& spec_d,
                                 const std::optional<UncertaintySpec>& spec_pv) {
    auto& model = sm.model();
    const auto& v = sm.vars();
    const auto& set = *sm.inputs().scenarios;
    const int steps = sm.steps();
    const double dt_h = sm.dt_hours();
    const double eff = sm.inputs().tech->converter_eff();
    auto inf = std::numeric_limits<double>::infinity();

    double gamma_d = 0, gamma_pv = 0;
    if (spec_d) {
        spec_d->validate();
        gamma_d = detail::budget_steps(*spec_d, set.dt_minutes);
        rv.alpha_demand = model.add_variable("alphaD", mip::VarKind::cont, 0, inf);
    }
    if (spec_pv) {
        spec_pv->validate();
        gamma_pv = detail::budget_steps(*spec_pv, set.dt_minutes);
        rv.alpha_pv = model.add_variable("alphaPV", mip::VarKind::cont, 0, inf);
    }
    for (int j = 0; j < sizing::kScenarios; ++j) {
        if (spec_d) {
            rv.beta_demand[j].resize(steps);
            rv.sig_demand[j].resize(steps);
        }
        if (spec_pv) {
            rv.beta_pv[j].resize(steps);
            rv.sig_pv[j].resize(steps);
        }
        for (int t = 0; t < steps; ++t) {
            if (spec_d) {
                rv.beta_demand[j][t] = model.add_variable(sizing::detail::jt("betaD", j, t),
                                                          mip::VarKind::cont, 0, inf);
                rv.sig_demand[j][t] = model.add_variable(sizing::detail::jt("sigD", j, t),
                                                         mip::VarKind::cont, 1.0, inf);
            }
            if (spec_pv) {
                rv.beta_pv[j][t] = model.add_variable(sizing::detail::jt("betaPV", j, t),
                                                      mip::VarKind::cont, 0, inf);
                rv.sig_pv[j][t] = model.add_variable(sizing::detail::jt("sigPV", j, t),
                                                     mip::VarKind::cont, 0, inf);
            }
        }
    }

    for (int j = 0; j < sizing::kScenarios; ++j) {
        const auto& sc = set.scenarios[static_cast<std::size_t>(j)];
        for (int t = 0; t < steps; ++t) {
            mip::LinExpr e;
            e.add(v.e_imp[j][t], eff);
            e.add(v.e_exp[j][t], -1.0 / eff);
            e.add(v.e_ch[j][t], -1.0);
            e.add(v.e_dch[j][t], 1.0);
            e.add(v.p_pv_t[j][t], dt_h);
            if (spec_d) {
                e.add(rv.alpha_demand, -gamma_d);
                e.add(rv.beta_demand[j][t], -1.0);
            }
            if (spec_pv) {
                e.add(rv.alpha_pv, -gamma_pv * dt_h);
                e.add(rv.beta_pv[j][t], -dt_h);
            }
            model.add_constraint(sizing::detail::jt("ebr", j, t), e, mip::Sense::eq,
                                 sc.demand[static_cast<std::size_t>(t)]);
            sm.add_ac_definition(j, t);

            if (spec_d) {
                double hw = spec_d->half_width * sc.demand[static_cast<std::size_t>(t)];
                mip::LinExpr dual;
                dual.add(rv.alpha_demand, 1.0).add(rv.beta_demand[j][t], 1.0);
                dual.add(rv.sig_demand[j][t], -hw);
                model.add_constraint(sizing::detail::jt("duD", j, t), dual, mip::Sense::ge, 0.0);
            }
            if (spec_pv) {
                double hw = spec_pv->half_width * sc.pv_per_unit[static_cast<std::size_t>(t)];
                mip::LinExpr dual;
                dual.add(rv.alpha_pv, 1.0).add(rv.beta_pv[j][t], 1.0);
                dual.add(rv.sig_pv[j][t], -hw);
                model.add_constraint(sizing::detail::jt("duPV", j, t), dual, mip::Sense::ge, 0.0);
                mip::LinExpr cover;
                cover.add(rv.sig_pv[j][t], 1.0).add(v.p_pv, -1.0);
                model.add_constraint(sizing::detail::jt("sgPV", j, t), cover, mip::Sense::ge,
                                     0.0);
            }
        }
    }
}

struct RobustBuild {
    sizing::SizingModel model;
    RobustVars vars;
};

/// Assembles the robust counterpart: the deterministic constraint stack with
/// the energy balance swapped out when demand or PV uncertainty is active,
/// plus the dual machinery of every enabled uncertainty.
inline RobustBuild build_robust_model(const sizing::Inputs& in, const sizing::SizingOptions& opt,
                                      const RobustSpecs& specs) {
    sizing::SizingModel sm(in, opt);
    RobustVars rv;
    if (specs.demand || specs.pv) {
        add_demand_pv_robust(sm, rv, specs.demand, specs.pv);
    } else {
        sm.add_energy_balance();
    }
    sm.add_grid_exclusivity();
    sm.add_pv_limits();
    sm.add_bess_operation();
    sm.add_sizing_coupling();
    sm.add_demand_charge();
    sm.add_cycle_accounting();
    sm.add_cycle_life();
    if (specs.price) add_price_robust(sm, rv, *specs.price, specs.single_sided_exposure);
    sm.set_objective();
    return {std::move(sm), std::move(rv)};
}

}  // namespace xfcs::robust

#endif
