#ifndef XFCS_ANALYSIS_HPP
#define XFCS_ANALYSIS_HPP

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "xfcs/config.hpp"
#include "xfcs/csv.hpp"
#include "xfcs/robust.hpp"
#include "xfcs/sizing.hpp"
#include "xfcs/solve.hpp"

namespace xfcs::analysis {

/// Raised when the relaxation-quality audit cannot complete (exit code 4).
struct QaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a solve needs: parsed config plus the assembled scenario data
/// at both minute and model resolution.
struct Study {
    cfg::AppConfig config;
    scen::ScenarioSet minute_set;  // canonical per-minute data
    scen::ScenarioSet model_set;   // resampled to config.dt_minutes
    scen::CycleLifeCurve curve;    // allowed annual cycles for the model

    sizing::Inputs inputs() const {
        return {&model_set, &config.tariff, &config.costs, &config.tech, &curve};
    }

    sizing::SizingOptions base_options() const {
        sizing::SizingOptions opt;
        opt.pv_cap_max_kw = config.pv_cap_max_kw;
        opt.mccormick_partitions = config.mccormick_partitions;
        return opt;
    }

    static Study prepare(cfg::AppConfig config) {
        auto demand = config.generate_demand();
        auto set = config.assemble(demand);
        return prepare(std::move(config), std::move(set));
    }

    static Study prepare(cfg::AppConfig config, scen::ScenarioSet minute_set) {
        Study st;
        st.curve = config.model_curve();
        st.model_set = config.dt_minutes == 1 ? minute_set
                                              : scen::resample(minute_set, config.dt_minutes);
        st.minute_set = std::move(minute_set);
        st.config = std::move(config);
        return st;
    }

    /// Same study with regenerated demand (other series untouched).
    Study with_demand(const fleet::GeneratedProfiles& demand) const {
        Study st = *this;
        for (int j = 0; j < sizing::kScenarios; ++j) {
            auto& sc = st.minute_set.scenarios[static_cast<std::size_t>(j)];
            sc.demand = (j < 4 ? demand.weekend : demand.weekday).energy_kwh;
        }
        st.model_set = st.config.dt_minutes == 1
                           ? st.minute_set
                           : scen::resample(st.minute_set, st.config.dt_minutes);
        return st;
    }
};

struct RunReport {
    std::string label;
    double parameter = std::numeric_limits<double>::quiet_NaN();
    mip::SolveStatus status = mip::SolveStatus::error;
    double mip_gap = 0;
    double objective = 0;
    double baseline_objective = 0;
    double savings = 0;
    std::optional<double> aroi_pct;
    std::optional<double> eol_years;
    sizing::SizingDecision decision;
};

/// Annualized return on investment in percent.
inline std::optional<double> aroi(double savings, double investment) {
    if (investment <= 0) return std::nullopt;
    return 100.0 * savings / investment;
}

/// Years until the allowed cycles at the chosen DoD are exhausted.
/// nullopt flags a battery that never cycles.
inline std::optional<double> eol_estimate(const sizing::SizingDecision& d,
                                          const scen::CycleLifeCurve& curve) {
    if (d.annual_cycles <= 0) return std::nullopt;
    return curve.cycles_at(d.dod_pct) / d.annual_cycles;
}

/// Builds, solves and extracts one sizing run (deterministic or robust).
inline RunReport run_case(const Study& study, sizing::SizingOptions opt,
                          const robust::RobustSpecs* specs, const std::string& label) {
    sizing::Inputs in = study.inputs();
    RunReport rep;
    rep.label = label;

    auto solve_one = [&](const sizing::SizingModel& sm) {
        mip::Solution sol = mip::solve(sm.model(), study.config.backend);
        rep.status = sol.status;
        rep.mip_gap = sol.mip_gap;
        if (sol.status != mip::SolveStatus::optimal)
            throw SolverError(label + ": solver returned " +
                              std::string(mip::to_string(sol.status)));
        rep.objective = sol.objective;
        rep.decision = sizing::extract_decision(sm, sol);
    };

    if (specs && (specs->price || specs->demand || specs->pv)) {
        auto built = robust::build_robust_model(in, opt, *specs);
        solve_one(built.model);
    } else {
        solve_one(sizing::SizingModel::build(in, opt));
    }
    rep.eol_years = eol_estimate(rep.decision, study.config.curve_raw);
    return rep;
}

/// Reference cost of running the station bare: PV and BESS pinned to zero.
inline RunReport run_base_case(const Study& study, const robust::RobustSpecs* specs = nullptr) {
    sizing::SizingOptions opt = study.base_options();
    opt.fix_pv_kw = 0;
    opt.fix_bess_energy_kwh = 0;
    opt.fix_bess_power_kw = 0;
    opt.degradation = false;  // nothing to degrade with no battery
    return run_case(study, opt, specs, "base");
}

/// Fills savings/AROI of a report against a baseline objective.
inline void apply_baseline(RunReport& rep, double baseline_objective) {
    rep.baseline_objective = baseline_objective;
    rep.savings = baseline_objective - rep.objective;
    rep.aroi_pct = aroi(rep.savings, rep.decision.cost.icom_bess + rep.decision.cost.icom_pv);
}

// ---------------------------------------------------------------------------
// Relaxation quality audit
// ---------------------------------------------------------------------------

struct QaComponentGap {
    std::string component;
    double relaxed = 0;
    double fixed = 0;
    double gap_pct = 0;
};

struct QaReport {
    RunReport relaxed;
    RunReport fixed;
    std::vector<QaComponentGap> components;
    double savings_gap_pct = 0;
};

/// Fix-and-resolve audit: pins the sizing decisions from the relaxed
/// optimum, rebuilds the now exactly-linear model, and reports per-component
/// gaps.
inline QaReport relaxation_qa(const Study& study, const robust::RobustSpecs* specs = nullptr) {
    QaReport qa;
    RunReport base = run_base_case(study, specs);
    qa.relaxed = run_case(study, study.base_options(), specs, "relaxed");
    apply_baseline(qa.relaxed, base.objective);

    sizing::SizingOptions fixed_opt = study.base_options();
    fixed_opt.fix_pv_kw = qa.relaxed.decision.p_pv_kw;
    fixed_opt.fix_bess_energy_kwh = qa.relaxed.decision.c_bess_kwh;
    fixed_opt.fix_bess_power_kw = qa.relaxed.decision.p_bess_kw;
    fixed_opt.fix_dod = qa.relaxed.decision.dod_pct / 100.0;
    fixed_opt.exact_bilinear = true;
    try {
        qa.fixed = run_case(study, fixed_opt, specs, "fixed");
    } catch (const SolverError& e) {
        throw QaError(std::string("fixed model did not solve: ") + e.what());
    }
    apply_baseline(qa.fixed, base.objective);

    auto gap = [](double relaxed, double fixed) {
        double denom = std::abs(fixed) > 1e-9 ? std::abs(fixed) : 1.0;
        return (fixed - relaxed) / denom * 100.0;
    };
    const auto& cr = qa.relaxed.decision.cost;
    const auto& cf = qa.fixed.decision.cost;
    qa.components = {
        {"investment", cr.icom_bess + cr.icom_pv, cf.icom_bess + cf.icom_pv,
         gap(cr.icom_bess + cr.icom_pv, cf.icom_bess + cf.icom_pv)},
        {"operation", cr.opc, cf.opc, gap(cr.opc, cf.opc)},
        {"demand_charges", cr.mdc + cr.adc, cf.mdc + cf.adc, gap(cr.mdc + cr.adc, cf.mdc + cf.adc)},
        {"objective", qa.relaxed.objective, qa.fixed.objective,
         gap(qa.relaxed.objective, qa.fixed.objective)},
    };
    double denom = std::abs(qa.relaxed.savings) > 1e-9 ? std::abs(qa.relaxed.savings) : 1.0;
    qa.savings_gap_pct = (qa.relaxed.savings - qa.fixed.savings) / denom * 100.0;
    return qa;
}

// ---------------------------------------------------------------------------
// Sensitivity sweeps
// ---------------------------------------------------------------------------

enum class SweepParameter { epm, icm, gamma_price, gamma_demand, gamma_pv, departure_shift, ports };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::epm: return "epm";
        case SweepParameter::icm: return "icm";
        case SweepParameter::gamma_price: return "gamma-price";
        case SweepParameter::gamma_demand: return "gamma-demand";
        case SweepParameter::gamma_pv: return "gamma-pv";
        case SweepParameter::departure_shift: return "departure-shift";
        case SweepParameter::ports: return "ports";
    }
    return "?";
}

inline SweepParameter sweep_parameter_from(const std::string& s) {
    for (SweepParameter p :
         {SweepParameter::epm, SweepParameter::icm, SweepParameter::gamma_price,
          SweepParameter::gamma_demand, SweepParameter::gamma_pv, SweepParameter::departure_shift,
          SweepParameter::ports})
        if (s == to_string(p)) return p;
    throw ConfigError("unknown sweep parameter '" + s + "'");
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::epm;
    std::vector<double> grid;
    int jobs = 1;
};

namespace detail {

/// Study variant for one sweep point; demand-reshaping parameters regenerate
/// the profiles with the same seed.
inline Study study_for_point(const Study& base, SweepParameter p, double g) {
    Study st = base;
    switch (p) {
        case SweepParameter::epm:
            for (auto* set : {&st.minute_set, &st.model_set})
                for (auto& sc : set->scenarios)
                    for (double& v : sc.price) v *= g;
            return st;
        case SweepParameter::icm:
            st.config.costs.bess_power_capex *= g;
            st.config.costs.bess_energy_capex *= g;
            st.config.costs.bess_install *= g;
            st.config.costs.pv_capex *= g;
            return st;
        case SweepParameter::departure_shift: {
            for (auto& cat : st.config.fleet.categories)
                if (cat.id == "EVC1") cat.departure_weekday.mean += g;
            return st.with_demand(st.config.generate_demand());
        }
        case SweepParameter::ports: {
            st.config.station.n_ports = static_cast<int>(g);
            return st.with_demand(st.config.generate_demand());
        }
        default:
            return st;  // gamma parameters handled via specs
    }
}

inline robust::RobustSpecs specs_for_point(const Study& st, SweepParameter p, double g) {
    robust::RobustSpecs specs;
    auto budget = [&](const std::optional<robust::UncertaintySpec>& c)
        -> robust::UncertaintySpec {
        robust::UncertaintySpec s = c ? *c : robust::UncertaintySpec{};
        s.budget_minutes = g / 100.0 * kMinutesPerDay;
        return s;
    };
    specs.single_sided_exposure = st.config.robust_cfg.single_sided_exposure;
    if (p == SweepParameter::gamma_price) specs.price = budget(st.config.robust_cfg.price);
    if (p == SweepParameter::gamma_demand) specs.demand = budget(st.config.robust_cfg.demand);
    if (p == SweepParameter::gamma_pv) specs.pv = budget(st.config.robust_cfg.pv);
    return specs;
}

}  // namespace detail

/// Runs the grid, one report per point, solver failures recorded in place.
/// Points execute on a bounded worker pool; output order follows the grid.
inline std::vector<RunReport> run_sweep(const Study& base, const SweepSpec& spec) {
    if (spec.grid.empty()) throw ConfigError("sweep grid must not be empty");
    std::vector<RunReport> reports(spec.grid.size());
    std::atomic<std::size_t> next{0};
    int jobs = std::max(1, spec.jobs);

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= spec.grid.size()) return;
            double g = spec.grid[i];
            RunReport rep;
            rep.parameter = g;
            rep.label = std::string(to_string(spec.parameter)) + "=" + format_double(g);
            try {
                Study st = detail::study_for_point(base, spec.parameter, g);
                bool is_gamma = spec.parameter == SweepParameter::gamma_price ||
                                spec.parameter == SweepParameter::gamma_demand ||
                                spec.parameter == SweepParameter::gamma_pv;
                robust::RobustSpecs specs;
                const robust::RobustSpecs* specs_ptr = nullptr;
                if (is_gamma) {
                    specs = detail::specs_for_point(st, spec.parameter, g);
                    specs_ptr = &specs;
                }
                RunReport point = run_case(st, st.base_options(), specs_ptr, rep.label);
                RunReport point_base = run_base_case(st, specs_ptr);
                apply_baseline(point, point_base.objective);
                point.label = rep.label;
                point.parameter = g;
                rep = std::move(point);
            } catch (const std::exception& e) {
                rep.status = mip::SolveStatus::error;
                rep.label += std::string(" [failed: ") + e.what() + "]";
            }
            reports[i] = std::move(rep);
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j;
    j["label"] = r.label;
    if (!std::isnan(r.parameter)) j["parameter"] = r.parameter;
    j["status"] = mip::to_string(r.status);
    j["mip_gap"] = r.mip_gap;
    j["objective"] = r.objective;
    j["baseline_objective"] = r.baseline_objective;
    j["savings"] = r.savings;
    if (r.aroi_pct) j["aroi_pct"] = *r.aroi_pct;
    if (r.eol_years)
        j["eol_years"] = *r.eol_years;
    else
        j["eol_years"] = nullptr;
    const auto& d = r.decision;
    j["decision"] = {{"c_bess_kwh", d.c_bess_kwh},
                     {"p_bess_kw", d.p_bess_kw},
                     {"dod_pct", d.dod_pct},
                     {"annual_cycles", d.annual_cycles},
                     {"annual_cycles_actual", d.annual_cycles_actual},
                     {"p_pv_kw", d.p_pv_kw},
                     {"p_month_kw", d.p_month_kw},
                     {"p_annual_kw", d.p_annual_kw}};
    j["cost"] = {{"mdc", d.cost.mdc},
                 {"adc", d.cost.adc},
                 {"icom_bess", d.cost.icom_bess},
                 {"icom_pv", d.cost.icom_pv},
                 {"opc", d.cost.opc}};
    return j;
}

inline void write_traces(const sizing::SizingDecision& d, int dt_minutes,
                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& tr : d.traces) {
        std::vector<std::vector<double>> rows;
        for (std::size_t t = 0; t < tr.e_imp.size(); ++t) {
            double minute = static_cast<double>(t) * dt_minutes;
            rows.push_back({minute, tr.e_imp[t], tr.e_exp[t], tr.e_ch[t], tr.e_dch[t],
                            tr.e_bess[t], tr.soc_pct[t], tr.p_pv[t]});
        }
        csv::write(dir / ("trace_s" + std::to_string(tr.scenario_id) + ".csv"),
                   {"minute", "e_import_kwh", "e_export_kwh", "e_charge_kwh", "e_discharge_kwh",
                    "e_stored_kwh", "soc_pct", "p_pv_kw"},
                   rows);
        std::vector<std::vector<double>> wrows;
        for (std::size_t k = 0; k < tr.window_avg_kw.size(); ++k)
            wrows.push_back({static_cast<double>(k), tr.window_avg_kw[k]});
        csv::write(dir / ("windows_s" + std::to_string(tr.scenario_id) + ".csv"),
                   {"window", "avg_import_kw"}, wrows);
    }
}

/// Machine-readable JSON plus a flat CSV table, one row per report.
inline void emit_report(const std::vector<RunReport>& reports,
                        const std::filesystem::path& dir) {
    if (reports.empty()) throw ConfigError("nothing to report");
    std::filesystem::create_directories(dir);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(to_json(r));
    std::ofstream out(dir / "runs.json");
    if (!out) throw IngestError("cannot write " + (dir / "runs.json").string());
    out << j.dump(1) << '\n';

    std::vector<std::vector<double>> rows;
    for (const auto& r : reports) {
        const auto& d = r.decision;
        rows.push_back({std::isnan(r.parameter) ? 0.0 : r.parameter,
                        r.status == mip::SolveStatus::optimal ? 1.0 : 0.0, r.objective,
                        r.savings, r.aroi_pct.value_or(0), d.c_bess_kwh, d.p_bess_kw, d.dod_pct,
                        d.annual_cycles, d.p_pv_kw, d.p_annual_kw, d.cost.mdc, d.cost.adc,
                        d.cost.icom_bess, d.cost.icom_pv, d.cost.opc});
    }
    csv::write(dir / "summary.csv",
               {"parameter", "optimal", "objective", "savings", "aroi_pct", "c_bess_kwh",
                "p_bess_kw", "dod_pct", "annual_cycles", "p_pv_kw", "p_annual_kw", "mdc", "adc",
                "icom_bess", "icom_pv", "opc"},
               rows);
}

}  // namespace xfcs::analysis

#endif
