// Command-line front end: demand generation, sizing solves, sensitivity
// sweeps, relaxation audits and report emission.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xfcs/analysis.hpp"
#include "xfcs/config.hpp"

namespace fs = std::filesystem;
using namespace xfcs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitQa = 4;

void write_demand_csv(const fleet::DemandProfile& p, const fs::path& path) {
    std::vector<std::vector<double>> rows;
    for (int m = 0; m < kMinutesPerDay; ++m)
        rows.push_back({static_cast<double>(m), p.energy_kwh[static_cast<std::size_t>(m)]});
    csv::write(path, {"minute", "kWh"}, rows);
}

struct SolveFlags {
    std::string mode = "det";
    bool no_degradation = false;
    double fix_pv = -1;
    std::vector<double> fix_bess;  // energy kWh, power kW
    int dt = 0;
    int partitions = 0;
    bool keep_lp = false;
};

int cmd_demand(const std::string& config_path, const std::string& out_dir) {
    auto config = cfg::load_config(config_path);
    auto profiles = config.generate_demand();
    fs::create_directories(out_dir);
    write_demand_csv(profiles.weekday, fs::path(out_dir) / "demand_weekday.csv");
    write_demand_csv(profiles.weekend, fs::path(out_dir) / "demand_weekend.csv");
    std::cout << "weekday total " << format_double(profiles.weekday.total()) << " kWh, rejected "
              << profiles.weekday.rejected_count << "\n";
    std::cout << "weekend total " << format_double(profiles.weekend.total()) << " kWh, rejected "
              << profiles.weekend.rejected_count << "\n";
    return kExitOk;
}

int cmd_solve(const std::string& config_path, const std::string& out_dir,
              const SolveFlags& flags) {
    auto config = cfg::load_config(config_path);
    if (flags.dt > 0) config.dt_minutes = flags.dt;
    if (flags.partitions > 0) config.mccormick_partitions = flags.partitions;
    config.backend.keep_files = flags.keep_lp;
    auto study = analysis::Study::prepare(std::move(config));

    sizing::SizingOptions opt = study.base_options();
    opt.degradation = !flags.no_degradation;
    if (flags.fix_pv >= 0) opt.fix_pv_kw = flags.fix_pv;
    if (!flags.fix_bess.empty()) {
        if (flags.fix_bess.size() != 2)
            throw ConfigError("--fix-bess expects ENERGY_KWH POWER_KW");
        opt.fix_bess_energy_kwh = flags.fix_bess[0];
        opt.fix_bess_power_kw = flags.fix_bess[1];
    }

    robust::RobustSpecs specs;
    const robust::RobustSpecs* specs_ptr = nullptr;
    if (flags.mode == "robust") {
        specs.price = study.config.robust_cfg.price;
        specs.demand = study.config.robust_cfg.demand;
        specs.pv = study.config.robust_cfg.pv;
        specs.single_sided_exposure = study.config.robust_cfg.single_sided_exposure;
        if (!specs.price && !specs.demand && !specs.pv)
            throw ConfigError("robust mode requested but no uncertainty configured");
        specs_ptr = &specs;
    } else if (flags.mode != "det") {
        throw ConfigError("--mode must be det or robust");
    }

    analysis::RunReport base = analysis::run_base_case(study, specs_ptr);
    analysis::RunReport rep = analysis::run_case(study, opt, specs_ptr, flags.mode);
    analysis::apply_baseline(rep, base.objective);

    fs::create_directories(out_dir);
    analysis::emit_report({rep}, out_dir);
    analysis::write_traces(rep.decision, study.config.dt_minutes, fs::path(out_dir) / "traces");
    {
        std::ofstream out(fs::path(out_dir) / "decision.json");
        out << analysis::to_json(rep).dump(1) << '\n';
    }
    std::cout << "objective " << format_double(rep.objective) << " $/yr (baseline "
              << format_double(base.objective) << ", savings " << format_double(rep.savings)
              << ")\n";
    std::cout << "C_BESS " << format_double(rep.decision.c_bess_kwh) << " kWh, P_BESS "
              << format_double(rep.decision.p_bess_kw) << " kW, DoD "
              << format_double(rep.decision.dod_pct) << " %, PV "
              << format_double(rep.decision.p_pv_kw) << " kW\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::string& parameter, std::vector<double> grid, int jobs, int dt) {
    auto config = cfg::load_config(config_path);
    if (dt > 0) config.dt_minutes = dt;
    auto study = analysis::Study::prepare(std::move(config));
    analysis::SweepSpec spec;
    spec.parameter = analysis::sweep_parameter_from(parameter);
    spec.grid = std::move(grid);
    spec.jobs = jobs;
    auto reports = analysis::run_sweep(study, spec);
    fs::create_directories(out_dir);
    analysis::emit_report(reports, out_dir);
    int failures = 0;
    for (const auto& r : reports)
        if (r.status != mip::SolveStatus::optimal) ++failures;
    std::cout << reports.size() << " points, " << failures << " failures\n";
    return failures == 0 ? kExitOk : kExitSolver;
}

int cmd_qa(const std::string& config_path, const std::string& out_dir, int dt) {
    auto config = cfg::load_config(config_path);
    if (dt > 0) config.dt_minutes = dt;
    auto study = analysis::Study::prepare(std::move(config));
    auto qa = analysis::relaxation_qa(study);
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["relaxed"] = analysis::to_json(qa.relaxed);
    j["fixed"] = analysis::to_json(qa.fixed);
    j["savings_gap_pct"] = qa.savings_gap_pct;
    j["components"] = nlohmann::json::array();
    for (const auto& c : qa.components) {
        j["components"].push_back({{"component", c.component},
                                   {"relaxed", c.relaxed},
                                   {"fixed", c.fixed},
                                   {"gap_pct", c.gap_pct}});
        std::cout << c.component << ": relaxed " << format_double(c.relaxed) << ", fixed "
                  << format_double(c.fixed) << ", gap " << format_double(c.gap_pct) << " %\n";
    }
    std::cout << "savings gap " << format_double(qa.savings_gap_pct) << " %\n";
    std::ofstream out(fs::path(out_dir) / "qa.json");
    out << j.dump(1) << '\n';
    return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& out_dir) {
    std::ifstream in(in_path);
    if (!in) throw ConfigError("cannot open " + in_path);
    nlohmann::json j;
    in >> j;
    if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty run array");
    fs::create_directories(out_dir);
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) {
        const auto& d = r.at("decision");
        const auto& c = r.at("cost");
        rows.push_back({r.value("parameter", 0.0), r.at("objective").get<double>(),
                        r.at("savings").get<double>(), r.value("aroi_pct", 0.0),
                        d.at("c_bess_kwh").get<double>(), d.at("p_bess_kw").get<double>(),
                        d.at("dod_pct").get<double>(), d.at("annual_cycles").get<double>(),
                        d.at("p_pv_kw").get<double>(), d.at("p_annual_kw").get<double>(),
                        c.at("mdc").get<double>() + c.at("adc").get<double>(),
                        c.at("icom_bess").get<double>(), c.at("icom_pv").get<double>(),
                        c.at("opc").get<double>()});
    }
    csv::write(fs::path(out_dir) / "table.csv",
               {"parameter", "objective", "savings", "aroi_pct", "c_bess_kwh", "p_bess_kw",
                "dod_pct", "annual_cycles", "p_pv_kw", "p_annual_kw", "demand_charges",
                "icom_bess", "icom_pv", "opc"},
               rows);
    std::cout << rows.size() << " rows written\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"XFCS battery/PV sizing toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", parameter, report_in;
    std::vector<double> grid;
    int jobs = 1, dt = 0;
    SolveFlags flags;

    auto* demand = app.add_subcommand("demand", "generate daily charging-demand profiles");
    demand->add_option("--config", config_path)->required();
    demand->add_option("--out", out_dir);

    auto* solve = app.add_subcommand("solve", "build and solve the sizing model");
    solve->add_option("--config", config_path)->required();
    solve->add_option("--out", out_dir);
    solve->add_option("--mode", flags.mode, "det|robust");
    solve->add_flag("--no-degradation", flags.no_degradation);
    solve->add_option("--fix-pv", flags.fix_pv, "pin the PV rating [kW]");
    solve->add_option("--fix-bess", flags.fix_bess, "pin the BESS size: ENERGY_KWH POWER_KW")
        ->expected(2);
    solve->add_option("--dt", flags.dt, "model step in minutes");
    solve->add_option("--partitions", flags.partitions, "piecewise McCormick partitions");
    solve->add_flag("--keep-lp", flags.keep_lp, "keep solver exchange files");

    auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over one parameter");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--out", out_dir);
    sweep->add_option("--parameter", parameter)->required();
    sweep->add_option("--grid", grid, "grid values")->required();
    sweep->add_option("--jobs", jobs, "parallel solver processes");
    sweep->add_option("--dt", dt, "model step in minutes");

    auto* qa = app.add_subcommand("qa", "relaxation quality audit (fix-and-resolve)");
    qa->add_option("--config", config_path)->required();
    qa->add_option("--out", out_dir);
    qa->add_option("--dt", dt, "model step in minutes");

    auto* report = app.add_subcommand("report", "re-render a runs.json into CSV tables");
    report->add_option("--in", report_in)->required();
    report->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
        if (demand->parsed()) return cmd_demand(config_path, out_dir);
        if (solve->parsed()) return cmd_solve(config_path, out_dir, flags);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, parameter, grid, jobs, dt);
        if (qa->parsed()) return cmd_qa(config_path, out_dir, dt);
        if (report->parsed()) return cmd_report(report_in, out_dir);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const analysis::QaError& e) {
        std::cerr << "qa failure: " << e.what() << "\n";
        return kExitQa;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IngestError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
