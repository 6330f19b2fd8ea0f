#ifndef XFCS_SOLVE_HPP
#define XFCS_SOLVE_HPP

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xfcs/common.hpp"
#include "xfcs/model.hpp"

namespace xfcs::mip {

/// External solver invocation. The command is a template; {lp}, {sol},
/// {gap} and {time} are substituted per call. XFCS_SOLVER in the
/// environment overrides the whole template.
struct BackendConfig {
    std::vector<std::string> command;  // e.g. {"python3","tools/highs_solve.py","{lp}","{sol}",...}
    double mip_rel_gap = 1e-4;
    double time_limit_s = 600;
    double feasibility_tol = 1e-6;
    bool native_sos2 = false;  // reformulate SOS2 into binaries before export
    bool polish = true;        // re-solve LP with integers fixed at the incumbent
    bool keep_files = false;
    std::filesystem::path work_dir;  // empty: use a fresh temp directory

    static BackendConfig with_env_override(BackendConfig cfg) {
        if (const char* env = std::getenv("XFCS_SOLVER")) {
            cfg.command.clear();
            std::istringstream ss(env);
            std::string tok;
            while (ss >> tok) cfg.command.push_back(tok);
        }
        return cfg;
    }
};

using InprocessBackend = std::function<Solution(const Model&, const BackendConfig&)>;

namespace detail {

inline std::map<std::string, InprocessBackend>& backend_registry() {
    static std::map<std::string, InprocessBackend> reg;
    return reg;
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

inline std::string substitute(const std::string& token, const std::string& lp,
                              const std::string& sol, const BackendConfig& cfg) {
    std::string out = token;
    auto replace_all = [&out](const std::string& key, const std::string& val) {
        std::size_t pos;
        while ((pos = out.find(key)) != std::string::npos) out.replace(pos, key.size(), val);
    };
    replace_all("{lp}", lp);
    replace_all("{sol}", sol);
    replace_all("{gap}", format_double(cfg.mip_rel_gap));
    replace_all("{time}", format_double(cfg.time_limit_s));
    replace_all("{polish}", cfg.polish ? "1" : "0");
    return out;
}

struct ParsedSolution {
    SolveStatus status = SolveStatus::error;
    double objective = 0;
    double mip_gap = 0;
    std::map<std::string, double> values;
};

inline ParsedSolution parse_solution_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("solver produced no solution file at " + path.string());
    ParsedSolution out;
    std::string key;
    while (in >> key) {
        if (key == "status") {
            std::string s;
            in >> s;
            if (s == "optimal")
                out.status = SolveStatus::optimal;
            else if (s == "infeasible")
                out.status = SolveStatus::infeasible;
            else if (s == "limit")
                out.status = SolveStatus::limit;
            else
                out.status = SolveStatus::error;
        } else if (key == "objective") {
            in >> out.objective;
        } else if (key == "gap") {
            in >> out.mip_gap;
        } else if (key == "var") {
            std::string name;
            double v;
            in >> name >> v;
            out.values[name] = v;
        } else {
            std::string rest;
            std::getline(in, rest);
        }
        if (!in && !in.eof()) throw SolverError("unparseable solution file " + path.string());
    }
    return out;
}

inline std::filesystem::path make_work_dir(const BackendConfig& cfg) {
    if (!cfg.work_dir.empty()) {
        std::filesystem::create_directories(cfg.work_dir);
        return cfg.work_dir;
    }
    static std::atomic<unsigned> counter{0};
    auto base = std::filesystem::temp_directory_path();
    auto dir = base / ("xfcs-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

inline Solution run_external(const Model& model, const BackendConfig& cfg) {
    auto dir = make_work_dir(cfg);
    auto lp_path = dir / "model.lp";
    auto sol_path = dir / "model.sol";
    auto log_path = dir / "solver.log";
    {
        std::ofstream lp(lp_path);
        lp << model.export_lp();
    }

    std::string cmd;
    for (const auto& token : cfg.command) {
        if (!cmd.empty()) cmd += ' ';
        cmd += shell_quote(substitute(token, lp_path.string(), sol_path.string(), cfg));
    }
    cmd += " > " + shell_quote(log_path.string()) + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        std::ifstream log(log_path);
        std::stringstream tail;
        tail << log.rdbuf();
        throw SolverError("solver command failed (exit " + std::to_string(rc) +
                          "): " + cmd + "\n" + tail.str());
    }

    auto parsed = parse_solution_file(sol_path);
    Solution sol;
    sol.status = parsed.status;
    sol.objective = parsed.objective;
    sol.mip_gap = parsed.mip_gap;
    if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::limit) {
        sol.values.assign(model.variables().size(), 0.0);
        for (std::size_t i = 0; i < model.variables().size(); ++i) {
            auto it = parsed.values.find(model.variables()[i].name);
            if (it == parsed.values.end())
                throw SolverError("solution file misses variable " +
                                  model.variables()[i].name);
            sol.values[i] = it->second;
        }
    }
    if (!cfg.keep_files) std::filesystem::remove_all(dir);
    return sol;
}

}  // namespace detail

inline void register_backend(const std::string& name, InprocessBackend fn) {
    detail::backend_registry()[name] = std::move(fn);
}

/// Solves the model. SOS2 sets are reformulated for backends without native
/// support; optimal solutions are re-checked in-IR (residuals, integrality,
/// SOS2 adjacency) before being returned.
inline Solution solve(const Model& model, const BackendConfig& config) {
    BackendConfig cfg = BackendConfig::with_env_override(config);
    if (cfg.command.empty()) throw SolverError("no solver backend configured");

    const Model* to_solve = &model;
    Model reformulated;
    if (!model.sos2_sets().empty() && !cfg.native_sos2) {
        reformulated = model;
        reformulated.reformulate_sos2();
        to_solve = &reformulated;
    }

    Solution sol;
    const std::string& head = cfg.command.front();
    if (head.rfind("inprocess:", 0) == 0) {
        auto& reg = detail::backend_registry();
        auto it = reg.find(head.substr(10));
        if (it == reg.end()) throw SolverError("unknown in-process backend " + head);
        sol = it->second(*to_solve, cfg);
    } else {
        sol = detail::run_external(*to_solve, cfg);
    }

    if (sol.status == SolveStatus::optimal) {
        auto violations = to_solve->check_solution(sol.values, cfg.feasibility_tol);
        if (!violations.empty()) {
            std::string msg = "solver returned an infeasible 'optimal' point:";
            for (std::size_t i = 0; i < violations.size() && i < 5; ++i)
                msg += " " + violations[i].name + " (" + format_double(violations[i].residual) +
                       ")";
            throw SolverError(msg);
        }
        // adjacency of the original SOS2 sets, independent of the backend
        if (to_solve != &model) {
            std::vector<double> original(model.variables().size());
            for (std::size_t i = 0; i < original.size(); ++i) original[i] = sol.values[i];
            for (const auto& set : model.sos2_sets()) {
                int first = -1, last = -1;
                for (std::size_t i = 0; i < set.members.size(); ++i) {
                    if (std::abs(original[static_cast<std::size_t>(set.members[i])]) > 1e-7) {
                        if (first < 0) first = static_cast<int>(i);
                        last = static_cast<int>(i);
                    }
                }
                if (first >= 0 && last - first > 1)
                    throw SolverError("SOS2 adjacency violated in set " + set.name);
            }
            sol.values.resize(model.variables().size());
        }
    }
    return sol;
}

}  // namespace xfcs::mip

#endif
