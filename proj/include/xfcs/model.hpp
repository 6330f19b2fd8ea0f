#ifndef XFCS_MODEL_HPP
#define XFCS_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xfcs/common.hpp"

namespace xfcs::mip {

using VarId = int;

enum class VarKind { cont, bin };
enum class Sense { le, eq, ge };

inline const char* sense_text(Sense s) {
    switch (s) {
        case Sense::le: return "<=";
        case Sense::eq: return "=";
        case Sense::ge: return ">=";
    }
    return "?";
}

/// Sparse linear expression over model variables. Repeated vars are merged
/// on use so builders can add coefficients incrementally.
class LinExpr {
  public:
    LinExpr() = default;

    LinExpr& add(VarId v, double coef) {
        if (coef != 0) terms_.emplace_back(v, coef);
        return *this;
    }
    LinExpr& operator+=(const LinExpr& other) {
        terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
        return *this;
    }

    /// Terms merged by variable, in first-seen order, zeros dropped.
    std::vector<std::pair<VarId, double>> collect() const {
        std::vector<std::pair<VarId, double>> out;
        std::unordered_map<VarId, std::size_t> pos;
        for (const auto& [v, c] : terms_) {
            auto it = pos.find(v);
            if (it == pos.end()) {
                pos[v] = out.size();
                out.emplace_back(v, c);
            } else {
                out[it->second].second += c;
            }
        }
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [](const auto& t) { return t.second == 0.0; }),
                  out.end());
        return out;
    }

    bool empty() const { return terms_.empty(); }

  private:
    std::vector<std::pair<VarId, double>> terms_;
};

struct Variable {
    std::string name;
    VarKind kind = VarKind::cont;
    double lower = 0;
    double upper = 0;
};

struct Constraint {
    std::string name;
    std::vector<std::pair<VarId, double>> terms;
    Sense sense = Sense::le;
    double rhs = 0;
};

struct Sos2Set {
    std::string name;
    std::vector<VarId> members;  // ordered; weights are 1..n
};

struct ConstraintViolation {
    std::string name;
    double residual = 0;
};

/// Solver-agnostic MILP. Construction is single-writer; a built model is
/// immutable from the solver bridge's point of view.
class Model {
  public:
    VarId add_variable(const std::string& name, VarKind kind, double lower, double upper) {
        if (kind == VarKind::bin) {
            lower = std::max(lower, 0.0);
            upper = std::min(upper, 1.0);
        }
        if (lower > upper)
            throw ConfigError("variable " + name + ": lower bound exceeds upper bound");
        if (names_.count(name)) throw ConfigError("duplicate variable name " + name);
        VarId id = static_cast<VarId>(vars_.size());
        vars_.push_back({name, kind, lower, upper});
        names_.emplace(name, id);
        return id;
    }

    void add_constraint(const std::string& name, const LinExpr& expr, Sense sense, double rhs) {
        Constraint c;
        c.name = name;
        c.terms = expr.collect();
        for (const auto& [v, coef] : c.terms) check_var(v);
        c.sense = sense;
        c.rhs = rhs;
        constraints_.push_back(std::move(c));
    }

    void add_sos2(const std::string& name, std::vector<VarId> members) {
        if (members.size() < 2) throw ConfigError("SOS2 set " + name + " needs >= 2 members");
        for (VarId v : members) check_var(v);
        sos2_.push_back({name, std::move(members)});
    }

    void set_objective(const LinExpr& expr) { objective_ = expr.collect(); }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Sos2Set>& sos2_sets() const { return sos2_; }
    const std::vector<std::pair<VarId, double>>& objective() const { return objective_; }

    VarId var_id(const std::string& name) const {
        auto it = names_.find(name);
        if (it == names_.end()) throw ConfigError("unknown variable " + name);
        return it->second;
    }

    /// Pins a variable to a constant.
    void fix_variable(VarId v, double value) {
        check_var(v);
        vars_[static_cast<std::size_t>(v)].lower = value;
        vars_[static_cast<std::size_t>(v)].upper = value;
    }

    double objective_value(const std::vector<double>& x) const {
        double s = 0;
        for (const auto& [v, c] : objective_) s += c * x[static_cast<std::size_t>(v)];
        return s;
    }

    /// Replaces every SOS2 set with a binary segment-selection formulation
    /// for backends without native SOS support: one binary per adjacent pair,
    /// exactly one active, each member capped by its incident segments.
    void reformulate_sos2(double member_upper_hint = 1.0) {
        for (const auto& set : sos2_) {
            std::size_t n = set.members.size();
            std::vector<VarId> seg;
            LinExpr one;
            for (std::size_t s = 0; s + 1 < n; ++s) {
                VarId z = add_variable(set.name + "_seg" + std::to_string(s), VarKind::bin, 0, 1);
                seg.push_back(z);
                one.add(z, 1.0);
            }
            add_constraint(set.name + "_onehot", one, Sense::eq, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                LinExpr cap;
                cap.add(set.members[i], 1.0);
                if (i > 0) cap.add(seg[i - 1], -member_upper_hint);
                if (i + 1 < n) cap.add(seg[i], -member_upper_hint);
                add_constraint(set.name + "_adj" + std::to_string(i), cap, Sense::le, 0.0);
            }
        }
        sos2_.clear();
    }

    /// Checks a candidate point against every constraint, bound, binary
    /// integrality requirement, and SOS2 adjacency rule.
    std::vector<ConstraintViolation> check_solution(const std::vector<double>& x,
                                                    double tol = 1e-6) const {
        std::vector<ConstraintViolation> out;
        if (x.size() != vars_.size()) {
            out.push_back({"<dimension>", 0});
            return out;
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            const Variable& v = vars_[i];
            double value = x[i];
            if (value < v.lower - tol || value > v.upper + tol)
                out.push_back({v.name + "<bounds>", std::max(v.lower - value, value - v.upper)});
            if (v.kind == VarKind::bin && std::abs(value - std::round(value)) > tol)
                out.push_back({v.name + "<integrality>", std::abs(value - std::round(value))});
        }
        for (const auto& c : constraints_) {
            double lhs = 0;
            for (const auto& [v, coef] : c.terms) lhs += coef * x[static_cast<std::size_t>(v)];
            double res = 0;
            switch (c.sense) {
                case Sense::le: res = lhs - c.rhs; break;
                case Sense::ge: res = c.rhs - lhs; break;
                case Sense::eq: res = std::abs(lhs - c.rhs); break;
            }
            if (res > tol) out.push_back({c.name, res});
        }
        for (const auto& set : sos2_) {
            int first = -1, last = -1;
            for (std::size_t i = 0; i < set.members.size(); ++i) {
                if (std::abs(x[static_cast<std::size_t>(set.members[i])]) > tol) {
                    if (first < 0) first = static_cast<int>(i);
                    last = static_cast<int>(i);
                }
            }
            if (first >= 0 && last - first > 1)
                out.push_back({set.name + "<sos2>", static_cast<double>(last - first)});
        }
        return out;
    }

    /// Deterministic LP-format rendering. Long rows wrap, numbers use
    /// shortest round-trip formatting, so equal models export equal bytes.
    std::string export_lp() const {
        if (objective_.empty() && constraints_.empty() && vars_.empty())
            throw ConfigError("refusing to export an empty model");
        std::ostringstream os;
        os << "\\ xfcs model\n";
        os << "Minimize\n";
        write_row(os, " obj:", objective_);
        os << "Subject To\n";
        for (const auto& c : constraints_) {
            std::ostringstream row;
            row << ' ' << c.name << ':';
            write_row_terms(row, c.terms);
            row << ' ' << sense_text(c.sense) << ' ' << format_double(c.rhs);
            wrap(os, row.str());
        }
        os << "Bounds\n";
        for (const auto& v : vars_) {
            if (v.kind == VarKind::bin) continue;  // binaries imply [0,1]
            if (std::isinf(v.lower) && std::isinf(v.upper)) {
                os << ' ' << v.name << " free\n";
            } else {
                os << ' ' << format_double(v.lower) << " <= " << v.name
                   << " <= " << format_double(v.upper) << '\n';
            }
        }
        bool any_bin = false;
        for (const auto& v : vars_) any_bin = any_bin || v.kind == VarKind::bin;
        if (any_bin) {
            os << "Binaries\n";
            std::string line;
            for (const auto& v : vars_) {
                if (v.kind != VarKind::bin) continue;
                if (line.size() + v.name.size() + 1 > 200) {
                    os << ' ' << line << '\n';
                    line.clear();
                }
                if (!line.empty()) line += ' ';
                line += v.name;
            }
            if (!line.empty()) os << ' ' << line << '\n';
        }
        if (!sos2_.empty()) {
            os << "SOS\n";
            for (const auto& set : sos2_) {
                std::ostringstream row;
                row << ' ' << set.name << ": S2::";
                for (std::size_t i = 0; i < set.members.size(); ++i)
                    row << ' ' << vars_[static_cast<std::size_t>(set.members[i])].name << ':'
                        << (i + 1);
                wrap(os, row.str());
            }
        }
        os << "End\n";
        return os.str();
    }

  private:
    void check_var(VarId v) const {
        if (v < 0 || static_cast<std::size_t>(v) >= vars_.size())
            throw ConfigError("constraint references unregistered variable id " +
                              std::to_string(v));
    }

    void write_row_terms(std::ostringstream& os,
                         const std::vector<std::pair<VarId, double>>& terms) const {
        if (terms.empty() && !vars_.empty()) {
            os << " + 0 " << vars_.front().name;
            return;
        }
        for (const auto& [v, c] : terms) {
            os << (c < 0 ? " - " : " + ") << format_double(std::abs(c)) << ' '
               << vars_[static_cast<std::size_t>(v)].name;
        }
    }

    void write_row(std::ostringstream& os, const std::string& head,
                   const std::vector<std::pair<VarId, double>>& terms) const {
        std::ostringstream row;
        row << head;
        write_row_terms(row, terms);
        wrap(os, row.str());
    }

    static void wrap(std::ostringstream& os, const std::string& row) {
        constexpr std::size_t kWidth = 220;
        std::size_t pos = 0;
        while (row.size() - pos > kWidth) {
            std::size_t cut = row.rfind(' ', pos + kWidth);
            if (cut == std::string::npos || cut <= pos) break;
            os << row.substr(pos, cut - pos) << '\n' << ' ';
            pos = cut + 1;
        }
        os << row.substr(pos) << '\n';
    }

    std::vector<Variable> vars_;
    std::vector<Constraint> constraints_;
    std::vector<Sos2Set> sos2_;
    std::vector<std::pair<VarId, double>> objective_;
    std::map<std::string, VarId> names_;
};

enum class SolveStatus { optimal, infeasible, limit, error };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::limit: return "limit";
        case SolveStatus::error: return "error";
    }
    return "?";
}

struct Solution {
    SolveStatus status = SolveStatus::error;
    double objective = 0;
    double mip_gap = 0;
    std::vector<double> values;  // indexed by VarId of the solved model

    double value(VarId v) const { return values[static_cast<std::size_t>(v)]; }
};

}  // namespace xfcs::mip

#endif
