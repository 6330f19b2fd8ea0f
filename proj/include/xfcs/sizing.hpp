#ifndef XFCS_SIZING_HPP
#define XFCS_SIZING_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "xfcs/common.hpp"
#include "xfcs/model.hpp"
#include "xfcs/scenario.hpp"

namespace xfcs::sizing {

inline constexpr int kScenarios = 8;

struct SizingOptions {
    double pv_cap_max_kw = 300;
    int mccormick_partitions = 1;  // 1: standard envelope; >1: piecewise MILP
    bool degradation = true;       // cycle-life cap and DoD floor active
    std::optional<double> fix_pv_kw;
    std::optional<double> fix_bess_energy_kwh;
    std::optional<double> fix_bess_power_kw;
    std::optional<double> fix_dod;  // fraction
    // Replace the bilinear relaxations by exact linear identities; valid only
    // when the coupled sizing variables are fixed (the fix-and-resolve audit).
    bool exact_bilinear = false;
};

struct Inputs {
    const scen::ScenarioSet* scenarios = nullptr;
    const scen::TariffParams* tariff = nullptr;
    const scen::CostParams* costs = nullptr;
    const scen::BessTech* tech = nullptr;
    const scen::CycleLifeCurve* curve = nullptr;  // allowed annual cycles vs DoD%
};

/// Handles for every model variable, indexed scenario-major.
struct VarMap {
    std::array<std::vector<mip::VarId>, kScenarios> e_imp, e_exp, e_ac, u_grid;
    std::array<std::vector<mip::VarId>, kScenarios> e_ch, e_dch, e_bess, u_bess, p_pv_t;
    std::array<mip::VarId, kScenarios> e_bess_init{};
    mip::VarId p_pv = -1, c_bess = -1, p_rated = -1;
    mip::VarId dod = -1, psi = -1, y = -1, omega = -1, zeta = -1;
    std::vector<mip::VarId> rho;
    std::array<std::vector<mip::VarId>, kScenarios> p_avg;
    std::array<mip::VarId, kScenarios> p_daily{};
    std::array<mip::VarId, 4> p_month{};
    mip::VarId p_annual = -1;
};

namespace detail {

inline std::string jt(const std::string& stem, int j, int t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_j%d_t%04d", j + 1, t);
    return stem + buf;
}

}  // namespace detail

/// Builds the deterministic sizing MILP over an eight-scenario year. The
/// robust counterpart reuses every piece except the energy balance.
class SizingModel {
  public:
    SizingModel() = default;

    SizingModel(const Inputs& in, const SizingOptions& opt) : in_(in), opt_(opt) {
        in_.scenarios->validate();
        in_.tariff->validate();
        in_.costs->validate();
        in_.tech->validate();
        in_.curve->validate();
        if (in_.tariff->window_minutes % in_.scenarios->dt_minutes != 0)
            throw ConfigError("demand-charge window must be a whole number of steps");
        steps_ = in_.scenarios->steps();
        dt_h_ = in_.scenarios->dt_hours();
        demand_peak_ = in_.tech->demand_cap_kwh > 0 ? in_.tech->demand_cap_kwh
                                                    : in_.scenarios->max_demand_energy();
        create_variables();
    }

    mip::Model& model() { return model_; }
    const mip::Model& model() const { return model_; }
    VarMap& vars() { return vars_; }
    const VarMap& vars() const { return vars_; }
    const Inputs& inputs() const { return in_; }
    const SizingOptions& options() const { return opt_; }
    int steps() const { return steps_; }
    double dt_hours() const { return dt_h_; }
    double demand_peak_energy() const { return demand_peak_; }

    /// Extra objective terms (the robust dual machinery) appended by
    /// set_objective.
    mip::LinExpr& objective_extras() { return extra_objective_; }

    /// Per-(j,t) DC-bus energy balance with converter losses, Eq. set (10)
    /// and (12).
    void add_energy_balance() {
        const double eff = in_.tech->converter_eff();
        for (int j = 0; j < kScenarios; ++j) {
            const auto& sc = in_.scenarios->scenarios[static_cast<std::size_t>(j)];
            for (int t = 0; t < steps_; ++t) {
                mip::LinExpr e;
                e.add(vars_.e_imp[j][t], eff);
                e.add(vars_.e_exp[j][t], -1.0 / eff);
                e.add(vars_.e_ch[j][t], -1.0);
                e.add(vars_.e_dch[j][t], 1.0);
                e.add(vars_.p_pv_t[j][t], dt_h_);
                model_.add_constraint(detail::jt("eb", j, t), e, mip::Sense::eq,
                                      sc.demand[static_cast<std::size_t>(t)]);
                add_ac_definition(j, t);
            }
        }
    }

    /// Big-M exclusivity of grid import and export.
    void add_grid_exclusivity() {
        const double eff = in_.tech->converter_eff();
        const double m_imp = 2.0 * demand_peak_ / eff + 1.0;
        const double m_exp = (opt_.pv_cap_max_kw * dt_h_ + demand_peak_) * eff + 1.0;
        for (int j = 0; j < kScenarios; ++j) {
            for (int t = 0; t < steps_; ++t) {
                mip::LinExpr imp;
                imp.add(vars_.e_imp[j][t], 1.0).add(vars_.u_grid[j][t], -m_imp);
                model_.add_constraint(detail::jt("gxi", j, t), imp, mip::Sense::le, 0.0);
                mip::LinExpr exp;
                exp.add(vars_.e_exp[j][t], 1.0).add(vars_.u_grid[j][t], m_exp);
                model_.add_constraint(detail::jt("gxe", j, t), exp, mip::Sense::le, m_exp);
            }
        }
    }

    /// PV dispatch cannot exceed the per-unit profile scaled by the rating.
    void add_pv_limits() {
        for (int j = 0; j < kScenarios; ++j) {
            const auto& sc = in_.scenarios->scenarios[static_cast<std::size_t>(j)];
            for (int t = 0; t < steps_; ++t) {
                mip::LinExpr e;
                e.add(vars_.p_pv_t[j][t], 1.0);
                e.add(vars_.p_pv, -sc.pv_per_unit[static_cast<std::size_t>(t)]);
                model_.add_constraint(detail::jt("pvl", j, t), e, mip::Sense::le, 0.0);
            }
        }
    }

    /// Storage dynamics, power caps, charge/discharge exclusivity, daily
    /// neutrality, headroom/availability and ramp limits.
    void add_bess_operation() {
        const double m_bess = power_upper_bound() * dt_h_ + 1.0;
        const double ramp = in_.tech->ramp_kwh_per_min * in_.scenarios->dt_minutes;
        for (int j = 0; j < kScenarios; ++j) {
            mip::LinExpr neutrality;
            for (int t = 0; t < steps_; ++t) {
                mip::LinExpr dyn;
                dyn.add(vars_.e_bess[j][t], 1.0);
                dyn.add(t == 0 ? vars_.e_bess_init[j] : vars_.e_bess[j][t - 1], -1.0);
                dyn.add(vars_.e_ch[j][t], -in_.tech->eta_ch);
                dyn.add(vars_.e_dch[j][t], 1.0 / in_.tech->eta_dch);
                model_.add_constraint(detail::jt("dyn", j, t), dyn, mip::Sense::eq, 0.0);

                mip::LinExpr chcap;
                chcap.add(vars_.e_ch[j][t], 1.0).add(vars_.p_rated, -dt_h_);
                model_.add_constraint(detail::jt("chc", j, t), chcap, mip::Sense::le, 0.0);
                mip::LinExpr dchcap;
                dchcap.add(vars_.e_dch[j][t], 1.0).add(vars_.p_rated, -dt_h_);
                model_.add_constraint(detail::jt("dcc", j, t), dchcap, mip::Sense::le, 0.0);

                mip::LinExpr bxc;
                bxc.add(vars_.e_ch[j][t], 1.0).add(vars_.u_bess[j][t], -m_bess);
                model_.add_constraint(detail::jt("bxc", j, t), bxc, mip::Sense::le, 0.0);
                mip::LinExpr bxd;
                bxd.add(vars_.e_dch[j][t], 1.0).add(vars_.u_bess[j][t], m_bess);
                model_.add_constraint(detail::jt("bxd", j, t), bxd, mip::Sense::le, m_bess);

                mip::LinExpr headroom;  // charge limited by free capacity
                headroom.add(vars_.e_ch[j][t], 1.0)
                    .add(vars_.e_bess[j][t], 1.0)
                    .add(vars_.c_bess, -1.0);
                model_.add_constraint(detail::jt("hro", j, t), headroom, mip::Sense::le, 0.0);
                mip::LinExpr avail;  // discharge limited by stored energy
                avail.add(vars_.e_dch[j][t], 1.0).add(vars_.e_bess[j][t], -1.0);
                model_.add_constraint(detail::jt("avl", j, t), avail, mip::Sense::le, 0.0);

                mip::LinExpr dUp;
                dUp.add(vars_.e_bess[j][t], 1.0);
                dUp.add(t == 0 ? vars_.e_bess_init[j] : vars_.e_bess[j][t - 1], -1.0);
                model_.add_constraint(detail::jt("rup", j, t), dUp, mip::Sense::le, ramp);
                mip::LinExpr dDn;
                dDn.add(t == 0 ? vars_.e_bess_init[j] : vars_.e_bess[j][t - 1], 1.0);
                dDn.add(vars_.e_bess[j][t], -1.0);
                model_.add_constraint(detail::jt("rdn", j, t), dDn, mip::Sense::le, ramp);

                neutrality.add(vars_.e_dch[j][t], 1.0 / in_.tech->eta_dch);
                neutrality.add(vars_.e_ch[j][t], -in_.tech->eta_ch);
            }
            model_.add_constraint("neu_j" + std::to_string(j + 1), neutrality, mip::Sense::eq,
                                  0.0);
        }
    }

    /// Power rating capped by the demand peak; energy and power ratings
    /// coupled through the gamma ratio band.
    void add_sizing_coupling() {
        mip::LinExpr pcap;
        pcap.add(vars_.p_rated, dt_h_);
        model_.add_constraint("pcap", pcap, mip::Sense::le, demand_peak_);
        mip::LinExpr lo;
        lo.add(vars_.c_bess, 1.0).add(vars_.p_rated, -in_.tech->ratio_min);
        model_.add_constraint("coup_lo", lo, mip::Sense::ge, 0.0);
        mip::LinExpr hi;
        hi.add(vars_.c_bess, 1.0).add(vars_.p_rated, -in_.tech->ratio_max);
        model_.add_constraint("coup_hi", hi, mip::Sense::le, 0.0);
    }

    /// Windowed average import power and the daily/monthly/annual maxima
    /// stack that feeds the demand charges.
    void add_demand_charge() {
        const int wsteps = in_.tariff->window_minutes / in_.scenarios->dt_minutes;
        const int windows = steps_ / wsteps;
        for (int j = 0; j < kScenarios; ++j) {
            for (int k = 0; k < windows; ++k) {
                mip::LinExpr avg;
                avg.add(vars_.p_avg[j][k], wsteps * dt_h_);
                for (int t = k * wsteps; t < (k + 1) * wsteps; ++t)
                    avg.add(vars_.e_imp[j][t], -1.0);
                model_.add_constraint(detail::jt("wavg", j, k), avg, mip::Sense::eq, 0.0);

                mip::LinExpr dmax;
                dmax.add(vars_.p_daily[j], 1.0).add(vars_.p_avg[j][k], -1.0);
                model_.add_constraint(detail::jt("dmax", j, k), dmax, mip::Sense::ge, 0.0);
            }
        }
        for (int s = 0; s < 4; ++s) {
            // season s pairs its weekend scenario s with weekday scenario s+4
            mip::LinExpr we;
            we.add(vars_.p_month[s], 1.0).add(vars_.p_daily[s], -1.0);
            model_.add_constraint("mmax_we_s" + std::to_string(s + 1), we, mip::Sense::ge, 0.0);
            mip::LinExpr wd;
            wd.add(vars_.p_month[s], 1.0).add(vars_.p_daily[s + 4], -1.0);
            model_.add_constraint("mmax_wd_s" + std::to_string(s + 1), wd, mip::Sense::ge, 0.0);
            mip::LinExpr an;
            an.add(vars_.p_annual, 1.0).add(vars_.p_month[s], -1.0);
            model_.add_constraint("amax_s" + std::to_string(s + 1), an, mip::Sense::ge, 0.0);
        }
    }

    /// Annual equivalent-cycle accounting: Y carries the weighted cumulative
    /// discharge energy and stands in for the psi*C product, McCormick
    /// relaxed (optionally piecewise) or exact when C is fixed.
    void add_cycle_accounting() {
        if (opt_.mccormick_partitions < 1) throw ConfigError("partitions must be >= 1");
        mip::LinExpr acc;
        acc.add(vars_.y, 1.0);
        const double w = in_.scenarios->annual_day_weight();
        for (int j = 0; j < kScenarios; ++j) {
            double jw = in_.scenarios->scenarios[static_cast<std::size_t>(j)].weekly_weight;
            for (int t = 0; t < steps_; ++t)
                acc.add(vars_.e_dch[j][t], -w * jw / in_.tech->eta_dch);
        }
        model_.add_constraint("ycyc", acc, mip::Sense::eq, 0.0);

        if (opt_.exact_bilinear) {
            double c_fixed = require_fixed(vars_.c_bess, "C_BESS");
            mip::LinExpr exact;
            exact.add(vars_.y, 1.0).add(vars_.psi, -c_fixed);
            model_.add_constraint("yexact", exact, mip::Sense::eq, 0.0);
            return;
        }
        if (opt_.mccormick_partitions == 1) {
            add_mccormick("mcY", vars_.y, vars_.psi, psi_bounds(), vars_.c_bess, c_bounds());
        } else {
            add_piecewise_mccormick(opt_.mccormick_partitions);
        }
    }

    /// SOS2 interpolation of the cycle-life curve, the cycle cap, and the
    /// DoD floor on stored energy via the omega = DoD*C product.
    void add_cycle_life() {
        if (!opt_.degradation) return;
        const auto& curve = *in_.curve;
        std::size_t nseg = curve.dod_pct.size();
        mip::LinExpr zdef, ddef, rsum;
        zdef.add(vars_.zeta, 1.0);
        ddef.add(vars_.dod, 1.0);
        for (std::size_t s = 0; s < nseg; ++s) {
            zdef.add(vars_.rho[s], -curve.cycles[s]);
            ddef.add(vars_.rho[s], -curve.dod_pct[s] / 100.0);
            rsum.add(vars_.rho[s], 1.0);
        }
        model_.add_constraint("cl_zeta", zdef, mip::Sense::eq, 0.0);
        model_.add_constraint("cl_dod", ddef, mip::Sense::eq, 0.0);
        model_.add_constraint("cl_one", rsum, mip::Sense::eq, 1.0);
        model_.add_sos2("cl_sos", vars_.rho);

        mip::LinExpr cap;
        cap.add(vars_.psi, 1.0).add(vars_.zeta, -1.0);
        model_.add_constraint("cl_cap", cap, mip::Sense::le, 0.0);

        if (opt_.exact_bilinear) {
            double c_fixed = require_fixed(vars_.c_bess, "C_BESS");
            double dod_fixed = require_fixed(vars_.dod, "DoD");
            mip::LinExpr oexact;
            oexact.add(vars_.omega, 1.0).add(vars_.dod, -c_fixed);
            model_.add_constraint("oexact", oexact, mip::Sense::eq, 0.0);
            (void)dod_fixed;
        } else {
            add_mccormick("mcW", vars_.omega, vars_.dod, dod_bounds(), vars_.c_bess, c_bounds());
        }

        for (int j = 0; j < kScenarios; ++j) {
            auto floor_of = [&](mip::VarId e, const std::string& name) {
                mip::LinExpr lo;  // C - omega <= E
                lo.add(vars_.c_bess, 1.0).add(vars_.omega, -1.0).add(e, -1.0);
                model_.add_constraint(name, lo, mip::Sense::le, 0.0);
            };
            floor_of(vars_.e_bess_init[j], "socl_j" + std::to_string(j + 1) + "_init");
            for (int t = 0; t < steps_; ++t)
                floor_of(vars_.e_bess[j][t], detail::jt("socl", j, t));
        }
        // the upper half of the envelope, E <= C, holds for every t via the
        // charging headroom rows; the init state needs it explicitly
        for (int j = 0; j < kScenarios; ++j) {
            mip::LinExpr hi;
            hi.add(vars_.e_bess_init[j], 1.0).add(vars_.c_bess, -1.0);
            model_.add_constraint("soch_j" + std::to_string(j + 1) + "_init", hi, mip::Sense::le,
                                  0.0);
        }
    }

    /// Yearly cost objective: demand charges, annualized investment and O&M,
    /// and the weighted energy-exchange cost, plus any robust terms.
    void set_objective() {
        const double cf =
            scen::annualized_cost_factor(in_.costs->interest, in_.costs->lifetime_years);
        mip::LinExpr obj;
        for (int s = 0; s < 4; ++s)
            obj.add(vars_.p_month[s], in_.tariff->month_scale * in_.tariff->lambda_mdc);
        obj.add(vars_.p_annual, in_.tariff->lambda_adc);
        obj.add(vars_.c_bess, (in_.costs->bess_energy_capex + in_.costs->bess_install) * cf);
        obj.add(vars_.p_rated, in_.costs->bess_power_capex * cf + in_.costs->bess_om);
        obj.add(vars_.p_pv, in_.costs->pv_capex * cf + in_.costs->pv_om);
        const double w = in_.scenarios->annual_day_weight();
        for (int j = 0; j < kScenarios; ++j) {
            const auto& sc = in_.scenarios->scenarios[static_cast<std::size_t>(j)];
            for (int t = 0; t < steps_; ++t)
                obj.add(vars_.e_ac[j][t],
                        w * sc.weekly_weight * sc.price[static_cast<std::size_t>(t)]);
        }
        obj += extra_objective_;
        model_.set_objective(obj);
    }

    /// Full deterministic model per the standard constraint stack.
    static SizingModel build(const Inputs& in, const SizingOptions& opt) {
        SizingModel m(in, opt);
        m.add_energy_balance();
        m.add_grid_exclusivity();
        m.add_pv_limits();
        m.add_bess_operation();
        m.add_sizing_coupling();
        m.add_demand_charge();
        m.add_cycle_accounting();
        m.add_cycle_life();
        m.set_objective();
        return m;
    }

    // -- shared helpers for the robust extension ---------------------------

    void add_ac_definition(int j, int t) {
        mip::LinExpr e;
        e.add(vars_.e_ac[j][t], 1.0).add(vars_.e_imp[j][t], -1.0).add(vars_.e_exp[j][t], 1.0);
        model_.add_constraint(detail::jt("acd", j, t), e, mip::Sense::eq, 0.0);
    }

    double power_upper_bound() const {
        double p = demand_peak_ / dt_h_;
        if (opt_.fix_bess_power_kw) p = std::max(p, *opt_.fix_bess_power_kw);
        return p;
    }

    std::pair<double, double> c_bounds() const {
        if (opt_.fix_bess_energy_kwh)
            return {*opt_.fix_bess_energy_kwh, *opt_.fix_bess_energy_kwh};
        return {in_.tech->energy_min_kwh, in_.tech->energy_max_kwh};
    }
    std::pair<double, double> dod_bounds() const {
        if (opt_.fix_dod) return {*opt_.fix_dod, *opt_.fix_dod};
        return {in_.tech->dod_min, in_.tech->dod_max};
    }
    std::pair<double, double> psi_bounds() const {
        return {0.0, in_.curve->cycles_at(in_.tech->dod_min * 100.0)};
    }

    /// Four-inequality convex hull of prod = a*b over a box.
    void add_mccormick(const std::string& stem, mip::VarId prod, mip::VarId a,
                       std::pair<double, double> ab, mip::VarId b,
                       std::pair<double, double> bb) {
        auto [al, au] = ab;
        auto [bl, bu] = bb;
        auto row = [&](const std::string& name, double ca, double cb, double rhs,
                       mip::Sense sense) {
            mip::LinExpr e;
            e.add(prod, 1.0).add(a, -ca).add(b, -cb);
            model_.add_constraint(stem + name, e, sense, rhs);
        };
        row("_lo1", bl, al, -al * bl, mip::Sense::ge);
        row("_lo2", bu, au, -au * bu, mip::Sense::ge);
        row("_up1", bl, au, -au * bl, mip::Sense::le);
        row("_up2", bu, al, -al * bu, mip::Sense::le);
    }

  private:
    double require_fixed(mip::VarId v, const std::string& what) const {
        const auto& var = model_.variables()[static_cast<std::size_t>(v)];
        if (var.lower != var.upper)
            throw ConfigError("exact bilinear mode requires " + what + " to be fixed");
        return var.lower;
    }

    /// Bi-variate piecewise McCormick for Y = psi*C with N uniform partitions
    /// per factor: convex-hull (disaggregated) MILP with one binary per cell.
    void add_piecewise_mccormick(int n) {
        auto [pl, pu] = psi_bounds();
        auto [cl, cu] = c_bounds();
        double pw = (pu - pl) / n;
        double cw = (cu - cl) / n;
        mip::LinExpr onehot, psum, csum;
        mip::LinExpr lo1, lo2, up1, up2;
        lo1.add(vars_.y, 1.0);
        lo2.add(vars_.y, 1.0);
        up1.add(vars_.y, 1.0);
        up2.add(vars_.y, 1.0);
        for (int a = 0; a < n; ++a) {
            double al = pl + a * pw, au = pl + (a + 1) * pw;
            for (int b = 0; b < n; ++b) {
                double bl = cl + b * cw, bu = cl + (b + 1) * cw;
                std::string tag = "_n" + std::to_string(a) + "m" + std::to_string(b);
                mip::VarId g = model_.add_variable("pwG" + tag, mip::VarKind::bin, 0, 1);
                mip::VarId ph = model_.add_variable("pwPsi" + tag, mip::VarKind::cont, 0,
                                                    std::max(au, 0.0));
                mip::VarId ch = model_.add_variable("pwC" + tag, mip::VarKind::cont, 0,
                                                    std::max(bu, 0.0));
                onehot.add(g, 1.0);
                psum.add(ph, 1.0);
                csum.add(ch, 1.0);
                // disaggregated variables live in their cell when active
                mip::LinExpr plo;
                plo.add(ph, 1.0).add(g, -al);
                model_.add_constraint("pwPl" + tag, plo, mip::Sense::ge, 0.0);
                mip::LinExpr phi;
                phi.add(ph, 1.0).add(g, -au);
                model_.add_constraint("pwPu" + tag, phi, mip::Sense::le, 0.0);
                mip::LinExpr clo;
                clo.add(ch, 1.0).add(g, -bl);
                model_.add_constraint("pwCl" + tag, clo, mip::Sense::ge, 0.0);
                mip::LinExpr chi;
                chi.add(ch, 1.0).add(g, -bu);
                model_.add_constraint("pwCu" + tag, chi, mip::Sense::le, 0.0);
                // per-cell envelope terms
                lo1.add(ph, -bl).add(ch, -al).add(g, al * bl);
                lo2.add(ph, -bu).add(ch, -au).add(g, au * bu);
                up1.add(ph, -bl).add(ch, -au).add(g, au * bl);
                up2.add(ph, -bu).add(ch, -al).add(g, al * bu);
            }
        }
        model_.add_constraint("pw_onehot", onehot, mip::Sense::eq, 1.0);
        {
            mip::LinExpr e;
            e.add(vars_.psi, 1.0);
            e += psum_negated(psum);
            model_.add_constraint("pw_psi", e, mip::Sense::eq, 0.0);
        }
        {
            mip::LinExpr e;
            e.add(vars_.c_bess, 1.0);
            e += psum_negated(csum);
            model_.add_constraint("pw_c", e, mip::Sense::eq, 0.0);
        }
        model_.add_constraint("pwY_lo1", lo1, mip::Sense::ge, 0.0);
        model_.add_constraint("pwY_lo2", lo2, mip::Sense::ge, 0.0);
        model_.add_constraint("pwY_up1", up1, mip::Sense::le, 0.0);
        model_.add_constraint("pwY_up2", up2, mip::Sense::le, 0.0);
    }

    static mip::LinExpr psum_negated(const mip::LinExpr& e) {
        mip::LinExpr out;
        for (const auto& [v, c] : e.collect()) out.add(v, -c);
        return out;
    }

    void create_variables() {
        using mip::VarKind;
        auto inf = std::numeric_limits<double>::infinity();
        auto [cl, cu] = c_bounds();
        auto [dl, du] = dod_bounds();
        auto [psl, psu] = psi_bounds();

        double pv_lo = 0, pv_hi = opt_.pv_cap_max_kw;
        if (opt_.fix_pv_kw) pv_lo = pv_hi = *opt_.fix_pv_kw;
        vars_.p_pv = model_.add_variable("PPV", VarKind::cont, pv_lo, pv_hi);
        vars_.c_bess = model_.add_variable("CBESS", VarKind::cont, cl, cu);
        double p_lo = 0, p_hi = power_upper_bound();
        if (opt_.fix_bess_power_kw) p_lo = p_hi = *opt_.fix_bess_power_kw;
        vars_.p_rated = model_.add_variable("PRATED", VarKind::cont, p_lo, p_hi);
        vars_.psi = model_.add_variable("PSI", VarKind::cont, psl, psu);
        vars_.y = model_.add_variable("Ycyc", VarKind::cont, 0, std::max(psu * cu, 0.0));
        if (opt_.degradation) {
            vars_.dod = model_.add_variable("DOD", VarKind::cont, dl, du);
            vars_.omega = model_.add_variable("OMEGA", VarKind::cont, 0,
                                              std::max(du * cu, 0.0));
            vars_.zeta = model_.add_variable("ZETA", VarKind::cont, in_.curve->cycles.back(),
                                             in_.curve->cycles.front());
            for (std::size_t s = 0; s < in_.curve->dod_pct.size(); ++s)
                vars_.rho.push_back(
                    model_.add_variable("rho_s" + std::to_string(s + 1), VarKind::cont, 0, 1));
        }

        const int wsteps = in_.tariff->window_minutes / in_.scenarios->dt_minutes;
        const int windows = steps_ / wsteps;
        for (int j = 0; j < kScenarios; ++j) {
            vars_.e_imp[j].resize(steps_);
            vars_.e_exp[j].resize(steps_);
            vars_.e_ac[j].resize(steps_);
            vars_.u_grid[j].resize(steps_);
            vars_.e_ch[j].resize(steps_);
            vars_.e_dch[j].resize(steps_);
            vars_.e_bess[j].resize(steps_);
            vars_.u_bess[j].resize(steps_);
            vars_.p_pv_t[j].resize(steps_);
            vars_.p_avg[j].resize(windows);
            vars_.e_bess_init[j] = model_.add_variable("Ebess_j" + std::to_string(j + 1) + "_init",
                                                       VarKind::cont, 0, cu);
            for (int t = 0; t < steps_; ++t) {
                vars_.e_imp[j][t] =
                    model_.add_variable(detail::jt("Eimp", j, t), VarKind::cont, 0, inf);
                vars_.e_exp[j][t] =
                    model_.add_variable(detail::jt("Eexp", j, t), VarKind::cont, 0, inf);
                vars_.e_ac[j][t] =
                    model_.add_variable(detail::jt("Eac", j, t), VarKind::cont, -inf, inf);
                vars_.u_grid[j][t] =
                    model_.add_variable(detail::jt("u1", j, t), VarKind::bin, 0, 1);
                vars_.e_ch[j][t] =
                    model_.add_variable(detail::jt("Ech", j, t), VarKind::cont, 0, inf);
                vars_.e_dch[j][t] =
                    model_.add_variable(detail::jt("Edch", j, t), VarKind::cont, 0, inf);
                vars_.e_bess[j][t] =
                    model_.add_variable(detail::jt("Ebess", j, t), VarKind::cont, 0, cu);
                vars_.u_bess[j][t] =
                    model_.add_variable(detail::jt("u2", j, t), VarKind::bin, 0, 1);
                vars_.p_pv_t[j][t] =
                    model_.add_variable(detail::jt("Ppv", j, t), VarKind::cont, 0, inf);
            }
            for (int k = 0; k < windows; ++k)
                vars_.p_avg[j][k] =
                    model_.add_variable(detail::jt("Pavg", j, k), VarKind::cont, 0, inf);
            vars_.p_daily[j] = model_.add_variable("Pdaily_j" + std::to_string(j + 1),
                                                   VarKind::cont, 0, inf);
        }
        for (int s = 0; s < 4; ++s)
            vars_.p_month[s] =
                model_.add_variable("Pmo_s" + std::to_string(s + 1), VarKind::cont, 0, inf);
        vars_.p_annual = model_.add_variable("Pan", VarKind::cont, 0, inf);
    }

    Inputs in_;
    SizingOptions opt_;
    int steps_ = 0;
    double dt_h_ = 0;
    double demand_peak_ = 0;
    mip::Model model_;
    VarMap vars_;
    mip::LinExpr extra_objective_;
};

// ---------------------------------------------------------------------------
// Decision extraction
// ---------------------------------------------------------------------------

struct CostBreakdown {
    double mdc = 0;
    double adc = 0;
    double icom_bess = 0;
    double icom_pv = 0;
    double opc = 0;

    double total() const { return mdc + adc + icom_bess + icom_pv + opc; }
};

struct ScenarioTrace {
    int scenario_id = 0;
    std::vector<double> e_imp, e_exp, e_ch, e_dch, e_bess, soc_pct, p_pv, window_avg_kw;
};

struct SizingDecision {
    double c_bess_kwh = 0;
    double p_bess_kw = 0;
    double dod_pct = 0;
    double annual_cycles = 0;         // model psi variable
    double annual_cycles_actual = 0;  // Y / C, 0 when no BESS
    double p_pv_kw = 0;
    std::array<double, 4> p_month_kw{};
    double p_annual_kw = 0;
    std::array<double, 4> p_month_recomputed_kw{};
    double p_annual_recomputed_kw = 0;
    CostBreakdown cost;
    double objective = 0;
    std::vector<ScenarioTrace> traces;
};

/// Reads the solved values back into planning terms. Grid-import maxima are
/// recomputed from the import series independently of the model variables,
/// and the cost breakdown re-derives the objective.
inline SizingDecision extract_decision(const SizingModel& sm, const mip::Solution& sol) {
    if (sol.status != mip::SolveStatus::optimal)
        throw SolverError("cannot extract a decision from a non-optimal solution");
    const VarMap& v = sm.vars();
    const Inputs& in = sm.inputs();
    const int steps = sm.steps();
    const double dt_h = sm.dt_hours();

    SizingDecision d;
    d.objective = sol.objective;
    d.c_bess_kwh = sol.value(v.c_bess);
    d.p_bess_kw = sol.value(v.p_rated);
    d.p_pv_kw = sol.value(v.p_pv);
    d.dod_pct = sm.options().degradation && v.dod >= 0 ? sol.value(v.dod) * 100.0 : 100.0;
    d.annual_cycles = sol.value(v.psi);
    d.annual_cycles_actual = d.c_bess_kwh > 1e-9 ? sol.value(v.y) / d.c_bess_kwh : 0.0;
    for (int s = 0; s < 4; ++s) d.p_month_kw[s] = sol.value(v.p_month[s]);
    d.p_annual_kw = sol.value(v.p_annual);

    const int wsteps = in.tariff->window_minutes / in.scenarios->dt_minutes;
    const int windows = steps / wsteps;
    std::array<double, kScenarios> daily{};
    for (int j = 0; j < kScenarios; ++j) {
        ScenarioTrace tr;
        tr.scenario_id = j + 1;
        for (int t = 0; t < steps; ++t) {
            tr.e_imp.push_back(sol.value(v.e_imp[j][t]));
            tr.e_exp.push_back(sol.value(v.e_exp[j][t]));
            tr.e_ch.push_back(sol.value(v.e_ch[j][t]));
            tr.e_dch.push_back(sol.value(v.e_dch[j][t]));
            tr.e_bess.push_back(sol.value(v.e_bess[j][t]));
            tr.p_pv.push_back(sol.value(v.p_pv_t[j][t]));
            tr.soc_pct.push_back(d.c_bess_kwh > 1e-9
                                     ? sol.value(v.e_bess[j][t]) / d.c_bess_kwh * 100.0
                                     : 0.0);
        }
        for (int k = 0; k < windows; ++k) {
            double sum = 0;
            for (int t = k * wsteps; t < (k + 1) * wsteps; ++t) sum += tr.e_imp[t];
            double avg = sum / (wsteps * dt_h);
            tr.window_avg_kw.push_back(avg);
            daily[j] = std::max(daily[j], avg);
        }
        d.traces.push_back(std::move(tr));
    }
    for (int s = 0; s < 4; ++s) {
        d.p_month_recomputed_kw[s] = std::max(daily[s], daily[s + 4]);
        d.p_annual_recomputed_kw =
            std::max(d.p_annual_recomputed_kw, d.p_month_recomputed_kw[s]);
    }

    const double cf = scen::annualized_cost_factor(in.costs->interest, in.costs->lifetime_years);
    for (int s = 0; s < 4; ++s)
        d.cost.mdc += in.tariff->month_scale * in.tariff->lambda_mdc * d.p_month_kw[s];
    d.cost.adc = in.tariff->lambda_adc * d.p_annual_kw;
    d.cost.icom_bess = d.c_bess_kwh * (in.costs->bess_energy_capex + in.costs->bess_install) * cf +
                       d.p_bess_kw * (in.costs->bess_power_capex * cf + in.costs->bess_om);
    d.cost.icom_pv = d.p_pv_kw * (in.costs->pv_capex * cf + in.costs->pv_om);
    const double w = in.scenarios->annual_day_weight();
    for (int j = 0; j < kScenarios; ++j) {
        const auto& sc = in.scenarios->scenarios[static_cast<std::size_t>(j)];
        for (int t = 0; t < steps; ++t)
            d.cost.opc += w * sc.weekly_weight * sc.price[static_cast<std::size_t>(t)] *
                          sol.value(v.e_ac[j][t]);
    }
    return d;
}

/// Eq.-32 style normalized cumulative discharge, used by tests as an
/// independent route to the model's Y variable.
inline double annual_discharge_energy(const scen::ScenarioSet& set, const scen::BessTech& tech,
                                      const std::array<std::vector<double>, kScenarios>& e_dch) {
    double acc = 0;
    for (int j = 0; j < kScenarios; ++j) {
        double jw = set.scenarios[static_cast<std::size_t>(j)].weekly_weight;
        for (double e : e_dch[static_cast<std::size_t>(j)]) acc += jw * e / tech.eta_dch;
    }
    return set.annual_day_weight() * acc;
}

}  // namespace xfcs::sizing

#endif
