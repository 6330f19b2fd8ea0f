#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xfcs/robust.hpp"

using namespace xfcs;
using namespace xfcs::robust;
using Catch::Approx;

namespace {

/// Miniature with demand only in scenario 1 and no PV/BESS, so the grid
/// exposure is pinned by the balance equation.
test::Fixture miniature() {
    auto demand = [](int j, int t) {
        if (j != 0) return 0.0;
        const double vals[4] = {10, 0, 20, 5};
        return vals[t];
    };
    auto price = [](int j, int t) {
        if (j != 0) return 0.01;
        const double vals[4] = {0.05, 0.08, 0.02, 0.10};
        return vals[t];
    };
    return test::fixture(360, demand, price);
}

double solve_objective(const test::Fixture& f, const RobustSpecs& specs,
                       const sizing::SizingOptions& opt) {
    auto built = build_robust_model(f.inputs(), opt, specs);
    auto sol = mip::solve(built.model.model(), test::backend());
    REQUIRE(sol.status == mip::SolveStatus::optimal);
    return sol.objective;
}

/// Exhaustive worst case of the price protection term: pick at most
/// budget_steps time instants, each contributing its weighted half-width
/// times |E_AC| summed over scenarios.
double enumerate_worst(const test::Fixture& f, double half_width, int budget_steps,
                       const std::array<std::vector<double>, 8>& e_ac) {
    int steps = f.set.steps();
    std::vector<double> gain(steps, 0.0);
    for (int t = 0; t < steps; ++t)
        for (int j = 0; j < 8; ++j) {
            const auto& sc = f.set.scenarios[static_cast<std::size_t>(j)];
            gain[t] += f.set.annual_day_weight() * sc.weekly_weight * half_width *
                       sc.price[static_cast<std::size_t>(t)] *
                       std::abs(e_ac[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)]);
        }
    double best = 0;
    for (int mask = 0; mask < (1 << steps); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) > budget_steps) continue;
        double v = 0;
        for (int t = 0; t < steps; ++t)
            if (mask & (1 << t)) v += gain[static_cast<std::size_t>(t)];
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("uncertainty bounds scale the forecast symmetrically") {
    UncertaintySpec spec{0.20, 720};
    auto b = build_bounds({0.05, 0.0, 1.0}, spec);
    REQUIRE(b.lower[0] == Approx(0.04));
    REQUIRE(b.upper[0] == Approx(0.06));
    REQUIRE(b.lower[1] == Approx(0.0));
    REQUIRE(b.upper[2] == Approx(1.2));

    UncertaintySpec zero{0.0, 0};
    auto flat = build_bounds({0.05}, zero);
    REQUIRE(flat.lower[0] == flat.upper[0]);

    REQUIRE_THROWS_AS(build_bounds({-1.0}, spec), ConfigError);
    UncertaintySpec bad{1.5, 0};
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("robust price term equals the exhaustive worst case") {
    auto f = miniature();
    auto opt = test::no_pv_options();

    // deterministic reference with the exposure pinned by the balance
    auto det = sizing::SizingModel::build(f.inputs(), opt);
    auto det_sol = mip::solve(det.model(), test::backend());
    REQUIRE(det_sol.status == mip::SolveStatus::optimal);
    std::array<std::vector<double>, 8> e_ac;
    for (int j = 0; j < 8; ++j)
        for (int t = 0; t < 4; ++t)
            e_ac[static_cast<std::size_t>(j)].push_back(
                det_sol.value(det.vars().e_ac[j][t]));

    for (int budget = 0; budget <= 4; ++budget) {
        RobustSpecs specs;
        specs.price = UncertaintySpec{0.20, budget * 360.0};
        double robust_obj = solve_objective(f, specs, opt);
        double expected = det_sol.objective + enumerate_worst(f, 0.20, budget, e_ac);
        INFO("budget steps " << budget);
        REQUIRE(robust_obj == Approx(expected).margin(1e-6));
    }
}

TEST_CASE("zero budgets reduce every robust variant to the deterministic model") {
    auto f = miniature();
    auto opt = test::no_pv_options();
    auto det = sizing::SizingModel::build(f.inputs(), opt);
    auto det_sol = mip::solve(det.model(), test::backend());

    RobustSpecs specs;
    specs.price = UncertaintySpec{0.20, 0};
    specs.demand = UncertaintySpec{0.10, 0};
    specs.pv = UncertaintySpec{0.20, 0};
    double obj = solve_objective(f, specs, opt);
    REQUIRE(std::abs(obj - det_sol.objective) /
                std::max(1.0, std::abs(det_sol.objective)) <=
            1e-3);
}

TEST_CASE("objective grows with every uncertainty budget") {
    auto f = miniature();
    auto opt = test::no_pv_options();
    auto grid = {0.0, 20.0, 40.0, 60.0, 80.0, 100.0};

    auto run_grid = [&](auto make_specs) {
        double prev = -1e18;
        for (double pct : grid) {
            RobustSpecs specs = make_specs(pct / 100.0 * kMinutesPerDay);
            double obj = solve_objective(f, specs, opt);
            REQUIRE(obj >= prev - 1e-6);
            prev = obj;
        }
    };
    SECTION("price") {
        run_grid([](double mins) {
            RobustSpecs s;
            s.price = UncertaintySpec{0.20, mins};
            return s;
        });
    }
    SECTION("demand") {
        run_grid([](double mins) {
            RobustSpecs s;
            s.demand = UncertaintySpec{0.10, mins};
            return s;
        });
    }
    SECTION("jointly") {
        run_grid([](double mins) {
            RobustSpecs s;
            s.price = UncertaintySpec{0.20, mins};
            s.demand = UncertaintySpec{0.10, mins};
            s.pv = UncertaintySpec{0.20, mins};
            return s;
        });
    }
}

TEST_CASE("dual variables stay nonnegative and demand inflation prices in") {
    auto f = miniature();
    auto opt = test::no_pv_options();
    RobustSpecs specs;
    specs.price = UncertaintySpec{0.20, 720};
    specs.demand = UncertaintySpec{0.10, 720};
    specs.pv = UncertaintySpec{0.20, 720};
    auto built = build_robust_model(f.inputs(), opt, specs);
    auto sol = mip::solve(built.model.model(), test::backend());
    REQUIRE(sol.status == mip::SolveStatus::optimal);
    auto nonneg = [&](mip::VarId v) {
        if (v >= 0) REQUIRE(sol.value(v) >= -1e-9);
    };
    nonneg(built.vars.alpha_price);
    nonneg(built.vars.alpha_demand);
    nonneg(built.vars.alpha_pv);
    for (const auto& b : built.vars.beta_price) nonneg(b);
    for (int j = 0; j < 8; ++j) {
        for (auto v : built.vars.beta_demand[static_cast<std::size_t>(j)]) nonneg(v);
        for (auto v : built.vars.sig_demand[static_cast<std::size_t>(j)]) {
            REQUIRE(sol.value(v) >= 1.0 - 1e-9);  // sigma covers the unit exposure
        }
    }
    // full demand budget inflates the import of scenario 1 by the half-width
    const auto& v = built.model.vars();
    double demand0 = f.set.scenarios[0].demand[0];
    double imported = sol.value(v.e_imp[0][0]);
    REQUIRE(imported >= demand0 - 1e-6);  // never below nominal
}

TEST_CASE("single-sided exposure flag relaxes the export protection") {
    // with exports the literal one-sided form can only underestimate
    auto f = miniature();
    auto opt = test::no_pv_options();
    RobustSpecs two_sided, one_sided;
    two_sided.price = UncertaintySpec{0.20, 1440};
    one_sided.price = UncertaintySpec{0.20, 1440};
    one_sided.single_sided_exposure = true;
    double both = solve_objective(f, two_sided, opt);
    double single = solve_objective(f, one_sided, opt);
    REQUIRE(single <= both + 1e-9);
}
