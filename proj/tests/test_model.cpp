#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xfcs/model.hpp"
#include "xfcs/solve.hpp"

using namespace xfcs;
using namespace xfcs::mip;
using Catch::Approx;

TEST_CASE("variable registration rules") {
    Model m;
    SECTION("binary bounds are forced into [0,1]") {
        VarId u = m.add_variable("u", VarKind::bin, -5, 5);
        REQUIRE(m.variables()[static_cast<std::size_t>(u)].lower == 0);
        REQUIRE(m.variables()[static_cast<std::size_t>(u)].upper == 1);
    }
    SECTION("equal bounds behave as a fixed parameter") {
        VarId c = m.add_variable("c", VarKind::cont, 4.5, 4.5);
        LinExpr obj;
        obj.add(c, 1.0);
        m.set_objective(obj);
        auto sol = solve(m, test::backend());
        REQUIRE(sol.status == SolveStatus::optimal);
        REQUIRE(sol.value(c) == Approx(4.5));
    }
    SECTION("duplicate names and inverted bounds are rejected") {
        m.add_variable("x", VarKind::cont, 0, 1);
        REQUIRE_THROWS_AS(m.add_variable("x", VarKind::cont, 0, 1), ConfigError);
        REQUIRE_THROWS_AS(m.add_variable("y", VarKind::cont, 2, 1), ConfigError);
    }
    SECTION("distinct handles") {
        std::set<VarId> ids;
        for (int i = 0; i < 10; ++i)
            ids.insert(m.add_variable("v" + std::to_string(i), VarKind::cont, 0, 1));
        REQUIRE(ids.size() == 10);
    }
}

TEST_CASE("lp export is deterministic and structured") {
    auto build = [] {
        Model m;
        VarId x = m.add_variable("x", VarKind::cont, 0, 10);
        VarId u = m.add_variable("u", VarKind::bin, 0, 1);
        LinExpr c;
        c.add(x, 1.0).add(u, -3.5);
        m.add_constraint("c1", c, Sense::ge, 1.0);
        LinExpr obj;
        obj.add(x, 2.0);
        m.set_objective(obj);
        return m;
    };
    SECTION("identical models export identical bytes") {
        REQUIRE(build().export_lp() == build().export_lp());
    }
    SECTION("constraint-free model still exports header and bounds") {
        Model m;
        m.add_variable("x", VarKind::cont, 0, 2);
        m.set_objective(LinExpr());
        auto lp = m.export_lp();
        REQUIRE(lp.find("Minimize") != std::string::npos);
        REQUIRE(lp.find("Bounds") != std::string::npos);
        REQUIRE(lp.find("End") != std::string::npos);
    }
    SECTION("sos2 sets appear as an S2 section") {
        Model m;
        std::vector<VarId> rho;
        for (int i = 0; i < 3; ++i)
            rho.push_back(m.add_variable("r" + std::to_string(i), VarKind::cont, 0, 1));
        m.add_sos2("s", rho);
        m.set_objective(LinExpr());
        auto lp = m.export_lp();
        REQUIRE(lp.find("SOS") != std::string::npos);
        REQUIRE(lp.find("S2::") != std::string::npos);
    }
    SECTION("sos2 needs two members") {
        Model m;
        VarId r = m.add_variable("r", VarKind::cont, 0, 1);
        REQUIRE_THROWS_AS(m.add_sos2("s", {r}), ConfigError);
    }
}

TEST_CASE("external backend solves and reports status") {
    SECTION("min x subject to x >= 3") {
        Model m;
        VarId x = m.add_variable("x", VarKind::cont, 0,
                                 std::numeric_limits<double>::infinity());
        LinExpr c;
        c.add(x, 1.0);
        m.add_constraint("lo", c, Sense::ge, 3.0);
        LinExpr obj;
        obj.add(x, 1.0);
        m.set_objective(obj);
        auto sol = solve(m, test::backend());
        REQUIRE(sol.status == SolveStatus::optimal);
        REQUIRE(sol.objective == Approx(3.0));
        REQUIRE(sol.value(x) == Approx(3.0));
    }
    SECTION("contradictory constraints are infeasible") {
        Model m;
        VarId x = m.add_variable("x", VarKind::cont, 0, 10);
        LinExpr lo, hi;
        lo.add(x, 1.0);
        hi.add(x, 1.0);
        m.add_constraint("lo", lo, Sense::ge, 3.0);
        m.add_constraint("hi", hi, Sense::le, 2.0);
        LinExpr obj;
        obj.add(x, 1.0);
        m.set_objective(obj);
        auto sol = solve(m, test::backend());
        REQUIRE(sol.status == SolveStatus::infeasible);
    }
    SECTION("knapsack optimum matches exhaustive enumeration") {
        // maximize 9a + 7b + 6c, weight 6a+5b+4c <= 10  ->  minimize negated
        double value[3] = {9, 7, 6};
        double weight[3] = {6, 5, 4};
        Model m;
        std::vector<VarId> pick;
        LinExpr w, obj;
        for (int i = 0; i < 3; ++i) {
            pick.push_back(m.add_variable("p" + std::to_string(i), VarKind::bin, 0, 1));
            w.add(pick.back(), weight[i]);
            obj.add(pick.back(), -value[i]);
        }
        m.add_constraint("cap", w, Sense::le, 10.0);
        m.set_objective(obj);
        auto sol = solve(m, test::backend());
        REQUIRE(sol.status == SolveStatus::optimal);

        double best = 0;
        for (int mask = 0; mask < 8; ++mask) {
            double v = 0, wt = 0;
            for (int i = 0; i < 3; ++i)
                if (mask & (1 << i)) {
                    v += value[i];
                    wt += weight[i];
                }
            if (wt <= 10.0) best = std::max(best, v);
        }
        REQUIRE(-sol.objective == Approx(best));
    }
    SECTION("missing executable raises a solver error") {
        Model m;
        VarId x = m.add_variable("x", VarKind::cont, 0, 1);
        LinExpr obj;
        obj.add(x, 1.0);
        m.set_objective(obj);
        BackendConfig bad;
        bad.command = {"/nonexistent/solver", "{lp}", "{sol}"};
        REQUIRE_THROWS_AS(solve(m, bad), SolverError);
    }
}

TEST_CASE("sos2 reformulation enforces adjacency") {
    // minimize r2 with sum(r)=1, r1<=0.6, r3<=0.6: without SOS2 the optimum
    // splits across the non-adjacent ends at r2=0; with SOS2 it pays 0.4.
    auto build = [](bool with_sos) {
        Model m;
        std::vector<VarId> r;
        LinExpr sum;
        for (int i = 0; i < 3; ++i) {
            r.push_back(m.add_variable("r" + std::to_string(i + 1), VarKind::cont, 0, 1));
            sum.add(r.back(), 1.0);
        }
        m.add_constraint("one", sum, Sense::eq, 1.0);
        LinExpr c1, c3;
        c1.add(r[0], 1.0);
        c3.add(r[2], 1.0);
        m.add_constraint("cap1", c1, Sense::le, 0.6);
        m.add_constraint("cap3", c3, Sense::le, 0.6);
        if (with_sos) m.add_sos2("s", r);
        LinExpr obj;
        obj.add(r[1], 1.0);
        m.set_objective(obj);
        return m;
    };
    auto relaxed = solve(build(false), test::backend());
    REQUIRE(relaxed.objective == Approx(0.0).margin(1e-9));
    auto constrained = solve(build(true), test::backend());
    REQUIRE(constrained.status == SolveStatus::optimal);
    REQUIRE(constrained.objective == Approx(0.4).margin(1e-7));
}

TEST_CASE("in-process backends plug into the same interface") {
    register_backend("stub", [](const Model& m, const BackendConfig&) {
        Solution s;
        s.status = SolveStatus::optimal;
        s.values.assign(m.variables().size(), 0.0);
        for (std::size_t i = 0; i < m.variables().size(); ++i)
            s.values[i] = m.variables()[i].lower;
        s.objective = m.objective_value(s.values);
        return s;
    });
    Model m;
    VarId x = m.add_variable("x", VarKind::cont, 2, 5);
    LinExpr obj;
    obj.add(x, 3.0);
    m.set_objective(obj);
    BackendConfig cfg;
    cfg.command = {"inprocess:stub"};
    auto sol = solve(m, cfg);
    REQUIRE(sol.objective == Approx(6.0));
}

TEST_CASE("solution checker flags violations") {
    Model m;
    VarId x = m.add_variable("x", VarKind::cont, 0, 1);
    VarId u = m.add_variable("u", VarKind::bin, 0, 1);
    LinExpr c;
    c.add(x, 1.0).add(u, 1.0);
    m.add_constraint("c", c, Sense::le, 1.0);
    REQUIRE(m.check_solution({0.5, 0.0}).empty());
    REQUIRE_FALSE(m.check_solution({0.9, 0.5}).empty());   // fractional binary
    REQUIRE_FALSE(m.check_solution({0.9, 1.0}).empty());   // constraint breach
    REQUIRE_FALSE(m.check_solution({-0.1, 0.0}).empty());  // bound breach
}
