#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ldesim/planner.hpp"

#include <cmath>

using namespace ldesim;

namespace {

// One scenario, one interval, one generator. Hand-solvable:
//   lambda* = C_V + (capex + fom) / w
//   d_flex* = D_flex (1 - lambda*/B),  c* = D_fix + d_flex*
struct SingleInterval {
    ScenarioSet scenarios;
    TechnologyCatalog catalog;
    MarketDesign design;
};

SingleInterval make_single_interval() {
    SingleInterval si;
    Scenario sc;
    sc.id = "base";
    sc.probability_weight = 1.0;
    sc.weight_hours = {1.0};
    sc.fixed_demand = {10.0};
    sc.flexible_demand = {1.0};
    si.scenarios.scenarios.push_back(sc);
    si.scenarios.horizon_hours = 1.0;

    GeneratorSpec g;
    g.name = "gen";
    g.variable_cost = 10.0;
    g.annualized_capex = 100.0;
    g.fixed_om = 0.0;
    si.catalog.generators.push_back(g);
    si.catalog.reference_generator = "gen";

    si.design.run_mode = RunMode::EomVoll;
    si.design.voll = 1000.0;
    si.design.price_cap = 1000.0;
    return si;
}

ScenarioSet two_interval_storage_scenarios() {
    ScenarioSet set;
    Scenario sc;
    sc.id = "s";
    sc.probability_weight = 1.0;
    sc.weight_hours = {1.0, 1.0};
    sc.fixed_demand = {2.0, 10.0};
    sc.flexible_demand = {0.5, 0.5};
    set.scenarios.push_back(sc);
    set.horizon_hours = 2.0;
    return set;
}

} // namespace

TEST_CASE("single-interval instance matches the analytic KKT solution") {
    auto si = make_single_interval();
    REQUIRE(validate_inputs(si.scenarios, si.catalog, si.design).pass());
    auto prog = assemble(si.scenarios, si.catalog, si.design);

    // 1 balance + 1 capacity + 1 soc-free... only gen rows here: capacity, balance, emission
    int balance = 0, capacity = 0, emission = 0;
    for (const auto& lbl : prog.rows) {
        if (lbl.kind == RowKind::EnergyBalance) ++balance;
        if (lbl.kind == RowKind::GenCapacity) ++capacity;
        if (lbl.kind == RowKind::EmissionCap) ++emission;
    }
    CHECK(balance == 1);
    CHECK(capacity == 1);
    CHECK(emission == 1);

    auto sol = solve_equilibrium(prog);
    REQUIRE(sol.status == qp::SolveStatus::Optimal);

    const double lambda_star = 10.0 + 100.0 / 1.0;
    const double dflex_star = 1.0 * (1.0 - lambda_star / 1000.0);
    const double c_star = 10.0 + dflex_star;
    CHECK(sol.dispatch[0].price[0] == doctest::Approx(lambda_star).epsilon(1e-8));
    CHECK(std::abs(sol.gen_capacity[0] - c_star) < 1e-6);
    CHECK(sol.dispatch[0].served_fixed[0] == doctest::Approx(10.0));
    CHECK(sol.dispatch[0].served_flexible[0] == doctest::Approx(dflex_star));
    CHECK(sol.lambda_ct == doctest::Approx(0.0).scale(1.0));

    // zero profit at the equilibrium
    const double profit = agent_profit(sol, si.scenarios, si.catalog, "gen");
    CHECK(std::abs(profit) <= 1e-4 * 100.0);
}

TEST_CASE("zero demand everywhere gives an empty market") {
    auto si = make_single_interval();
    si.scenarios.scenarios[0].fixed_demand = {0.0};
    si.scenarios.scenarios[0].flexible_demand = {0.0};
    auto sol = solve_equilibrium(assemble(si.scenarios, si.catalog, si.design));
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    CHECK(std::abs(sol.gen_capacity[0]) < 1e-7);
    CHECK(std::abs(sol.objective) < 1e-7);
}

TEST_CASE("fixed mix below fixed demand pegs the price at the cap") {
    auto si = make_single_interval();
    si.design.run_mode = RunMode::DispatchFixedMix;
    si.design.price_cap = 300.0;  // capped mode
    si.design.fixed_mix_demand = DemandMode::Capped;
    FixedCapacities f;
    f.generator_mw = {5.0};  // below the 10 MW fixed demand
    si.design.fixed_capacities = f;
    auto sol = solve_equilibrium(assemble(si.scenarios, si.catalog, si.design));
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    CHECK(sol.dispatch[0].price[0] == doctest::Approx(300.0).epsilon(1e-6));
    CHECK(sol.gen_capacity[0] == doctest::Approx(5.0));
    // all capacity runs, demand partially unserved
    CHECK(sol.dispatch[0].generation[0][0] == doctest::Approx(5.0));
}

TEST_CASE("storage arbitrage in a two-interval system") {
    auto set = two_interval_storage_scenarios();
    TechnologyCatalog cat;
    GeneratorSpec g;
    g.name = "gen";
    g.variable_cost = 5.0;
    g.annualized_capex = 10.0;
    cat.generators.push_back(g);
    StorageSpec st;
    st.name = "sto";
    st.power_capex = 1.0;
    st.energy_capex = 0.5;
    st.charge_efficiency = 0.9;
    st.discharge_efficiency = 0.9;
    st.variable_cost = 0.5;
    cat.storages.push_back(st);
    cat.reference_generator = "gen";

    MarketDesign design;
    design.run_mode = RunMode::EomVoll;
    design.voll = 500.0;
    design.price_cap = 500.0;

    auto sol = solve_equilibrium(assemble(set, cat, design));
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    // SOC telescoping: e_T - e_init = sum of w (eta ch - dis / eta)
    const auto& d = sol.dispatch[0];
    double acc = sol.storage_initial[0];
    for (int t = 0; t < 2; ++t) {
        acc += 1.0 * (0.9 * d.charge[0][t] - d.discharge[0][t] / 0.9);
        CHECK(d.soc[0][t] == doctest::Approx(acc).epsilon(1e-6).scale(1.0));
        CHECK(d.soc[0][t] <= sol.storage_energy[0] + 1e-7);
    }
    CHECK(d.soc[0][1] >= sol.storage_initial[0] - 1e-7);
    CHECK(worst_balance_residual(sol) < 1e-6 * 10.0);
    // zero profit for both technologies if built
    for (const char* name : {"gen", "sto"}) {
        const double cap = std::string(name) == "gen" ? sol.gen_capacity[0] : sol.storage_power[0];
        if (cap > 1e-4 * 10.0) {
            const double profit = agent_profit(sol, set, cat, name);
            CHECK(std::abs(profit) < 1e-3 * std::max(1.0, cap));
        }
    }
}

TEST_CASE("scaling demands by k scales the objective and keeps prices") {
    auto si = make_single_interval();
    auto sol1 = solve_equilibrium(assemble(si.scenarios, si.catalog, si.design));
    auto scaled = si;
    scaled.scenarios.scenarios[0].fixed_demand[0] *= 2.0;
    scaled.scenarios.scenarios[0].flexible_demand[0] *= 2.0;
    auto sol2 = solve_equilibrium(assemble(scaled.scenarios, scaled.catalog, scaled.design));
    REQUIRE(sol1.status == qp::SolveStatus::Optimal);
    REQUIRE(sol2.status == qp::SolveStatus::Optimal);
    CHECK(sol2.objective == doctest::Approx(2.0 * sol1.objective).epsilon(1e-7));
    CHECK(sol2.dispatch[0].price[0] == doctest::Approx(sol1.dispatch[0].price[0]).epsilon(1e-7));
    CHECK(sol2.gen_capacity[0] == doctest::Approx(2.0 * sol1.gen_capacity[0]).epsilon(1e-6));
}

TEST_CASE("program row counts match construction") {
    auto set = two_interval_storage_scenarios();
    TechnologyCatalog cat;
    GeneratorSpec g;
    g.name = "gen";
    cat.generators.push_back(g);
    MarketDesign design;
    design.run_mode = RunMode::EomVoll;
    auto prog = assemble(set, cat, design);
    // 2 balance, 2 capacity, 1 emission
    CHECK(prog.qp.num_rows() == 5);

    StorageSpec st;
    st.name = "sto";
    CreditCurve cc;
    cc.segments = {{0.1, 0.2, 0.0, 2.0}, {0.3, 0.1, 2.0, 4.0}, {0.5, 0.05, 4.0, 6.0}, {0.8, 0.0, 6.0, 8.0}};
    st.credit_curve = cc;
    cat.storages.push_back(st);
    design.run_mode = RunMode::EPlusCm;
    CapacityDemandCurve cdc;
    cdc.fixed_width = 9.0;
    cdc.fixed_price = 90.0;
    cdc.flex = {{1.0, 90.0, 60.0}, {1.0, 60.0, 0.0}};
    design.capacity_demand_curve = cdc;
    auto prog2 = assemble(set, cat, design);
    // adds per interval: ch, dis, soc rec, soc cap (4*2) + end-of-horizon (1)
    // + CM: 1 gen qual + 4 storage qual (last beta = 0, envelope 0.8 <= 1: no cap row) + clearing
    int sto_qual = 0;
    for (const auto& lbl : prog2.rows)
        if (lbl.kind == RowKind::StorageCmQualification) ++sto_qual;
    CHECK(sto_qual == 4);
    CHECK(prog2.qp.num_rows() == 5 + 8 + 1 + 1 + 4 + 1);
}

TEST_CASE("assemble rejects CM mode without a credit curve") {
    auto set = two_interval_storage_scenarios();
    TechnologyCatalog cat;
    GeneratorSpec g;
    g.name = "gen";
    cat.generators.push_back(g);
    StorageSpec st;
    st.name = "sto";  // no credit curve
    cat.storages.push_back(st);
    MarketDesign design;
    design.run_mode = RunMode::EPlusCm;
    CapacityDemandCurve cdc;
    cdc.fixed_width = 9.0;
    cdc.fixed_price = 90.0;
    cdc.flex = {{1.0, 90.0, 0.0}};
    design.capacity_demand_curve = cdc;
    CHECK_THROWS_AS((void)assemble(set, cat, design), std::invalid_argument);
}

TEST_CASE("infinite emission cap keeps the row but the price is zero") {
    auto si = make_single_interval();
    si.catalog.generators[0].emission_factor = 0.4;
    si.design.emission_cap = qp::ConvexQP::infinity();
    auto prog = assemble(si.scenarios, si.catalog, si.design);
    bool has_emission_row = false;
    for (const auto& lbl : prog.rows)
        if (lbl.kind == RowKind::EmissionCap) has_emission_row = true;
    CHECK(has_emission_row);
    auto sol = solve_equilibrium(prog);
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    CHECK(sol.lambda_ct == 0.0);

    // now a binding cap: the dual prices carbon
    si.design.emission_cap = 2.0;  // tons; unconstrained emissions would be ~10.89*0.4
    auto sol2 = solve_equilibrium(assemble(si.scenarios, si.catalog, si.design));
    REQUIRE(sol2.status == qp::SolveStatus::Optimal);
    CHECK(sol2.expected_emissions <= 2.0 + 1e-6);
    CHECK(sol2.lambda_ct > 0.0);
    // complementary slackness
    CHECK(sol2.lambda_ct * (2.0 - sol2.expected_emissions) < 1e-5);
}
