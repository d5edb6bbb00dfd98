#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ldesim/analysis.hpp"

#include <cmath>

using namespace ldesim;

namespace {

// Hand-filled solution skeleton for the attribution tests: one scenario,
// one storage; dispatch arrays supplied by each case.
struct Rig {
    TechnologyCatalog catalog;
    EquilibriumSolution sol;

    Rig(double eta_ch, double eta_dis, int intervals) {
        StorageSpec st;
        st.name = "es";
        st.charge_efficiency = eta_ch;
        st.discharge_efficiency = eta_dis;
        catalog.storages.push_back(st);
        sol.status = qp::SolveStatus::Optimal;
        sol.storage_power = {100.0};
        sol.storage_energy = {1000.0};
        sol.storage_initial = {0.0};
        sol.gen_capacity = {};
        sol.dispatch.resize(1);
        auto& d = sol.dispatch[0];
        d.price.assign(intervals, 0.0);
        d.charge.assign(1, std::vector<double>(intervals, 0.0));
        d.discharge.assign(1, std::vector<double>(intervals, 0.0));
        d.soc.assign(1, std::vector<double>(intervals, 0.0));
        d.generation.clear();
        d.served_fixed.assign(intervals, 0.0);
        d.served_flexible.assign(intervals, 0.0);
        sol.interval_hours = {std::vector<double>(intervals, 1.0)};
    }
};

} // namespace

TEST_CASE("book value: charging into empty storage prices at lambda/eta_ch") {
    Rig rig(0.5, 1.0, 2);
    auto& d = rig.sol.dispatch[0];
    d.price = {20.0, 30.0};
    d.charge[0] = {10.0, 0.0};
    d.soc[0] = {5.0, 5.0};  // 10 MW * 1 h * 0.5
    auto book = book_value(rig.sol, rig.catalog, 0, 0);
    CHECK(book.converged);
    CHECK(book.phi[0] == doctest::Approx(40.0));  // 200 $ / 5 MWh
    // pure idle interval: carried forward
    CHECK(book.phi[1] == doctest::Approx(40.0));
}

TEST_CASE("book value: pure discharge leaves the unit value unchanged") {
    Rig rig(1.0, 1.0, 2);
    auto& d = rig.sol.dispatch[0];
    rig.sol.storage_initial = {10.0};
    d.price = {50.0, 80.0};
    d.charge[0] = {4.0, 0.0};
    d.discharge[0] = {0.0, 6.0};
    d.soc[0] = {14.0, 8.0};
    auto book = book_value(rig.sol, rig.catalog, 0, 0);
    REQUIRE(book.converged);
    // discharge removes energy at book value: phi stays
    CHECK(book.phi[1] == doctest::Approx(book.phi[0]).epsilon(1e-9));
}

TEST_CASE("book value: cyclic single-price charging fixes phi at p/eta_ch") {
    Rig rig(0.5, 1.0, 4);
    auto& d = rig.sol.dispatch[0];
    d.price = {10.0, 100.0, 120.0, 5.0};
    d.charge[0] = {4.0, 0.0, 0.0, 0.0};
    d.discharge[0] = {0.0, 1.0, 1.0, 0.0};
    d.soc[0] = {2.0, 1.0, 0.0, 0.0};
    auto book = book_value(rig.sol, rig.catalog, 0, 0);
    REQUIRE(book.converged);
    CHECK(book.iterations <= 100);
    for (double phi : book.phi) CHECK(phi == doctest::Approx(10.0 / 0.5).epsilon(1e-9));
    CHECK(book.phi_initial == doctest::Approx(book.phi.back()).epsilon(1e-6));
}

TEST_CASE("net revenue per interval follows the book-value margin") {
    Rig rig(1.0, 0.8, 3);
    auto& d = rig.sol.dispatch[0];
    rig.sol.storage_initial = {0.0};
    // charge 32 MWh at 40 $/MWh (phi = 40), discharge 5 MW at 100
    d.price = {40.0, 100.0, 0.0};
    d.charge[0] = {32.0, 0.0, 0.0};
    d.discharge[0] = {0.0, 5.0, 0.0};
    d.soc[0] = {32.0, 32.0 - 5.0 / 0.8, 32.0 - 5.0 / 0.8};
    auto book = book_value(rig.sol, rig.catalog, 0, 0);
    REQUIRE(book.converged);
    CHECK(book.phi[0] == doctest::Approx(40.0));
    auto pi = storage_net_revenue(rig.sol, rig.catalog, 0, 0, book);
    CHECK(pi[1] == doctest::Approx(5.0 * (100.0 - 40.0 / 0.8)).epsilon(1e-9));  // 250
    CHECK(pi[0] == 0.0);  // zero discharge
    CHECK(pi[2] == 0.0);

    SUBCASE("break-even discharge earns zero") {
        d.price[1] = 40.0 / 0.8;
        auto book2 = book_value(rig.sol, rig.catalog, 0, 0);
        auto pi2 = storage_net_revenue(rig.sol, rig.catalog, 0, 0, book2);
        CHECK(std::abs(pi2[1]) < 1e-9);
    }
    SUBCASE("unconverged book value is rejected") {
        BookValueSeries bad = book;
        bad.converged = false;
        CHECK_THROWS_AS((void)storage_net_revenue(rig.sol, rig.catalog, 0, 0, bad), std::invalid_argument);
    }
}

namespace {

// A solved two-price arbitrage market used by the reconciliation and
// welfare tests.
struct SolvedCase {
    ScenarioSet scenarios;
    TechnologyCatalog catalog;
    MarketDesign design;
    EquilibriumSolution sol;
};

SolvedCase solved_storage_market() {
    SolvedCase c;
    Scenario sc;
    sc.id = "y1";
    sc.probability_weight = 1.0;
    sc.weight_hours = {1.0, 1.0, 1.0, 1.0};
    sc.fixed_demand = {2.0, 2.0, 11.0, 11.0};
    sc.flexible_demand = {1.0, 1.0, 1.0, 1.0};
    c.scenarios.scenarios.push_back(sc);
    c.scenarios.horizon_hours = 4.0;

    GeneratorSpec g;
    g.name = "gen";
    g.variable_cost = 5.0;
    g.annualized_capex = 60.0;
    c.catalog.generators.push_back(g);
    StorageSpec st;
    st.name = "es";
    st.power_capex = 2.0;
    st.energy_capex = 1.0;
    st.charge_efficiency = 0.9;
    st.discharge_efficiency = 0.9;
    st.variable_cost = 0.5;
    c.catalog.storages.push_back(st);
    c.catalog.reference_generator = "gen";

    c.design.run_mode = RunMode::EomVoll;
    c.design.voll = 800.0;
    c.design.price_cap = 800.0;
    c.sol = solve_equilibrium(assemble(c.scenarios, c.catalog, c.design));
    return c;
}

} // namespace

TEST_CASE("book-value revenue reconciles with the arbitrage margin") {
    auto c = solved_storage_market();
    REQUIRE(c.sol.optimal());
    REQUIRE(c.sol.storage_power[0] > 1e-3);
    auto book = book_value(c.sol, c.catalog, 0, 0);
    REQUIRE(book.converged);
    CHECK(book.iterations <= 100);
    auto pi = storage_net_revenue(c.sol, c.catalog, 0, 0, book);
    const auto& d = c.sol.dispatch[0];
    double pi_sum = 0.0, margin = 0.0;
    for (int t = 0; t < 4; ++t) {
        pi_sum += pi[static_cast<std::size_t>(t)];
        margin += d.price[static_cast<std::size_t>(t)] *
                  (d.discharge[0][static_cast<std::size_t>(t)] - d.charge[0][static_cast<std::size_t>(t)]);
    }
    CHECK(pi_sum == doctest::Approx(margin).epsilon(1e-6));
}

TEST_CASE("true welfare equals the solver objective for the uncapped run") {
    auto c = solved_storage_market();
    REQUIRE(c.sol.optimal());
    auto rep = true_welfare(c.sol, c.scenarios, c.catalog);
    CHECK(rep.welfare == doctest::Approx(c.sol.objective).epsilon(1e-6));
    CHECK(rep.total_cost == doctest::Approx(rep.investment_cost + rep.variable_cost));
}

TEST_CASE("redispatch against the true WTP") {
    auto c = solved_storage_market();

    SUBCASE("identity when the cap equals VOLL") {
        auto pair = redispatch_true_wtp(c.sol, c.scenarios, c.catalog);
        CHECK(pair.perfect_rationing.welfare ==
              doctest::Approx(pair.as_dispatched.welfare).epsilon(1e-6));
    }
    SUBCASE("capped fixed-mix dispatch can only improve") {
        MarketDesign capped;
        capped.run_mode = RunMode::DispatchFixedMix;
        capped.fixed_mix_demand = DemandMode::Capped;
        capped.voll = 800.0;
        capped.price_cap = 120.0;
        FixedCapacities mix;
        mix.generator_mw = {10.0};
        mix.storage_power_mw = {c.sol.storage_power[0]};
        mix.storage_energy_mwh = {c.sol.storage_energy[0]};
        capped.fixed_capacities = mix;
        auto capped_sol = solve_equilibrium(assemble(c.scenarios, c.catalog, capped));
        REQUIRE(capped_sol.optimal());
        auto pair = redispatch_true_wtp(capped_sol, c.scenarios, c.catalog);
        // up to solver tolerance on both sides
        CHECK(pair.perfect_rationing.welfare >=
              pair.as_dispatched.welfare - 1e-6 * (1.0 + std::abs(pair.as_dispatched.welfare)));
    }
}

TEST_CASE("missing-money split partitions the energy margin") {
    auto c = solved_storage_market();
    REQUIRE(c.sol.optimal());
    auto rows = missing_money_split(c.sol, c.scenarios, c.catalog);
    REQUIRE(!rows.empty());
    for (const auto& row : rows) {
        double total = 0.0;
        if (row.technology == "gen") {
            const auto& d = c.sol.dispatch[0];
            for (int t = 0; t < 4; ++t)
                total += (d.price[static_cast<std::size_t>(t)] - 5.0) * d.generation[0][static_cast<std::size_t>(t)];
        } else {
            auto book = book_value(c.sol, c.catalog, 0, 0);
            auto pi = storage_net_revenue(c.sol, c.catalog, 0, 0, book);
            const auto& d = c.sol.dispatch[0];
            for (int t = 0; t < 4; ++t)
                total += pi[static_cast<std::size_t>(t)] - 0.5 * d.discharge[0][static_cast<std::size_t>(t)] - charge_tie_break_cost(t, 4) * d.charge[0][static_cast<std::size_t>(t)];
        }
        CHECK(row.revenue_below_pc + row.revenue_at_or_above_pc == doctest::Approx(total).epsilon(1e-6));
        // zero-profit equilibrium: full recovery
        CHECK(row.recovery_fraction == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("price metrics behave on the degenerate cases") {
    auto c = solved_storage_market();
    auto m = price_and_cost_metrics(c.sol, c.scenarios);
    CHECK(m.kappa_ccc == 0.0);   // no capacity market
    CHECK(m.beta_eb == 0.0);     // no emission cap
    CHECK(m.sigma_cv_annual == 0.0);  // single scenario
    CHECK(m.expected_served_mwh > 0.0);
    CHECK(m.mu_price_served > 0.0);

    auto dist = annual_net_revenue_distribution(c.sol, c.scenarios, c.catalog);
    REQUIRE(dist.size() == 1);
    // zero profit: energy margin covers the annualized cost
    CHECK(dist[0].net == doctest::Approx(0.0).scale(dist[0].annualized_cost).epsilon(1e-3));
}

TEST_CASE("suite degenerates cleanly when the cap equals VOLL") {
    auto c = solved_storage_market();
    SuiteParams params;
    params.voll = 800.0;
    params.price_cap = 800.0;
    params.accreditation.durations_h = {1.0, 2.0};
    params.accreditation.threads = 2;
    auto suite = run_suite(c.scenarios, c.catalog, params);
    CHECK_FALSE(suite.cm_active);
    CHECK(suite.e_plus_cm.solution.lambda_cm == 0.0);
    const double obj = suite.eom_voll.solution.objective;
    CHECK(suite.eom_pc.solution.objective == doctest::Approx(obj).epsilon(1e-6));
    CHECK(suite.eom_pc_opt_mix.solution.objective == doctest::Approx(obj).epsilon(1e-6));
    CHECK(suite.e_plus_cm.solution.objective == doctest::Approx(obj).epsilon(1e-6));
    CHECK(suite.eom_voll.unserved.eue ==
          doctest::Approx(suite.eom_pc.unserved.eue).epsilon(1e-6).scale(1.0));
    // bit-identical capacity transfer into the fixed-mix run
    CHECK(suite.eom_pc_opt_mix.solution.gen_capacity[0] == suite.benchmark_mix.generator_mw[0]);
}
