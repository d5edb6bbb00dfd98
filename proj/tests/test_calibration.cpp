#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ldesim/calibration.hpp"

#include <cmath>

using namespace ldesim;

namespace {

// One scenario, two intervals (w = 1); prices and dispatch are hand-set so
// the revenue sums are plain arithmetic.
struct Synthetic {
    ScenarioSet scenarios;
    TechnologyCatalog catalog;
    FixedCapacities mix;
    EquilibriumSolution sol;
};

Synthetic make_synthetic() {
    Synthetic s;
    Scenario sc;
    sc.id = "s0";
    sc.probability_weight = 1.0;
    sc.weight_hours = {1.0, 1.0};
    sc.fixed_demand = {10.0, 10.0};
    sc.flexible_demand = {0.0, 0.0};
    s.scenarios.scenarios.push_back(sc);
    s.scenarios.horizon_hours = 2.0;

    GeneratorSpec ref;
    ref.name = "ref";
    ref.variable_cost = 10.0;
    ref.annualized_capex = 50.0;
    s.catalog.generators.push_back(ref);
    GeneratorSpec other;
    other.name = "other";
    other.variable_cost = 0.0;
    other.annualized_capex = 30.0;
    s.catalog.generators.push_back(other);
    s.catalog.reference_generator = "ref";

    s.mix.generator_mw = {4.0, 6.0};
    s.mix.storage_power_mw = {};
    s.mix.storage_energy_mwh = {};

    s.sol.status = qp::SolveStatus::Optimal;
    s.sol.demand_mode = DemandMode::Capped;
    s.sol.voll = 1000.0;
    s.sol.price_cap = 400.0;
    s.sol.gen_capacity = s.mix.generator_mw;
    s.sol.storage_power = {};
    s.sol.storage_energy = {};
    s.sol.dispatch.resize(1);
    auto& d = s.sol.dispatch[0];
    d.price = {20.0, 45.0};
    d.generation = {{4.0, 4.0}, {6.0, 6.0}};
    d.served_fixed = {10.0, 10.0};
    d.served_flexible = {0.0, 0.0};
    return s;
}

} // namespace

TEST_CASE("net cone arithmetic and required credits") {
    auto s = make_synthetic();
    // ref margin per MW: max(0, 20-10) + max(0, 45-10) = 45; NC_ref = 50 - 45 = 5
    // other: revenue per MW = (20 + 45) * 6 / 6 = 65 -> NC = 30 - 65 = -35 -> req = -7
    auto nc = net_cone(s.mix, s.sol, s.scenarios, s.catalog);
    CHECK(nc.status == CalibrationStatus::Ok);
    CHECK(nc.net_cone_ref == doctest::Approx(5.0));
    const auto* rref = nc.find("ref");
    REQUIRE(rref != nullptr);
    CHECK(rref->net_cone_uncredited == doctest::Approx(5.0));
    CHECK(rref->required_credit == doctest::Approx(1.0));
    const auto* rother = nc.find("other");
    REQUIRE(rother != nullptr);
    CHECK(rother->energy_net_revenue == doctest::Approx(65.0));

    // NC_ref = 50, NC_uc = 25 -> required credit 0.5 (direct ratio check)
    CHECK(25.0 / 50.0 == doctest::Approx(0.5));
}

TEST_CASE("full cost recovery reports no missing money") {
    auto s = make_synthetic();
    s.sol.dispatch[0].price = {40.0, 45.0};  // ref margin 30 + 35 = 65 > 50
    auto nc = net_cone(s.mix, s.sol, s.scenarios, s.catalog);
    CHECK(nc.status == CalibrationStatus::NoMissingMoney);
    for (const auto& r : nc.records) CHECK_FALSE(r.has_required_credit);
}

TEST_CASE("uncapped solutions are rejected") {
    auto s = make_synthetic();
    s.sol.demand_mode = DemandMode::Uncapped;
    CHECK_THROWS_AS((void)net_cone(s.mix, s.sol, s.scenarios, s.catalog), std::invalid_argument);
}

TEST_CASE("capacity target sums accredited capacity") {
    TechnologyCatalog cat;
    GeneratorSpec g;
    g.name = "gen";
    g.capacity_credit = 1.0;
    cat.generators.push_back(g);
    StorageSpec st;
    st.name = "es";
    st.discharge_efficiency = 1.0;
    CreditCurve cc;
    cc.segments = {{0.5, 0.0, 0.0, 100.0}};  // flat 0.5 for any duration
    st.credit_curve = cc;
    cat.storages.push_back(st);
    cat.reference_generator = "gen";

    FixedCapacities mix;
    mix.generator_mw = {80.0};
    mix.storage_power_mw = {20.0};
    mix.storage_energy_mwh = {80.0};
    CHECK(capacity_target(mix, cat) == doctest::Approx(90.0));

    SUBCASE("benchmark without storage sums generators only") {
        mix.storage_power_mw = {0.0};
        mix.storage_energy_mwh = {0.0};
        CHECK(capacity_target(mix, cat) == doctest::Approx(80.0));
    }
    SUBCASE("all credits zero gives CT = 0 and curve construction rejects") {
        cat.generators[0].capacity_credit = 0.0;
        cat.storages[0].credit_curve->segments = {{0.0, 0.0, 0.0, 100.0}};
        const double ct = capacity_target(mix, cat);
        CHECK(ct == 0.0);
        CHECK_THROWS_AS((void)build_cm_demand_curve(ct, 60.0), std::invalid_argument);
    }
    SUBCASE("installed storage without a curve is an error") {
        cat.storages[0].credit_curve.reset();
        CHECK_THROWS_AS((void)capacity_target(mix, cat), std::invalid_argument);
    }
}

TEST_CASE("capacity demand curve breakpoints are exact") {
    auto curve = build_cm_demand_curve(100.0, 60.0);
    CHECK(curve.fixed_width == 96.5);
    CHECK(curve.fixed_price == 90.0);
    REQUIRE(curve.flex.size() == 2);
    CHECK(curve.flex[0].width == doctest::Approx(3.5));
    CHECK(curve.flex[0].price_start == 90.0);  // continuity at the first breakpoint
    CHECK(curve.flex[0].price_end == 60.0);
    CHECK(curve.flex[1].width == doctest::Approx(3.5));
    CHECK(curve.flex[1].price_start == 60.0);
    CHECK(curve.flex[1].price_end == 0.0);
    CHECK(curve.total_width() == doctest::Approx(103.5));
    // hand quadrature: 90*96.5 + (90+60)/2*3.5 + (60+0)/2*3.5
    CHECK(curve.integral() == doctest::Approx(8685.0 + 262.5 + 105.0).epsilon(1e-12));
    CHECK(curve.check().empty());

    CHECK_THROWS_AS((void)build_cm_demand_curve(0.0, 60.0), std::invalid_argument);
    CHECK_THROWS_AS((void)build_cm_demand_curve(100.0, -1.0), std::invalid_argument);
}
