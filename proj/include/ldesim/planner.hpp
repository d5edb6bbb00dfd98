#pragma once

#include "ldesim/domain.hpp"
#include "ldesim/qp.hpp"

#include <algorithm>
#include <vector>

namespace ldesim {

// ---------------------------------------------------------------------------
// Program structure
// ---------------------------------------------------------------------------

enum class RowKind {
    GenCapacity,          // q <= c A                (nu)
    GenCmQualification,   // c_cm <= CC c
    StorageDischarge,     // q_dis <= c_P
    StorageCharge,        // q_ch <= c_P
    SocRecursion,         // e_t = e_{t-1} + w (eta q_ch - q_dis / eta)
    SocEndOfHorizon,      // e_T >= e_init
    SocCapacity,          // e <= c_E
    StorageCmQualification,  // c_cm <= alpha c_P + beta eta c_E, one per segment
    EnergyBalance,        // served = generation + net discharge   (lambda_E)
    CmClearing,           // CM demand = CM supply                 (lambda_CM)
    EmissionCap,          // expected emissions <= cap             (lambda_CT)
};

struct RowLabel {
    RowKind kind;
    int scenario = -1;
    int interval = -1;
    int tech = -1;     // generator or storage index, by kind
    int segment = -1;  // credit-curve segment (saturation row = segment count)
};

/// Flat variable indexing for the planner program. First-stage variables
/// come first, then one block per (scenario, interval).
struct VarMap {
    int n_gen = 0;
    int n_sto = 0;
    bool has_cm = false;
    int n_cm_flex = 0;
    std::vector<int> intervals;       // per scenario
    std::vector<int> scenario_base;   // flat offset of each scenario's blocks
    int stage2_base = 0;
    int block = 0;
    int num_vars = 0;

    int gen_capacity(int g) const { return g; }
    int sto_power(int s) const { return n_gen + s; }
    int sto_energy(int s) const { return n_gen + n_sto + s; }
    int sto_initial(int s) const { return n_gen + 2 * n_sto + s; }
    int cm_gen(int g) const { return n_gen + 3 * n_sto + g; }
    int cm_sto(int s) const { return n_gen + 3 * n_sto + n_gen + s; }
    int cm_demand_fixed() const { return n_gen + 3 * n_sto + n_gen + n_sto; }
    int cm_demand_flex(int seg) const { return cm_demand_fixed() + 1 + seg; }

    int block_base(int w, int t) const { return stage2_base + scenario_base[w] + t * block; }
    int gen_q(int w, int t, int g) const { return block_base(w, t) + g; }
    int sto_charge(int w, int t, int s) const { return block_base(w, t) + n_gen + s; }
    int sto_discharge(int w, int t, int s) const { return block_base(w, t) + n_gen + n_sto + s; }
    int soc(int w, int t, int s) const { return block_base(w, t) + n_gen + 2 * n_sto + s; }
    int served_fixed(int w, int t) const { return block_base(w, t) + n_gen + 3 * n_sto; }
    int served_flexible(int w, int t) const { return block_base(w, t) + n_gen + 3 * n_sto + 1; }
};

/// Optional pins for dispatch variables, used by the accreditation
/// paradigms and the true-WTP redispatch. Empty vectors leave a family
/// unpinned; NaN leaves a single entry unpinned.
struct DispatchPins {
    std::vector<std::vector<std::vector<double>>> generation;        // [g][scenario][t]
    std::vector<std::vector<std::vector<double>>> storage_charge;    // [s][scenario][t]
    std::vector<std::vector<std::vector<double>>> storage_discharge; // [s][scenario][t]
    std::vector<double> storage_initial;                             // [s], NaN = free

    bool empty() const {
        return generation.empty() && storage_charge.empty() && storage_discharge.empty() &&
               storage_initial.empty();
    }
};

/// Tiny charging-side cost ($/MWh charged), ramped over the horizon.
/// Storage schedules are otherwise non-unique across zero-price
/// curtailment hours (a flat optimal face that stalls the interior-point
/// solver); the ramp makes earlier charging strictly cheaper, picking one
/// schedule deterministically. It enters the agent objectives, so
/// agent_profit uses the same function.
inline constexpr double kChargeTieBreakCost = 5e-3;
inline double charge_tie_break_cost(int interval, int interval_count) {
    return kChargeTieBreakCost *
           (1.0 + static_cast<double>(interval + 1) / std::max(1, interval_count));
}

struct PlannerProgram {
    qp::ConvexQP qp;
    VarMap vars;
    std::vector<RowLabel> rows;
    MarketDesign design;
    EnergyDemandCurve demand;
    std::vector<std::vector<double>> weight;  // w_t per scenario
    std::vector<double> delta;                // probability weights
};

// ---------------------------------------------------------------------------
// Solution
// ---------------------------------------------------------------------------

struct ScenarioDispatch {
    std::vector<double> price;        // lambda_E per interval, $/MWh (de-weighted)
    std::vector<std::vector<double>> generation;  // [g][t] MW
    std::vector<std::vector<double>> charge;      // [s][t] MW
    std::vector<std::vector<double>> discharge;   // [s][t] MW
    std::vector<std::vector<double>> soc;         // [s][t] MWh
    std::vector<double> served_fixed;    // per t, MW
    std::vector<double> served_flexible; // per t, MW
};

struct EquilibriumSolution {
    qp::SolveStatus status = qp::SolveStatus::NotConverged;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;

    std::vector<double> gen_capacity;       // MW
    std::vector<double> storage_power;      // MW
    std::vector<double> storage_energy;     // MWh
    std::vector<double> storage_initial;    // MWh

    std::vector<double> cm_generator;  // contracted MW per generator
    std::vector<double> cm_storage;
    double cm_demand = 0.0;
    double lambda_cm = 0.0;  // $/MW-yr
    double lambda_ct = 0.0;  // $/tCO2
    double expected_emissions = 0.0;

    std::vector<ScenarioDispatch> dispatch;
    std::vector<std::vector<double>> interval_hours;  // copy of w_t per scenario

    RunMode mode = RunMode::EomVoll;
    DemandMode demand_mode = DemandMode::Uncapped;
    double voll = 0.0;
    double price_cap = 0.0;
    double emission_cap = 0.0;

    bool optimal() const { return status == qp::SolveStatus::Optimal; }
    double storage_duration(const StorageSpec& s, int idx) const {
        return s.duration(storage_power[static_cast<std::size_t>(idx)],
                          storage_energy[static_cast<std::size_t>(idx)]);
    }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Builds the central-planner QP whose KKT point is the multi-agent
/// equilibrium for the given design. Throws std::invalid_argument on
/// design/catalog mismatches.
PlannerProgram assemble(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                        const MarketDesign& design);

/// Same, with dispatch variables pinned to given schedules.
PlannerProgram assemble(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                        const MarketDesign& design, const DispatchPins& pins);

EquilibriumSolution solve_equilibrium(const PlannerProgram& program,
                                      const qp::SolveOptions& options = {});

/// Expected annual profit of one technology at the equilibrium point:
/// energy-market margin plus CM revenue minus carbon charges and
/// annualized investment/fixed costs. Throws on unknown names.
double agent_profit(const EquilibriumSolution& solution, const ScenarioSet& scenarios,
                    const TechnologyCatalog& catalog, const std::string& technology);

/// Supply minus served demand, worst interval (for balance checks).
double worst_balance_residual(const EquilibriumSolution& solution);

} // namespace ldesim
