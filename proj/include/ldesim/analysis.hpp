#pragma once

#include "ldesim/accreditation.hpp"
#include "ldesim/calibration.hpp"
#include "ldesim/domain.hpp"
#include "ldesim/planner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ldesim {

// ---------------------------------------------------------------------------
// Welfare
// ---------------------------------------------------------------------------

/// Social welfare evaluated against the TRUE willingness to pay (ceiling
/// VOLL) with efficient rationing within each interval, regardless of the
/// demand curve the run was dispatched against.
struct WelfareReport {
    double welfare = 0.0;          // $/yr
    double consumer_benefit = 0.0;
    double investment_cost = 0.0;  // annualized capex + fixed O&M
    double variable_cost = 0.0;
    double total_cost = 0.0;       // investment + variable
};

WelfareReport true_welfare(const EquilibriumSolution& solution, const ScenarioSet& scenarios,
                           const TechnologyCatalog& catalog);

/// The welfare decomposition of a capped run: (a) as dispatched, and
/// (b) after fixing generation and charging, restoring the true WTP and
/// re-solving with only the discharge variables free.
struct WelfarePair {
    WelfareReport as_dispatched;
    WelfareReport perfect_rationing;
};

WelfarePair redispatch_true_wtp(const EquilibriumSolution& run, const ScenarioSet& scenarios,
                                const TechnologyCatalog& catalog,
                                const qp::SolveOptions& options = {});

// ---------------------------------------------------------------------------
// Stored-energy book value and revenue attribution
// ---------------------------------------------------------------------------

struct BookValueSeries {
    std::vector<double> phi;  // $/MWh after each interval
    double phi_initial = 0.0; // converged start-of-horizon value
    int iterations = 0;
    double residual = 0.0;    // |phi_0 - phi_T| (relative)
    bool converged = false;
};

/// Forward value-averaging pass iterated to the fixed point
/// phi_0 = phi_T, starting from phi_0 = 0. Zero stored energy carries the
/// previous value forward.
BookValueSeries book_value(const EquilibriumSolution& solution, const TechnologyCatalog& catalog,
                           int scenario, int storage, int max_iterations = 100);

/// Per-interval net revenue rate pi = q_dis (lambda - phi_prev / eta_dis),
/// in $/h; multiply by the interval weight for $. Throws on an
/// unconverged book value.
std::vector<double> storage_net_revenue(const EquilibriumSolution& solution,
                                        const TechnologyCatalog& catalog, int scenario, int storage,
                                        const BookValueSeries& book);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MissingMoneyRow {
    std::string technology;
    double revenue_below_pc = 0.0;        // expected $/yr
    double revenue_at_or_above_pc = 0.0;
    double cm_revenue = 0.0;
    double annualized_cost = 0.0;
    double recovery_fraction = 0.0;       // energy-market revenue / cost
};

/// Energy-market net revenue split by intervals priced below vs at/above
/// the cap (threshold PC(1 - 1e-3)); storage revenue uses the book-value
/// attribution. Installed technologies only.
std::vector<MissingMoneyRow> missing_money_split(const EquilibriumSolution& solution,
                                                 const ScenarioSet& scenarios,
                                                 const TechnologyCatalog& catalog);

struct RunMetrics {
    double mu_price_served = 0.0;   // served-energy-weighted average price, $/MWh
    double mu_price_hours = 0.0;    // hours-weighted variant
    double sigma_cv_annual = 0.0;   // CV of per-scenario average prices
    double sigma_cv_hourly = 0.0;   // CV of interval prices (diagnostic)
    double kappa_ccc = 0.0;         // consumer capacity cost, $/MWh served
    double beta_eb = 0.0;           // carbon shadow value, $/MWh served
    double expected_served_mwh = 0.0;
    double consumer_energy_cost = 0.0;    // $/yr
    double consumer_capacity_cost = 0.0;  // $/yr
};

RunMetrics price_and_cost_metrics(const EquilibriumSolution& solution, const ScenarioSet& scenarios);

struct StorageAnnualRevenue {
    std::string storage;
    std::string scenario;
    double energy_margin = 0.0;     // $ in that scenario-year
    double cm_revenue = 0.0;        // scenario-invariant first-stage payment
    double annualized_cost = 0.0;
    double net = 0.0;
};

std::vector<StorageAnnualRevenue> annual_net_revenue_distribution(
    const EquilibriumSolution& solution, const ScenarioSet& scenarios,
    const TechnologyCatalog& catalog);

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

struct SuiteParams {
    double voll = 20300.0;
    double price_cap = 7549.0;
    double emission_cap = std::numeric_limits<double>::infinity();  // tCO2/yr
    AccreditOptions accreditation;
    int curve_segments = 4;
    qp::SolveOptions solver;
};

struct SuiteRun {
    std::string name;
    EquilibriumSolution solution;
    WelfarePair welfare;
    RunMetrics metrics;
    UnservedSeries unserved;
};

struct StorageCurveFit {
    std::string storage;
    CreditCurveFit fit;
};

struct RunSuiteResult {
    SuiteRun eom_voll;
    SuiteRun eom_pc_opt_mix;
    SuiteRun e_plus_cm;
    SuiteRun eom_pc;
    FixedCapacities benchmark_mix;
    AccreditationResult accreditation;
    NetConeResult net_cones;
    double capacity_target_mw = 0.0;
    std::optional<CapacityDemandCurve> cm_curve;
    TechnologyCatalog credited_catalog;  // estimated credits attached
    std::vector<StorageCurveFit> curve_fits;
    bool cm_active = false;  // false when the reference has no missing money
    std::string note;        // set when the CM leg was skipped
};

/// Dependency-ordered execution: the uncapped benchmark, the capped
/// dispatch of its mix, accreditation + calibration, then the capacity
/// market and energy-only capped equilibria.
RunSuiteResult run_suite(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                         const SuiteParams& params);

struct SweepRow {
    double factor = 1.0;
    double mu_price = 0.0;
    double lambda_cm = 0.0;
    double welfare = 0.0;  // perfect-rationing true welfare
    double eue = 0.0;
    double d_mu_price = 0.0;  // deltas vs factor 1.0
    double d_lambda_cm = 0.0;
    double d_welfare = 0.0;
    double d_eue = 0.0;
};

/// Scales the storage credit curves by each factor (clipped to [0,1] at
/// evaluation), recomputes the capacity target with the reference
/// net-CONE held fixed, rebuilds the CM curve and re-solves the capacity
/// market run.
std::vector<SweepRow> credit_sensitivity_sweep(const ScenarioSet& scenarios,
                                               const RunSuiteResult& base, const SuiteParams& params,
                                               const std::vector<double>& factors);

} // namespace ldesim
