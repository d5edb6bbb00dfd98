#pragma once

#include "ldesim/domain.hpp"
#include "ldesim/planner.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ldesim {

// ---------------------------------------------------------------------------
// Unserved energy
// ---------------------------------------------------------------------------

struct UnservedSeries {
    std::vector<std::vector<double>> shortfall;  // [scenario][interval] MW
    double eue = 0.0;                            // MWh expected per year
};

/// Shortfall of consumption against the demand whose willingness to pay is
/// at or above the price cap:
///   l = max(0, D_fix + D_flex (VOLL - PC)/VOLL - d_fix - d_flex)
/// Solutions dispatched against the uncapped curve are rejected unless
/// allow_uncapped is set (the comparability convention: same threshold,
/// applied to the uncapped dispatch).
UnservedSeries unserved_energy(const EquilibriumSolution& solution, const ScenarioSet& scenarios,
                               bool allow_uncapped = false);

// ---------------------------------------------------------------------------
// Marginal accreditation
// ---------------------------------------------------------------------------

/// Dispatch rule for pre-existing storage in the perturbation solves.
enum class Paradigm { Unconstrained, ChargingFixed, ChargingAndDischargingFixed };

const char* to_string(Paradigm p);

struct CreditEstimate {
    std::string resource;
    std::optional<double> duration_h;  // storage resources only
    Paradigm paradigm = Paradigm::Unconstrained;
    double eue_0 = 0.0;
    double eue_ref = 0.0;
    double eue_r = 0.0;
    double credit = 0.0;  // (eue_0 - eue_r) / (eue_0 - eue_ref), unclipped
};

std::vector<double> default_duration_grid();

struct AccreditOptions {
    double epsilon_mw = 0.01;
    std::vector<double> durations_h = default_duration_grid();
    Paradigm paradigm = Paradigm::Unconstrained;
    /// Stop probing longer durations once two consecutive credits reach 1.
    bool truncate_saturated = true;
    int threads = 0;  // 0 = hardware concurrency
    qp::SolveOptions solver;
};

struct AccreditationResult {
    bool scarcity = true;  // false: EUE_0 == EUE_ref, credits undefined
    std::string diagnostic;
    double eue_0 = 0.0;
    double eue_ref = 0.0;
    /// Reference first, then generators in catalog order, then storage
    /// durations in ascending order per storage.
    std::vector<CreditEstimate> estimates;
    EquilibriumSolution baseline;  // the capped fixed-mix dispatch (step 1)

    /// Duration/credit points for one storage, for curve fitting.
    std::vector<std::pair<double, double>> storage_points(const std::string& name) const;
    const CreditEstimate* find(const std::string& resource) const;
};

/// Algorithm: dispatch the fixed mix under the price-capped demand for the
/// baseline EUE, add epsilon of a perfect reference generator for the
/// denominator, then add epsilon of each resource (storage across the
/// duration grid) and take the EUE-reduction ratio. The perturbation
/// solves run on a worker pool; result order is deterministic.
AccreditationResult accredit(const FixedCapacities& mix, const ScenarioSet& scenarios,
                             const TechnologyCatalog& catalog, double voll, double price_cap,
                             double emission_cap, const AccreditOptions& options = {});

// ---------------------------------------------------------------------------
// Credit-curve fitting
// ---------------------------------------------------------------------------

struct CreditCurveFit {
    CreditCurve curve;
    double r2 = 0.0;
    /// Set when the concavity constraints actively bound the fit
    /// (non-concave input points).
    bool concavity_warning = false;
};

/// Least-squares continuous piecewise-linear fit with monotonicity and
/// concavity constraints; breakpoints are chosen from the data sites by
/// enumeration. Requires at least segment_count + 1 points with strictly
/// increasing durations.
CreditCurveFit fit_credit_curve(const std::vector<std::pair<double, double>>& points,
                                int segment_count);

} // namespace ldesim
