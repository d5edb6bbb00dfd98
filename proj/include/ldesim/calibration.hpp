#pragma once

#include "ldesim/domain.hpp"
#include "ldesim/planner.hpp"

#include <string>
#include <vector>

namespace ldesim {

struct NetConeRecord {
    std::string technology;
    double installed_mw = 0.0;
    double gross_cost = 0.0;           // $/MW-yr installed
    double energy_net_revenue = 0.0;   // $/MW-yr installed, capped benchmark dispatch
    double net_cone_uncredited = 0.0;  // gross - revenue
    double required_credit = 0.0;      // NC_uc / NC_ref
    bool has_required_credit = false;  // only where installed capacity > tol
};

enum class CalibrationStatus { Ok, NoMissingMoney };

struct NetConeResult {
    CalibrationStatus status = CalibrationStatus::Ok;
    double net_cone_ref = 0.0;  // $/MW-yr of the perfectly available reference
    std::vector<NetConeRecord> records;

    const NetConeRecord* find(const std::string& technology) const;
};

/// Per-technology net cost of new entry under the capped benchmark
/// dispatch. The reference revenue uses the marginal form
/// sum w·delta·max(0, lambda - C_V - lambda_CT·EF) with perfect
/// availability, which equals realized per-MW revenue when installed.
NetConeResult net_cone(const FixedCapacities& benchmark_mix,
                       const EquilibriumSolution& capped_dispatch, const ScenarioSet& scenarios,
                       const TechnologyCatalog& catalog);

/// Capacity target: accredited MW of the benchmark mix. Generator credits
/// come from the catalog, storage credits from its curve at the benchmark
/// duration. Technologies without installed capacity are skipped; an
/// installed storage without a curve is an error.
double capacity_target(const FixedCapacities& benchmark_mix, const TechnologyCatalog& catalog);

/// The administrative curve through (0.965 CT, 1.5 NC), (CT, NC),
/// (1.035 CT, 0): one flat block and two downward-sloping segments.
CapacityDemandCurve build_cm_demand_curve(double capacity_target_mw, double net_cone_ref);

} // namespace ldesim
