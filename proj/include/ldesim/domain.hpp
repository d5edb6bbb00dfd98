#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ldesim {

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// One weather/demand year: weighted time intervals with demand and
/// per-profile availability series. Interval arrays share one index.
struct Scenario {
    std::string id;
    double probability_weight = 0.0;
    std::vector<double> weight_hours;
    std::vector<double> fixed_demand;      // MW
    std::vector<double> flexible_demand;   // MW (width of the price-elastic part)
    std::vector<std::vector<double>> availability;  // [profile][interval]

    int num_intervals() const { return static_cast<int>(weight_hours.size()); }
};

struct ScenarioSet {
    std::vector<std::string> profile_keys;
    std::vector<Scenario> scenarios;
    double horizon_hours = 8760.0;

    int find_profile(const std::string& key) const;
    /// Expected annual demand, sum of w*delta*(D_fix + D_flex) [MWh/yr].
    double expected_annual_demand() const;
    /// max over scenarios and intervals of D_fix [MW].
    double peak_fixed_demand() const;
};

// ---------------------------------------------------------------------------
// Technologies
// ---------------------------------------------------------------------------

/// Concave piecewise-linear capacity credit as a function of storage
/// duration (hours). Evaluation is clipped to [0, 1]; beyond the last
/// breakpoint the last segment's slope extrapolates before clipping.
struct CreditCurve {
    struct Segment {
        double alpha = 0.0;  // intercept
        double beta = 0.0;   // slope per hour of duration
        double zeta_lo = 0.0;
        double zeta_hi = 0.0;
    };
    std::vector<Segment> segments;

    bool empty() const { return segments.empty(); }
    double evaluate(double zeta) const;
    /// Raw envelope value min_l(alpha_l + beta_l * zeta), no clipping.
    double envelope(double zeta) const;
    void scale(double factor);
    std::vector<std::string> check() const;  // violated invariants, empty if ok
};

struct GeneratorSpec {
    std::string name;
    double variable_cost = 0.0;       // $/MWh
    double annualized_capex = 0.0;    // $/MW-yr
    double fixed_om = 0.0;            // $/MW-yr
    double emission_factor = 0.0;     // tCO2/MWh
    std::string availability_profile_key;  // "" or "firm" -> always available
    double capacity_credit = 1.0;

    double annual_cost_per_mw() const { return annualized_capex + fixed_om; }
};

struct StorageSpec {
    std::string name;
    double power_capex = 0.0;      // $/MW-yr
    double power_fixed_om = 0.0;   // $/MW-yr
    double energy_capex = 0.0;     // $/MWh-yr
    double energy_fixed_om = 0.0;  // $/MWh-yr
    double charge_efficiency = 1.0;
    double discharge_efficiency = 1.0;
    double variable_cost = 0.5;    // $/MWh discharged
    std::optional<CreditCurve> credit_curve;

    double annual_cost_per_mw() const { return power_capex + power_fixed_om; }
    double annual_cost_per_mwh() const { return energy_capex + energy_fixed_om; }
    /// Duration implied by a (power, energy) pair, hours.
    double duration(double power_mw, double energy_mwh) const {
        return power_mw > 0 ? discharge_efficiency * energy_mwh / power_mw : 0.0;
    }
};

struct TechnologyCatalog {
    std::vector<GeneratorSpec> generators;
    std::vector<StorageSpec> storages;
    std::string reference_generator;  // name; perfect availability assumed

    int find_generator(const std::string& name) const;
    int find_storage(const std::string& name) const;
    const GeneratorSpec* reference() const;
};

// ---------------------------------------------------------------------------
// Demand curves and market configuration
// ---------------------------------------------------------------------------

enum class DemandMode { Uncapped, Capped };

/// Price-cap truncation of the two-part demand curve. The flexible part
/// with willingness to pay above PC moves into the flat block; total
/// width is conserved exactly. Throws on PC > VOLL or nonpositive inputs.
struct TruncatedWidths {
    double fixed_width;
    double flexible_width;
};
TruncatedWidths truncate_demand_for_price_cap(double d_fix, double d_flex, double voll, double pc);

/// Effective per-interval demand-curve widths for one run.
struct EnergyDemandCurve {
    DemandMode mode = DemandMode::Uncapped;
    double voll = 0.0;
    double price_cap = 0.0;
    double wtp_ceiling = 0.0;  // B: VOLL when uncapped, PC when capped
    std::vector<std::vector<double>> fixed_width;     // [scenario][interval]
    std::vector<std::vector<double>> flexible_width;  // [scenario][interval]

    static EnergyDemandCurve build(const ScenarioSet& set, DemandMode mode, double voll, double pc);
};

/// Administrative capacity demand curve: a flat block at the price cap
/// followed by downward-sloping segments ending at price zero.
struct CapacityDemandCurve {
    double fixed_width = 0.0;  // MW at the curve ceiling
    double fixed_price = 0.0;  // B^C_1, $/MW-yr
    struct FlexSegment {
        double width = 0.0;        // MW
        double price_start = 0.0;  // $/MW-yr
        double price_end = 0.0;
    };
    std::vector<FlexSegment> flex;

    double total_width() const;
    /// Integral of the curve over its full width ($/yr); used for checks.
    double integral() const;
    std::vector<std::string> check() const;
};

enum class RunMode { EomVoll, EomPc, EPlusCm, DispatchFixedMix };

const char* to_string(RunMode m);

struct FixedCapacities {
    std::vector<double> generator_mw;       // aligned with catalog.generators
    std::vector<double> storage_power_mw;   // aligned with catalog.storages
    std::vector<double> storage_energy_mwh;
};

struct MarketDesign {
    RunMode run_mode = RunMode::EomVoll;
    double voll = 20300.0;      // $/MWh
    double price_cap = 20300.0; // $/MWh, <= voll
    double emission_cap = std::numeric_limits<double>::infinity();  // tCO2/yr expected
    std::optional<CapacityDemandCurve> capacity_demand_curve;  // E+CM only
    std::optional<FixedCapacities> fixed_capacities;           // fixed-mix only
    /// Demand shape used by DispatchFixedMix runs (the other modes imply it).
    DemandMode fixed_mix_demand = DemandMode::Capped;

    DemandMode demand_mode() const {
        switch (run_mode) {
            case RunMode::EomVoll: return DemandMode::Uncapped;
            case RunMode::EomPc:
            case RunMode::EPlusCm: return DemandMode::Capped;
            case RunMode::DispatchFixedMix: return fixed_mix_demand;
        }
        return DemandMode::Uncapped;
    }
    double wtp_ceiling() const { return demand_mode() == DemandMode::Capped ? price_cap : voll; }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    struct Issue {
        std::string where;    // e.g. "scenario[1].interval[3]" or "storage[ldes]"
        std::string message;
    };
    std::vector<Issue> issues;
    bool pass() const { return issues.empty(); }
    std::string to_string() const;
};

/// Checks every domain invariant; downstream operations expect a passing
/// report. Violations are reported, not thrown.
ValidationReport validate_inputs(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                                 const MarketDesign& design);

} // namespace ldesim
