#pragma once

#include "ldesim/accreditation.hpp"
#include "ldesim/analysis.hpp"
#include "ldesim/calibration.hpp"
#include "ldesim/domain.hpp"
#include "ldesim/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ldesim::io {

// Locale-independent number formatting (shortest round-trip) and parsing.
std::string format_double(double v);
double parse_double(const std::string& token, const std::string& where);

// ---------------------------------------------------------------------------
// Scenario CSV
//
// One row per (scenario, interval):
//   scenario_id,interval_id,weight_hours,d_fix_mw,d_flex_mw[,avail_<key>...]
// Scenario probability weights are not part of the file; they default to
// equal and can be overridden in the run config.
// ---------------------------------------------------------------------------

ScenarioSet read_scenario_csv(std::istream& in, double horizon_hours,
                              const std::map<std::string, double>& scenario_weights = {});
ScenarioSet read_scenario_csv(const std::filesystem::path& path, double horizon_hours,
                              const std::map<std::string, double>& scenario_weights = {});
void write_scenario_csv(const ScenarioSet& set, std::ostream& out);
void write_scenario_csv(const ScenarioSet& set, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Catalog JSON
// ---------------------------------------------------------------------------

TechnologyCatalog read_catalog_json(std::istream& in);
TechnologyCatalog read_catalog_json(const std::filesystem::path& path);
void write_catalog_json(const TechnologyCatalog& catalog, std::ostream& out);

/// Standard capital-recovery factor; rate 0 degenerates to 1/n.
double capital_recovery_factor(double rate, double lifetime_years);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Named capacities as they appear in config files; resolved against a
/// catalog into positional vectors.
struct FixedCapacitiesByName {
    struct Entry {
        double power_mw = 0.0;
        double energy_mwh = 0.0;
    };
    std::map<std::string, Entry> entries;
    FixedCapacities resolve(const TechnologyCatalog& catalog) const;
};

struct RunConfig {
    std::filesystem::path scenario_file;
    std::filesystem::path catalog_file;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;
    int threads = 0;
    double tolerance = 1e-8;
    double horizon_hours = 8760.0;
    std::map<std::string, double> scenario_weights;

    double voll = 20300.0;
    double price_cap = 7549.0;
    std::optional<double> emission_intensity_g_per_kwh;
    std::optional<double> emission_cap_tco2;
    RunMode mode = RunMode::EomVoll;
    std::optional<FixedCapacitiesByName> fixed_capacities;
    std::optional<double> cm_capacity_target_mw;  // for `solve --mode e_plus_cm`
    std::optional<double> cm_net_cone;

    AccreditOptions accreditation;
    int curve_segments = 4;
    std::vector<double> sweep_factors{0.8, 1.0, 1.2};

    SynthConfig synth;

    /// Emission cap in tCO2/yr: explicit cap, or intensity times expected
    /// annual demand, or +inf.
    double emission_cap(const ScenarioSet& scenarios) const;
};

RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Result exports (schemas documented in the README)
// ---------------------------------------------------------------------------

void write_capacities_csv(const EquilibriumSolution& sol, const TechnologyCatalog& catalog,
                          const std::filesystem::path& path);
void write_prices_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                      const std::filesystem::path& path);
void write_dispatch_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                        const TechnologyCatalog& catalog, const UnservedSeries& unserved,
                        const std::filesystem::path& path);
void write_duals_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                     const std::filesystem::path& path);
void write_run_summary_json(const SuiteRun& run, const std::filesystem::path& path);
void write_credits_csv(const AccreditationResult& result, const std::filesystem::path& path);
void write_credit_curve_csv(const std::vector<StorageCurveFit>& fits,
                            const std::filesystem::path& path);
void write_calibration_csv(const NetConeResult& result, const TechnologyCatalog& credited,
                           const FixedCapacities& benchmark_mix, const std::filesystem::path& path);
void write_cm_curve_csv(const CapacityDemandCurve& curve, const std::filesystem::path& path);
void write_metrics_csv(const SuiteRun& run, const ScenarioSet& scenarios,
                       const std::filesystem::path& path);
void write_suite_summary_csv(const RunSuiteResult& suite, const ScenarioSet& scenarios,
                             const std::filesystem::path& path);
void write_net_revenue_distribution_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                                        const TechnologyCatalog& catalog,
                                        const std::filesystem::path& path);
void write_missing_money_csv(const std::string& run_name,
                             const std::vector<MissingMoneyRow>& rows,
                             const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
void write_error_json(const std::filesystem::path& output_dir, int exit_code,
                      const std::string& stage, const std::string& message);

/// All per-run artifacts for one solved run under dir/<run-name>/.
void export_run(const SuiteRun& run, const ScenarioSet& scenarios,
                const TechnologyCatalog& catalog, const std::filesystem::path& dir);

} // namespace ldesim::io
