// Command-line front end: scenario generation, validation, single runs,
// accreditation, calibration, the full suite and the credit sweep.

#include <CLI11.hpp>

#include "ldesim/analysis.hpp"
#include "ldesim/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

using namespace ldesim;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInvariant = 4;

struct Cli {
    std::string config_path;
    std::string out_override;
    std::string mode_override;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    int threads_override = -1;
    double tolerance_override = 0.0;
};

struct Loaded {
    io::RunConfig config;
    ScenarioSet scenarios;
    TechnologyCatalog catalog;
};

void apply_overrides(io::RunConfig& cfg, const Cli& cli) {
    if (!cli.out_override.empty()) cfg.output_dir = cli.out_override;
    if (const char* env = std::getenv("LDESIM_OUT")) cfg.output_dir = env;
    if (cli.has_seed) {
        cfg.seed = cli.seed_override;
        cfg.synth.seed = cli.seed_override;
    }
    if (cli.threads_override >= 0) cfg.threads = cli.threads_override;
    if (const char* env = std::getenv("LDESIM_THREADS")) cfg.threads = std::atoi(env);
    if (cli.tolerance_override > 0.0) cfg.tolerance = cli.tolerance_override;
    if (!cli.mode_override.empty()) {
        if (cli.mode_override == "eom_voll") cfg.mode = RunMode::EomVoll;
        else if (cli.mode_override == "eom_pc") cfg.mode = RunMode::EomPc;
        else if (cli.mode_override == "e_plus_cm") cfg.mode = RunMode::EPlusCm;
        else if (cli.mode_override == "dispatch_fixed_mix") cfg.mode = RunMode::DispatchFixedMix;
        else throw std::runtime_error("unknown --mode '" + cli.mode_override + "'");
    }
}

Loaded load_inputs(const Cli& cli, bool need_scenarios = true) {
    Loaded l;
    l.config = io::load_config(cli.config_path);
    apply_overrides(l.config, cli);
    if (need_scenarios) {
        if (l.config.scenario_file.empty())
            throw std::runtime_error("config: 'scenarios' path is required");
        l.scenarios = io::read_scenario_csv(l.config.scenario_file, l.config.horizon_hours,
                                            l.config.scenario_weights);
    }
    if (l.config.catalog_file.empty()) throw std::runtime_error("config: 'catalog' path is required");
    l.catalog = io::read_catalog_json(l.config.catalog_file);
    return l;
}

SuiteParams suite_params(const Loaded& l) {
    SuiteParams p;
    p.voll = l.config.voll;
    p.price_cap = l.config.price_cap;
    p.emission_cap = l.config.emission_cap(l.scenarios);
    p.accreditation = l.config.accreditation;
    p.accreditation.threads = l.config.threads;
    p.curve_segments = l.config.curve_segments;
    p.solver.tolerance = l.config.tolerance;
    p.accreditation.solver = p.solver;
    return p;
}

MarketDesign single_run_design(const Loaded& l) {
    MarketDesign d;
    d.run_mode = l.config.mode;
    d.voll = l.config.voll;
    d.price_cap = l.config.price_cap;
    d.emission_cap = l.config.emission_cap(l.scenarios);
    if (l.config.mode == RunMode::DispatchFixedMix) {
        if (!l.config.fixed_capacities)
            throw std::runtime_error("dispatch_fixed_mix needs design.fixed_capacities in the config");
        d.fixed_capacities = l.config.fixed_capacities->resolve(l.catalog);
    }
    if (l.config.mode == RunMode::EPlusCm) {
        if (!l.config.cm_capacity_target_mw || !l.config.cm_net_cone)
            throw std::runtime_error(
                "e_plus_cm needs design.cm.capacity_target_mw and design.cm.net_cone in the config "
                "(or use the 'suite' subcommand, which calibrates them)");
        d.capacity_demand_curve =
            build_cm_demand_curve(*l.config.cm_capacity_target_mw, *l.config.cm_net_cone);
    }
    return d;
}

int cmd_synth(const Cli& cli) {
    auto cfg = io::load_config(cli.config_path);
    apply_overrides(cfg, cli);
    const auto set = generate_synthetic_scenarios(cfg.synth);
    const fs::path target =
        cfg.scenario_file.empty() ? cfg.output_dir / "scenarios.csv" : cfg.scenario_file;
    io::write_scenario_csv(set, target);
    std::cout << "wrote " << target.string() << " (" << set.scenarios.size() << " scenarios x "
              << set.scenarios.front().num_intervals() << " intervals, peak "
              << set.peak_fixed_demand() << " MW)\n";
    return kExitOk;
}

int cmd_validate(const Cli& cli) {
    auto l = load_inputs(cli);
    MarketDesign d;
    d.run_mode = l.config.mode;
    d.voll = l.config.voll;
    d.price_cap = l.config.price_cap;
    d.emission_cap = l.config.emission_cap(l.scenarios);
    if (l.config.fixed_capacities && l.config.mode == RunMode::DispatchFixedMix)
        d.fixed_capacities = l.config.fixed_capacities->resolve(l.catalog);
    const auto report = validate_inputs(l.scenarios, l.catalog, d);
    if (!report.pass()) {
        std::cerr << report.to_string();
        io::write_error_json(l.config.output_dir, kExitInvariant, "validate", report.to_string());
        return kExitInvariant;
    }
    std::cout << "inputs valid: " << l.scenarios.scenarios.size() << " scenarios, "
              << l.catalog.generators.size() << " generators, " << l.catalog.storages.size()
              << " storages\n";
    return kExitOk;
}

SuiteRun as_suite_run(const std::string& name, EquilibriumSolution sol, const ScenarioSet& scenarios,
                      const TechnologyCatalog& catalog, const qp::SolveOptions& solver) {
    SuiteRun run;
    run.name = name;
    run.solution = std::move(sol);
    if (run.solution.demand_mode == DemandMode::Capped && run.solution.price_cap < run.solution.voll)
        run.welfare = redispatch_true_wtp(run.solution, scenarios, catalog, solver);
    else {
        run.welfare.as_dispatched = true_welfare(run.solution, scenarios, catalog);
        run.welfare.perfect_rationing = run.welfare.as_dispatched;
    }
    run.metrics = price_and_cost_metrics(run.solution, scenarios);
    run.unserved = unserved_energy(run.solution, scenarios, /*allow_uncapped=*/true);
    return run;
}

int cmd_solve(const Cli& cli) {
    auto l = load_inputs(cli);
    const auto design = single_run_design(l);
    const auto report = validate_inputs(l.scenarios, l.catalog, design);
    if (!report.pass()) {
        std::cerr << report.to_string();
        io::write_error_json(l.config.output_dir, kExitInvariant, "validate", report.to_string());
        return kExitInvariant;
    }
    qp::SolveOptions solver;
    solver.tolerance = l.config.tolerance;
    auto sol = solve_equilibrium(assemble(l.scenarios, l.catalog, design), solver);
    if (!sol.optimal()) {
        const std::string msg = std::string("solver status ") + qp::to_string(sol.status);
        std::cerr << msg << "\n";
        io::write_error_json(l.config.output_dir, kExitSolver, "solve", msg);
        return kExitSolver;
    }
    const std::string name = to_string(design.run_mode);
    auto run = as_suite_run(name, std::move(sol), l.scenarios, l.catalog, solver);
    io::export_run(run, l.scenarios, l.catalog, l.config.output_dir / name);
    std::cout << name << ": objective " << run.solution.objective << ", eue " << run.unserved.eue
              << " MWh, kkt " << run.solution.kkt_residual << "\n";
    return kExitOk;
}

FixedCapacities benchmark_mix_for(const Loaded& l, const SuiteParams& params) {
    if (l.config.fixed_capacities) return l.config.fixed_capacities->resolve(l.catalog);
    MarketDesign d;
    d.run_mode = RunMode::EomVoll;
    d.voll = params.voll;
    d.price_cap = params.price_cap;
    d.emission_cap = params.emission_cap;
    auto sol = solve_equilibrium(assemble(l.scenarios, l.catalog, d), params.solver);
    if (!sol.optimal())
        throw std::runtime_error(std::string("benchmark solve failed: ") + qp::to_string(sol.status));
    FixedCapacities mix;
    mix.generator_mw = sol.gen_capacity;
    mix.storage_power_mw = sol.storage_power;
    mix.storage_energy_mwh = sol.storage_energy;
    return mix;
}

int cmd_accredit(const Cli& cli) {
    auto l = load_inputs(cli);
    const auto params = suite_params(l);
    const auto mix = benchmark_mix_for(l, params);
    auto acc = accredit(mix, l.scenarios, l.catalog, params.voll, params.price_cap,
                        params.emission_cap, params.accreditation);
    io::write_credits_csv(acc, l.config.output_dir / "credits.csv");
    if (!acc.scarcity) {
        std::cerr << acc.diagnostic << "\n";
        io::write_error_json(l.config.output_dir, kExitInvariant, "accredit", acc.diagnostic);
        return kExitInvariant;
    }
    std::vector<StorageCurveFit> fits;
    for (const auto& spec : l.catalog.storages) {
        auto pts = acc.storage_points(spec.name);
        if (pts.size() < 2) continue;
        StorageCurveFit f;
        f.storage = spec.name;
        f.fit = fit_credit_curve(
            pts, std::max(1, std::min(l.config.curve_segments, static_cast<int>(pts.size()) - 1)));
        fits.push_back(std::move(f));
    }
    io::write_credit_curve_csv(fits, l.config.output_dir / "credit_curve.csv");
    std::cout << "accredited " << acc.estimates.size() << " resources (EUE_0 " << acc.eue_0
              << " MWh)\n";
    return kExitOk;
}

int cmd_calibrate_or_suite(const Cli& cli, bool full_suite, bool with_sweep) {
    auto l = load_inputs(cli);
    const auto params = suite_params(l);
    auto suite = run_suite(l.scenarios, l.catalog, params);

    const fs::path out = l.config.output_dir;
    io::write_credits_csv(suite.accreditation, out / "credits.csv");
    io::write_credit_curve_csv(suite.curve_fits, out / "credit_curve.csv");
    io::write_calibration_csv(suite.net_cones, suite.credited_catalog, suite.benchmark_mix,
                              out / "calibration.csv");
    if (suite.cm_curve) io::write_cm_curve_csv(*suite.cm_curve, out / "cm_curve.csv");
    if (!suite.note.empty()) std::cout << "note: " << suite.note << "\n";

    if (full_suite) {
        for (const SuiteRun* run :
             {&suite.eom_voll, &suite.eom_pc_opt_mix, &suite.e_plus_cm, &suite.eom_pc})
            io::export_run(*run, l.scenarios, suite.credited_catalog, out / run->name);
        io::write_suite_summary_csv(suite, l.scenarios, out / "suite_summary.csv");
        std::cout << "suite complete: welfare(EOM_VOLL) "
                  << suite.eom_voll.welfare.as_dispatched.welfare << ", lambda_cm "
                  << suite.e_plus_cm.solution.lambda_cm << ", CT " << suite.capacity_target_mw
                  << " MW\n";
    } else {
        std::cout << "calibration complete: net-CONE(ref) " << suite.net_cones.net_cone_ref
                  << " $/MW-yr, CT " << suite.capacity_target_mw << " MW\n";
    }
    if (with_sweep) {
        if (!suite.cm_active)
            throw std::runtime_error("sweep needs an active capacity market (reference has no "
                                     "missing money on this case)");
        auto rows = credit_sensitivity_sweep(l.scenarios, suite, params, l.config.sweep_factors);
        io::write_sweep_csv(rows, out / "sweep.csv");
        std::cout << "sweep complete: " << rows.size() << " factors\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale electricity market equilibrium simulator with long-duration storage "
                 "and capacity-market accreditation"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config,-c", cli.config_path, "Path to the run configuration (JSON)")
        ->required();
    app.add_option("--out,-o", cli.out_override, "Override the output directory");
    app.add_option("--mode,-m", cli.mode_override,
                   "Run mode for 'solve': eom_voll|eom_pc|e_plus_cm|dispatch_fixed_mix");
    auto* seed_opt = app.add_option("--seed,-s", cli.seed_override, "Override the RNG seed");
    app.add_option("--threads,-t", cli.threads_override, "Worker threads (0 = hardware)");
    app.add_option("--tolerance", cli.tolerance_override, "Solver KKT tolerance");

    app.add_subcommand("synth", "Generate synthetic scenario data");
    app.add_subcommand("validate", "Check inputs against the domain invariants");
    app.add_subcommand("solve", "Solve a single market run and export its artifacts");
    app.add_subcommand("accredit", "Marginal capacity credits for the benchmark mix");
    app.add_subcommand("calibrate", "Net-CONE, capacity target and CM demand curve");
    app.add_subcommand("suite", "Full pipeline: benchmark, accreditation, calibration, all runs");
    app.add_subcommand("sweep", "Suite plus the storage-credit scaling sensitivity");

    CLI11_PARSE(app, argc, argv);
    cli.has_seed = seed_opt->count() > 0;

    const std::string sub = app.get_subcommands().front()->get_name();
    std::filesystem::path errdir = cli.out_override.empty() ? "out" : cli.out_override;
    try {
        if (sub == "synth") return cmd_synth(cli);
        if (sub == "validate") return cmd_validate(cli);
        if (sub == "solve") return cmd_solve(cli);
        if (sub == "accredit") return cmd_accredit(cli);
        if (sub == "calibrate") return cmd_calibrate_or_suite(cli, false, false);
        if (sub == "suite") return cmd_calibrate_or_suite(cli, true, false);
        if (sub == "sweep") return cmd_calibrate_or_suite(cli, true, true);
        std::cerr << "unknown subcommand\n";
        return kExitConfig;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "invariant violation: " << ex.what() << "\n";
        io::write_error_json(errdir, kExitInvariant, sub, ex.what());
        return kExitInvariant;
    } catch (const std::runtime_error& ex) {
        const std::string what = ex.what();
        const bool solver_issue = what.find("solve") != std::string::npos ||
                                  what.find("NOT_CONVERGED") != std::string::npos ||
                                  what.find("INFEASIBLE") != std::string::npos ||
                                  what.find("UNBOUNDED") != std::string::npos;
        std::cerr << (solver_issue ? "solver failure: " : "config error: ") << what << "\n";
        const int code = solver_issue ? kExitSolver : kExitConfig;
        io::write_error_json(errdir, code, sub, what);
        return code;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        io::write_error_json(errdir, kExitConfig, sub, ex.what());
        return kExitConfig;
    }
}
