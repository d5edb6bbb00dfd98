#include "ldesim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldesim {

namespace {

constexpr double kInstalledTol = 1e-6;  // MW

// Efficient rationing: the served energy goes to the highest-WTP
// customers, so the benefit is the integral of the true demand curve up
// to the served quantity.
double true_benefit(double served, double d_fix, double d_flex, double voll) {
    const double x = std::min(served, d_fix + d_flex);
    if (x <= d_fix || d_flex <= 0.0) return voll * x;
    const double y = x - d_fix;
    return voll * d_fix + voll * (y - y * y / (2.0 * d_flex));
}

double run_variable_cost(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                         const TechnologyCatalog& catalog) {
    double cost = 0.0;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
            for (std::size_t g = 0; g < catalog.generators.size(); ++g)
                cost += wd * catalog.generators[g].variable_cost * d.generation[g][static_cast<std::size_t>(t)];
            for (std::size_t s = 0; s < catalog.storages.size(); ++s)
                cost += wd * (catalog.storages[s].variable_cost * d.discharge[s][static_cast<std::size_t>(t)] +
                              charge_tie_break_cost(t, sc.num_intervals()) *
                                  d.charge[s][static_cast<std::size_t>(t)]);
        }
    }
    return cost;
}

FixedCapacities capacities_of(const EquilibriumSolution& sol) {
    FixedCapacities mix;
    mix.generator_mw = sol.gen_capacity;
    mix.storage_power_mw = sol.storage_power;
    mix.storage_energy_mwh = sol.storage_energy;
    return mix;
}

void require_optimal(const EquilibriumSolution& sol, const std::string& run_name) {
    if (!sol.optimal())
        throw std::runtime_error("run '" + run_name +
                                 "' failed: " + std::string(qp::to_string(sol.status)) +
                                 " (kkt residual " + std::to_string(sol.kkt_residual) + ")");
}

} // namespace

WelfareReport true_welfare(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                           const TechnologyCatalog& catalog) {
    WelfareReport rep;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
            const double served =
                d.served_fixed[static_cast<std::size_t>(t)] + d.served_flexible[static_cast<std::size_t>(t)];
            rep.consumer_benefit += wd * true_benefit(served, sc.fixed_demand[static_cast<std::size_t>(t)],
                                                      sc.flexible_demand[static_cast<std::size_t>(t)], sol.voll);
        }
    }
    for (std::size_t g = 0; g < catalog.generators.size(); ++g)
        rep.investment_cost += sol.gen_capacity[g] * catalog.generators[g].annual_cost_per_mw();
    for (std::size_t s = 0; s < catalog.storages.size(); ++s)
        rep.investment_cost += sol.storage_power[s] * catalog.storages[s].annual_cost_per_mw() +
                               sol.storage_energy[s] * catalog.storages[s].annual_cost_per_mwh();
    rep.variable_cost = run_variable_cost(sol, scenarios, catalog);
    rep.total_cost = rep.investment_cost + rep.variable_cost;
    rep.welfare = rep.consumer_benefit - rep.total_cost;
    return rep;
}

WelfarePair redispatch_true_wtp(const EquilibriumSolution& run, const ScenarioSet& scenarios,
                                const TechnologyCatalog& catalog, const qp::SolveOptions& options) {
    WelfarePair pair;
    pair.as_dispatched = true_welfare(run, scenarios, catalog);

    // fix generation and charging, restore the true WTP, free discharge.
    // With generation pinned the emissions are already decided; keeping the
    // cap row would only re-test the original solution's tolerance noise.
    MarketDesign design;
    design.run_mode = RunMode::DispatchFixedMix;
    design.fixed_mix_demand = DemandMode::Uncapped;
    design.voll = run.voll;
    design.price_cap = run.voll;  // ceiling back at VOLL
    design.emission_cap = std::numeric_limits<double>::infinity();
    design.fixed_capacities = capacities_of(run);

    DispatchPins pins;
    const int n_gen = static_cast<int>(run.gen_capacity.size());
    const int n_sto = static_cast<int>(run.storage_power.size());
    pins.generation.resize(static_cast<std::size_t>(n_gen));
    for (int g = 0; g < n_gen; ++g) {
        pins.generation[static_cast<std::size_t>(g)].resize(run.dispatch.size());
        for (std::size_t w = 0; w < run.dispatch.size(); ++w)
            pins.generation[static_cast<std::size_t>(g)][w] = run.dispatch[w].generation[static_cast<std::size_t>(g)];
    }
    pins.storage_charge.resize(static_cast<std::size_t>(n_sto));
    pins.storage_initial.assign(static_cast<std::size_t>(n_sto), 0.0);
    for (int s = 0; s < n_sto; ++s) {
        pins.storage_charge[static_cast<std::size_t>(s)].resize(run.dispatch.size());
        for (std::size_t w = 0; w < run.dispatch.size(); ++w)
            pins.storage_charge[static_cast<std::size_t>(s)][w] = run.dispatch[w].charge[static_cast<std::size_t>(s)];
        pins.storage_initial[static_cast<std::size_t>(s)] = run.storage_initial[static_cast<std::size_t>(s)];
    }

    auto redispatched = solve_equilibrium(assemble(scenarios, catalog, design, pins), options);
    require_optimal(redispatched, "true-WTP redispatch");
    pair.perfect_rationing = true_welfare(redispatched, scenarios, catalog);
    return pair;
}

BookValueSeries book_value(const EquilibriumSolution& sol, const TechnologyCatalog& catalog,
                           int scenario, int storage, int max_iterations) {
    const auto& spec = catalog.storages.at(static_cast<std::size_t>(storage));
    const auto& d = sol.dispatch.at(static_cast<std::size_t>(scenario));
    const int T = static_cast<int>(d.price.size());
    const double eta_dis = spec.discharge_efficiency;
    const double soc_eps =
        1e-9 * std::max(1.0, sol.storage_energy[static_cast<std::size_t>(storage)]);

    BookValueSeries series;
    series.phi.assign(static_cast<std::size_t>(T), 0.0);
    double phi0 = 0.0;
    const auto& hours = sol.interval_hours.at(static_cast<std::size_t>(scenario));

    for (int it = 0; it < max_iterations; ++it) {
        double phi = phi0;
        double e_prev = sol.storage_initial[static_cast<std::size_t>(storage)];
        for (int t = 0; t < T; ++t) {
            const double w = hours[static_cast<std::size_t>(t)];
            const double e_t = d.soc[static_cast<std::size_t>(storage)][static_cast<std::size_t>(t)];
            const double after_dis =
                std::max(0.0, e_prev - w * d.discharge[static_cast<std::size_t>(storage)][static_cast<std::size_t>(t)] / eta_dis);
            const double money = phi * after_dis +
                                 d.price[static_cast<std::size_t>(t)] * w *
                                     d.charge[static_cast<std::size_t>(storage)][static_cast<std::size_t>(t)];
            if (e_t > soc_eps)
                phi = std::max(0.0, money / e_t);
            // else: carry phi forward unchanged
            series.phi[static_cast<std::size_t>(t)] = phi;
            e_prev = e_t;
        }
        series.iterations = it + 1;
        const double phi_T = series.phi.empty() ? phi0 : series.phi.back();
        series.residual = std::abs(phi0 - phi_T) / std::max(1.0, phi_T);
        if (series.residual <= 1e-6) {
            series.converged = true;
            series.phi_initial = phi0;
            return series;
        }
        phi0 = phi_T;
    }
    series.phi_initial = phi0;
    return series;
}

std::vector<double> storage_net_revenue(const EquilibriumSolution& sol,
                                        const TechnologyCatalog& catalog, int scenario, int storage,
                                        const BookValueSeries& book) {
    if (!book.converged)
        throw std::invalid_argument("storage_net_revenue: book value did not converge");
    const auto& spec = catalog.storages.at(static_cast<std::size_t>(storage));
    const auto& d = sol.dispatch.at(static_cast<std::size_t>(scenario));
    const int T = static_cast<int>(d.price.size());
    std::vector<double> pi(static_cast<std::size_t>(T), 0.0);
    for (int t = 0; t < T; ++t) {
        const double phi_prev = t == 0 ? book.phi_initial : book.phi[static_cast<std::size_t>(t) - 1];
        pi[static_cast<std::size_t>(t)] =
            d.discharge[static_cast<std::size_t>(storage)][static_cast<std::size_t>(t)] *
            (d.price[static_cast<std::size_t>(t)] - phi_prev / spec.discharge_efficiency);
    }
    return pi;
}

std::vector<MissingMoneyRow> missing_money_split(const EquilibriumSolution& sol,
                                                 const ScenarioSet& scenarios,
                                                 const TechnologyCatalog& catalog) {
    std::vector<MissingMoneyRow> rows;
    const double cap_threshold = sol.price_cap * (1.0 - 1e-3);
    for (std::size_t g = 0; g < catalog.generators.size(); ++g) {
        const auto& spec = catalog.generators[g];
        const double c = sol.gen_capacity[g];
        if (c <= kInstalledTol) continue;
        MissingMoneyRow row;
        row.technology = spec.name;
        row.annualized_cost = c * spec.annual_cost_per_mw();
        row.cm_revenue = sol.cm_generator.empty() ? 0.0 : sol.cm_generator[g] * sol.lambda_cm;
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
            const auto& sc = scenarios.scenarios[w];
            const auto& d = sol.dispatch[w];
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
                const double margin = (d.price[static_cast<std::size_t>(t)] - spec.variable_cost -
                                       sol.lambda_ct * spec.emission_factor) *
                                      d.generation[g][static_cast<std::size_t>(t)];
                if (d.price[static_cast<std::size_t>(t)] >= cap_threshold)
                    row.revenue_at_or_above_pc += wd * margin;
                else
                    row.revenue_below_pc += wd * margin;
            }
        }
        row.recovery_fraction =
            row.annualized_cost > 0 ? (row.revenue_below_pc + row.revenue_at_or_above_pc) / row.annualized_cost
                                    : 0.0;
        rows.push_back(std::move(row));
    }
    for (std::size_t s = 0; s < catalog.storages.size(); ++s) {
        const auto& spec = catalog.storages[s];
        const double cp = sol.storage_power[s];
        if (cp <= kInstalledTol) continue;
        MissingMoneyRow row;
        row.technology = spec.name;
        row.annualized_cost = cp * spec.annual_cost_per_mw() + sol.storage_energy[s] * spec.annual_cost_per_mwh();
        row.cm_revenue = sol.cm_storage.empty() ? 0.0 : sol.cm_storage[s] * sol.lambda_cm;
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
            const auto& sc = scenarios.scenarios[w];
            const auto& d = sol.dispatch[w];
            const auto book = book_value(sol, catalog, static_cast<int>(w), static_cast<int>(s));
            const auto pi = storage_net_revenue(sol, catalog, static_cast<int>(w), static_cast<int>(s), book);
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
                const double value = pi[static_cast<std::size_t>(t)] -
                                     spec.variable_cost * d.discharge[s][static_cast<std::size_t>(t)] -
                                     charge_tie_break_cost(t, sc.num_intervals()) *
                                         d.charge[s][static_cast<std::size_t>(t)];
                if (d.price[static_cast<std::size_t>(t)] >= cap_threshold)
                    row.revenue_at_or_above_pc += wd * value;
                else
                    row.revenue_below_pc += wd * value;
            }
        }
        row.recovery_fraction =
            row.annualized_cost > 0 ? (row.revenue_below_pc + row.revenue_at_or_above_pc) / row.annualized_cost
                                    : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

RunMetrics price_and_cost_metrics(const EquilibriumSolution& sol, const ScenarioSet& scenarios) {
    RunMetrics m;
    double served_price_sum = 0.0, hours_price_sum = 0.0, hours_sum = 0.0;
    std::vector<double> scenario_avg(scenarios.scenarios.size(), 0.0);
    double hourly_mean = 0.0, hourly_m2 = 0.0;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        double sc_price = 0.0, sc_served = 0.0;
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double wt = sc.weight_hours[static_cast<std::size_t>(t)];
            const double wd = sc.probability_weight * wt;
            const double served =
                d.served_fixed[static_cast<std::size_t>(t)] + d.served_flexible[static_cast<std::size_t>(t)];
            const double price = d.price[static_cast<std::size_t>(t)];
            m.expected_served_mwh += wd * served;
            served_price_sum += wd * served * price;
            hours_price_sum += wd * price;
            hours_sum += wd;
            sc_price += wt * served * price;
            sc_served += wt * served;
        }
        scenario_avg[w] = sc_served > 0 ? sc_price / sc_served : 0.0;
    }
    m.mu_price_served = m.expected_served_mwh > 0 ? served_price_sum / m.expected_served_mwh : 0.0;
    m.mu_price_hours = hours_sum > 0 ? hours_price_sum / hours_sum : 0.0;
    m.consumer_energy_cost = served_price_sum;
    m.consumer_capacity_cost = sol.lambda_cm * sol.cm_demand;

    // CV over per-scenario annual average prices (probability-weighted)
    {
        double mean = 0.0;
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w)
            mean += scenarios.scenarios[w].probability_weight * scenario_avg[w];
        double var = 0.0;
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w)
            var += scenarios.scenarios[w].probability_weight * (scenario_avg[w] - mean) * (scenario_avg[w] - mean);
        m.sigma_cv_annual = mean > 1e-12 ? std::sqrt(std::max(0.0, var)) / mean : 0.0;
    }
    // CV over interval prices, duration-weighted (diagnostic variant)
    {
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
            const auto& sc = scenarios.scenarios[w];
            const auto& d = sol.dispatch[w];
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
                hourly_mean += wd * d.price[static_cast<std::size_t>(t)];
            }
        }
        hourly_mean = hours_sum > 0 ? hourly_mean / hours_sum : 0.0;
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
            const auto& sc = scenarios.scenarios[w];
            const auto& d = sol.dispatch[w];
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wd = sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)];
                const double e = d.price[static_cast<std::size_t>(t)] - hourly_mean;
                hourly_m2 += wd * e * e;
            }
        }
        m.sigma_cv_hourly =
            hourly_mean > 1e-12 && hours_sum > 0 ? std::sqrt(hourly_m2 / hours_sum) / hourly_mean : 0.0;
    }
    if (m.expected_served_mwh > 0) {
        m.kappa_ccc = m.consumer_capacity_cost / m.expected_served_mwh;
        if (sol.lambda_ct > 1e-12 && std::isfinite(sol.emission_cap))
            m.beta_eb = sol.lambda_ct * sol.emission_cap / m.expected_served_mwh;
    }
    return m;
}

std::vector<StorageAnnualRevenue> annual_net_revenue_distribution(
    const EquilibriumSolution& sol, const ScenarioSet& scenarios, const TechnologyCatalog& catalog) {
    std::vector<StorageAnnualRevenue> out;
    for (std::size_t s = 0; s < catalog.storages.size(); ++s) {
        const auto& spec = catalog.storages[s];
        if (sol.storage_power[s] <= kInstalledTol) continue;
        const double cm_rev = sol.cm_storage.empty() ? 0.0 : sol.cm_storage[s] * sol.lambda_cm;
        const double cost = sol.storage_power[s] * spec.annual_cost_per_mw() +
                            sol.storage_energy[s] * spec.annual_cost_per_mwh();
        for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
            const auto& sc = scenarios.scenarios[w];
            const auto& d = sol.dispatch[w];
            StorageAnnualRevenue rec;
            rec.storage = spec.name;
            rec.scenario = sc.id;
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wt = sc.weight_hours[static_cast<std::size_t>(t)];
                rec.energy_margin += wt * (d.price[static_cast<std::size_t>(t)] *
                                               (d.discharge[s][static_cast<std::size_t>(t)] -
                                                d.charge[s][static_cast<std::size_t>(t)]) -
                                           spec.variable_cost * d.discharge[s][static_cast<std::size_t>(t)] -
                                           charge_tie_break_cost(t, sc.num_intervals()) *
                                               d.charge[s][static_cast<std::size_t>(t)]);
            }
            rec.cm_revenue = cm_rev;
            rec.annualized_cost = cost;
            rec.net = rec.energy_margin + rec.cm_revenue - rec.annualized_cost;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

namespace {

SuiteRun make_suite_run(std::string name, EquilibriumSolution sol, const ScenarioSet& scenarios,
                        const TechnologyCatalog& catalog, const qp::SolveOptions& solver) {
    SuiteRun run;
    run.name = std::move(name);
    run.solution = std::move(sol);
    if (run.solution.demand_mode == DemandMode::Capped &&
        run.solution.price_cap < run.solution.voll) {
        try {
            run.welfare = redispatch_true_wtp(run.solution, scenarios, catalog, solver);
        } catch (const std::exception& ex) {
            throw std::runtime_error(run.name + ": " + ex.what());
        }
    } else {
        run.welfare.as_dispatched = true_welfare(run.solution, scenarios, catalog);
        run.welfare.perfect_rationing = run.welfare.as_dispatched;
    }
    run.metrics = price_and_cost_metrics(run.solution, scenarios);
    run.unserved = unserved_energy(run.solution, scenarios, /*allow_uncapped=*/true);
    return run;
}

} // namespace

RunSuiteResult run_suite(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                         const SuiteParams& params) {
    RunSuiteResult out;

    MarketDesign voll_design;
    voll_design.run_mode = RunMode::EomVoll;
    voll_design.voll = params.voll;
    voll_design.price_cap = params.price_cap;
    voll_design.emission_cap = params.emission_cap;
    {
        const auto report = validate_inputs(scenarios, catalog, voll_design);
        if (!report.pass())
            throw std::invalid_argument("run_suite: invalid inputs:\n" + report.to_string());
    }

    auto bench = solve_equilibrium(assemble(scenarios, catalog, voll_design), params.solver);
    require_optimal(bench, "EOM_VOLL");
    out.benchmark_mix = capacities_of(bench);
    out.eom_voll = make_suite_run("EOM_VOLL", std::move(bench), scenarios, catalog, params.solver);

    MarketDesign opt_mix_design;
    opt_mix_design.run_mode = RunMode::DispatchFixedMix;
    opt_mix_design.fixed_mix_demand = DemandMode::Capped;
    opt_mix_design.voll = params.voll;
    opt_mix_design.price_cap = params.price_cap;
    opt_mix_design.emission_cap = params.emission_cap;
    opt_mix_design.fixed_capacities = out.benchmark_mix;
    auto opt_mix = solve_equilibrium(assemble(scenarios, catalog, opt_mix_design), params.solver);
    require_optimal(opt_mix, "EOM_PC_OPT_MIX");
    out.eom_pc_opt_mix =
        make_suite_run("EOM_PC_OPT_MIX", std::move(opt_mix), scenarios, catalog, params.solver);

    out.net_cones = net_cone(out.benchmark_mix, out.eom_pc_opt_mix.solution, scenarios, catalog);
    out.credited_catalog = catalog;

    bool cm_possible = out.net_cones.status == CalibrationStatus::Ok;
    if (!cm_possible)
        out.note = "reference technology recovers its costs under the cap; capacity market skipped";

    if (cm_possible) {
        AccreditOptions acc = params.accreditation;
        acc.solver = params.solver;
        out.accreditation = accredit(out.benchmark_mix, scenarios, catalog, params.voll,
                                     params.price_cap, params.emission_cap, acc);
        if (!out.accreditation.scarcity) {
            cm_possible = false;
            out.note = "accreditation degenerate: " + out.accreditation.diagnostic;
        }
    }

    if (cm_possible) {
        for (auto& g : out.credited_catalog.generators) {
            const auto* e = out.accreditation.find(g.name);
            if (e != nullptr) g.capacity_credit = std::clamp(e->credit, 0.0, 1.0);
        }
        for (std::size_t s = 0; s < out.credited_catalog.storages.size(); ++s) {
            auto& spec = out.credited_catalog.storages[s];
            auto pts = out.accreditation.storage_points(spec.name);
            if (pts.size() < 2) continue;
            const int segs = std::max(1, std::min(params.curve_segments,
                                                  static_cast<int>(pts.size()) - 1));
            StorageCurveFit scf;
            scf.storage = spec.name;
            scf.fit = fit_credit_curve(pts, segs);
            spec.credit_curve = scf.fit.curve;
            out.curve_fits.push_back(std::move(scf));
        }
        out.capacity_target_mw = capacity_target(out.benchmark_mix, out.credited_catalog);
        if (out.capacity_target_mw > 0.0) {
            out.cm_curve = build_cm_demand_curve(out.capacity_target_mw, out.net_cones.net_cone_ref);
        } else {
            cm_possible = false;
            out.note = "capacity target is zero; capacity market skipped";
        }
    }

    MarketDesign pc_design;
    pc_design.run_mode = RunMode::EomPc;
    pc_design.voll = params.voll;
    pc_design.price_cap = params.price_cap;
    pc_design.emission_cap = params.emission_cap;
    auto pc = solve_equilibrium(assemble(scenarios, out.credited_catalog, pc_design), params.solver);
    require_optimal(pc, "EOM_PC");
    out.eom_pc = make_suite_run("EOM_PC", std::move(pc), scenarios, out.credited_catalog, params.solver);

    if (cm_possible) {
        MarketDesign cm_design = pc_design;
        cm_design.run_mode = RunMode::EPlusCm;
        cm_design.capacity_demand_curve = out.cm_curve;
        auto cm = solve_equilibrium(assemble(scenarios, out.credited_catalog, cm_design), params.solver);
        require_optimal(cm, "E_PLUS_CM");
        out.e_plus_cm =
            make_suite_run("E_PLUS_CM", std::move(cm), scenarios, out.credited_catalog, params.solver);
        out.cm_active = true;
    } else {
        // the capacity market clears at zero; the capped energy-only run
        // doubles as the E+CM leg
        out.e_plus_cm = out.eom_pc;
        out.e_plus_cm.name = "E_PLUS_CM";
        out.e_plus_cm.solution.lambda_cm = 0.0;
        out.cm_active = false;
    }
    return out;
}

std::vector<SweepRow> credit_sensitivity_sweep(const ScenarioSet& scenarios,
                                               const RunSuiteResult& base, const SuiteParams& params,
                                               const std::vector<double>& factors) {
    if (!base.cm_active)
        throw std::invalid_argument("credit_sensitivity_sweep: base suite has no active capacity market");

    auto run_factor = [&](double k) {
        TechnologyCatalog cat = base.credited_catalog;
        for (auto& spec : cat.storages)
            if (spec.credit_curve) spec.credit_curve->scale(k);
        const double ct = capacity_target(base.benchmark_mix, cat);
        if (!(ct > 0.0))
            throw std::runtime_error("credit_sensitivity_sweep: factor " + std::to_string(k) +
                                     " gives a zero capacity target");
        MarketDesign design;
        design.run_mode = RunMode::EPlusCm;
        design.voll = params.voll;
        design.price_cap = params.price_cap;
        design.emission_cap = params.emission_cap;
        design.capacity_demand_curve = build_cm_demand_curve(ct, base.net_cones.net_cone_ref);
        EquilibriumSolution sol;
        try {
            sol = solve_equilibrium(assemble(scenarios, cat, design), params.solver);
            require_optimal(sol, "E_PLUS_CM sweep");
        } catch (const std::exception& ex) {
            throw std::runtime_error("credit_sensitivity_sweep: factor " + std::to_string(k) + ": " +
                                     ex.what());
        }
        SweepRow row;
        row.factor = k;
        row.mu_price = price_and_cost_metrics(sol, scenarios).mu_price_served;
        row.lambda_cm = sol.lambda_cm;
        row.eue = unserved_energy(sol, scenarios).eue;
        row.welfare = redispatch_true_wtp(sol, scenarios, cat, params.solver).perfect_rationing.welfare;
        return row;
    };

    SweepRow base_row = run_factor(1.0);
    std::vector<SweepRow> rows;
    for (double k : factors) {
        SweepRow row = k == 1.0 ? base_row : run_factor(k);
        row.d_mu_price = row.mu_price - base_row.mu_price;
        row.d_lambda_cm = row.lambda_cm - base_row.lambda_cm;
        row.d_welfare = row.welfare - base_row.welfare;
        row.d_eue = row.eue - base_row.eue;
        rows.push_back(row);
    }
    return rows;
}

} // namespace ldesim
