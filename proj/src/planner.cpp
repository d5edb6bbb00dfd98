#include "ldesim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double availability_of(const ScenarioSet& set, const Scenario& sc, const GeneratorSpec& g, int t) {
    if (g.availability_profile_key.empty() || g.availability_profile_key == "firm") return 1.0;
    const int p = set.find_profile(g.availability_profile_key);
    if (p < 0) throw std::invalid_argument("planner: unknown availability profile '" +
                                           g.availability_profile_key + "'");
    return sc.availability[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)];
}

// The stored curve's min-envelope can exceed 1 for long durations; add a
// saturation row in that case so the credited capacity never beats c_P.
bool needs_saturation_row(const CreditCurve& curve) {
    if (curve.segments.empty()) return false;
    const auto& last = curve.segments.back();
    if (last.beta > 1e-12) return true;
    return curve.envelope(last.zeta_hi) > 1.0 + 1e-12;
}

} // namespace

PlannerProgram assemble(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                        const MarketDesign& design) {
    return assemble(scenarios, catalog, design, DispatchPins{});
}

PlannerProgram assemble(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                        const MarketDesign& design, const DispatchPins& pins) {
    PlannerProgram prog;
    prog.design = design;

    const int n_gen = static_cast<int>(catalog.generators.size());
    const int n_sto = static_cast<int>(catalog.storages.size());
    const int n_sc = static_cast<int>(scenarios.scenarios.size());
    if (n_sc == 0) throw std::invalid_argument("planner: empty scenario set");

    const bool has_cm = design.run_mode == RunMode::EPlusCm;
    if (has_cm) {
        if (!design.capacity_demand_curve)
            throw std::invalid_argument("planner: E_PLUS_CM design without a capacity demand curve");
        for (const auto& s : catalog.storages)
            if (!s.credit_curve || s.credit_curve->empty())
                throw std::invalid_argument("planner: E_PLUS_CM requires a credit curve for storage '" +
                                            s.name + "'");
    }
    const bool fixed_mix = design.run_mode == RunMode::DispatchFixedMix;
    if (fixed_mix && !design.fixed_capacities)
        throw std::invalid_argument("planner: DISPATCH_FIXED_MIX design without fixed capacities");
    if (fixed_mix) {
        const auto& f = *design.fixed_capacities;
        if (f.generator_mw.size() != static_cast<std::size_t>(n_gen) ||
            f.storage_power_mw.size() != static_cast<std::size_t>(n_sto) ||
            f.storage_energy_mwh.size() != static_cast<std::size_t>(n_sto))
            throw std::invalid_argument("planner: fixed capacity vectors do not match catalog");
    }

    prog.demand = EnergyDemandCurve::build(scenarios, design.demand_mode(), design.voll,
                                           design.price_cap);

    VarMap& vm = prog.vars;
    vm.n_gen = n_gen;
    vm.n_sto = n_sto;
    vm.has_cm = has_cm;
    vm.n_cm_flex = has_cm ? static_cast<int>(design.capacity_demand_curve->flex.size()) : 0;
    vm.intervals.resize(static_cast<std::size_t>(n_sc));
    vm.scenario_base.resize(static_cast<std::size_t>(n_sc));
    vm.block = n_gen + 3 * n_sto + 2;
    const int stage1 = n_gen + 3 * n_sto + (has_cm ? n_gen + n_sto + 1 + vm.n_cm_flex : 0);
    vm.stage2_base = stage1;
    int offset = 0;
    for (int w = 0; w < n_sc; ++w) {
        vm.intervals[static_cast<std::size_t>(w)] = scenarios.scenarios[static_cast<std::size_t>(w)].num_intervals();
        vm.scenario_base[static_cast<std::size_t>(w)] = offset;
        offset += vm.intervals[static_cast<std::size_t>(w)] * vm.block;
    }
    vm.num_vars = stage1 + offset;

    qp::ConvexQP& p = prog.qp;
    p.resize(vm.num_vars);

    prog.delta.resize(static_cast<std::size_t>(n_sc));
    prog.weight.resize(static_cast<std::size_t>(n_sc));

    // ---- objective and bounds ----
    CsrBuilder quad(vm.num_vars, vm.num_vars);
    for (int g = 0; g < n_gen; ++g)
        p.linear[static_cast<std::size_t>(vm.gen_capacity(g))] =
            -catalog.generators[static_cast<std::size_t>(g)].annual_cost_per_mw();
    for (int s = 0; s < n_sto; ++s) {
        p.linear[static_cast<std::size_t>(vm.sto_power(s))] =
            -catalog.storages[static_cast<std::size_t>(s)].annual_cost_per_mw();
        p.linear[static_cast<std::size_t>(vm.sto_energy(s))] =
            -catalog.storages[static_cast<std::size_t>(s)].annual_cost_per_mwh();
    }
    if (has_cm) {
        const auto& curve = *design.capacity_demand_curve;
        p.linear[static_cast<std::size_t>(vm.cm_demand_fixed())] = curve.fixed_price;
        p.upper[static_cast<std::size_t>(vm.cm_demand_fixed())] = curve.fixed_width;
        for (int n = 0; n < vm.n_cm_flex; ++n) {
            const auto& seg = curve.flex[static_cast<std::size_t>(n)];
            const int j = vm.cm_demand_flex(n);
            p.linear[static_cast<std::size_t>(j)] = seg.price_start;
            p.upper[static_cast<std::size_t>(j)] = seg.width;
            if (seg.width > 0.0 && seg.price_start > seg.price_end)
                quad.add(j, j, -(seg.price_start - seg.price_end) / seg.width);
            if (seg.width <= 0.0) p.upper[static_cast<std::size_t>(j)] = 0.0;
        }
    }
    if (fixed_mix) {
        // Pinned capacities turn the capacity-coupling rows into plain
        // variable bounds (set below); a row q <= c A with c fixed would
        // duplicate the bound and leave a degenerate dual ray.
        const auto& f = *design.fixed_capacities;
        for (int g = 0; g < n_gen; ++g) {
            const int j = vm.gen_capacity(g);
            p.lower[static_cast<std::size_t>(j)] = p.upper[static_cast<std::size_t>(j)] =
                f.generator_mw[static_cast<std::size_t>(g)];
        }
        for (int s = 0; s < n_sto; ++s) {
            p.lower[static_cast<std::size_t>(vm.sto_power(s))] =
                p.upper[static_cast<std::size_t>(vm.sto_power(s))] =
                    f.storage_power_mw[static_cast<std::size_t>(s)];
            p.lower[static_cast<std::size_t>(vm.sto_energy(s))] =
                p.upper[static_cast<std::size_t>(vm.sto_energy(s))] =
                    f.storage_energy_mwh[static_cast<std::size_t>(s)];
        }
        for (int w = 0; w < n_sc; ++w) {
            const auto& sc = scenarios.scenarios[static_cast<std::size_t>(w)];
            for (int t = 0; t < sc.num_intervals(); ++t) {
                for (int g = 0; g < n_gen; ++g) {
                    const double a =
                        availability_of(scenarios, sc, catalog.generators[static_cast<std::size_t>(g)], t);
                    p.upper[static_cast<std::size_t>(vm.gen_q(w, t, g))] =
                        f.generator_mw[static_cast<std::size_t>(g)] * a;
                }
                for (int s = 0; s < n_sto; ++s) {
                    const double cp = f.storage_power_mw[static_cast<std::size_t>(s)];
                    const double ce = f.storage_energy_mwh[static_cast<std::size_t>(s)];
                    p.upper[static_cast<std::size_t>(vm.sto_charge(w, t, s))] =
                        std::min(p.upper[static_cast<std::size_t>(vm.sto_charge(w, t, s))], cp);
                    p.upper[static_cast<std::size_t>(vm.sto_discharge(w, t, s))] = cp;
                    // pinned schedules carry another solve's tolerance
                    // noise, and recursion residuals compound along the
                    // horizon; the band must cover the accumulated drift
                    const double band = pins.empty() ? 0.0 : 1e-4 * std::max(1.0, ce);
                    p.upper[static_cast<std::size_t>(vm.soc(w, t, s))] = ce + band;
                    p.lower[static_cast<std::size_t>(vm.soc(w, t, s))] = -band;
                }
            }
        }
    }
    if (!pins.storage_initial.empty()) {
        for (int s = 0; s < n_sto; ++s) {
            const double v = pins.storage_initial[static_cast<std::size_t>(s)];
            if (!std::isnan(v)) {
                p.lower[static_cast<std::size_t>(vm.sto_initial(s))] = std::max(0.0, v);
                p.upper[static_cast<std::size_t>(vm.sto_initial(s))] = std::max(0.0, v);
            }
        }
    }

    const double B = prog.demand.wtp_ceiling;
    for (int w = 0; w < n_sc; ++w) {
        const auto& sc = scenarios.scenarios[static_cast<std::size_t>(w)];
        prog.delta[static_cast<std::size_t>(w)] = sc.probability_weight;
        prog.weight[static_cast<std::size_t>(w)] = sc.weight_hours;
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double wd = sc.weight_hours[static_cast<std::size_t>(t)] * sc.probability_weight;
            const double wfix = prog.demand.fixed_width[static_cast<std::size_t>(w)][static_cast<std::size_t>(t)];
            const double wflex = prog.demand.flexible_width[static_cast<std::size_t>(w)][static_cast<std::size_t>(t)];
            const int jfix = vm.served_fixed(w, t);
            const int jflex = vm.served_flexible(w, t);
            p.linear[static_cast<std::size_t>(jfix)] = wd * B;
            p.upper[static_cast<std::size_t>(jfix)] = wfix;
            p.linear[static_cast<std::size_t>(jflex)] = wd * B;
            p.upper[static_cast<std::size_t>(jflex)] = wflex;
            if (wflex > 0.0)
                quad.add(jflex, jflex, -wd * B / wflex);
            else
                p.upper[static_cast<std::size_t>(jflex)] = 0.0;
            for (int g = 0; g < n_gen; ++g)
                p.linear[static_cast<std::size_t>(vm.gen_q(w, t, g))] =
                    -wd * catalog.generators[static_cast<std::size_t>(g)].variable_cost;
            for (int s = 0; s < n_sto; ++s) {
                p.linear[static_cast<std::size_t>(vm.sto_discharge(w, t, s))] =
                    -wd * catalog.storages[static_cast<std::size_t>(s)].variable_cost;
                p.linear[static_cast<std::size_t>(vm.sto_charge(w, t, s))] =
                    -wd * charge_tie_break_cost(t, sc.num_intervals());
            }
        }
    }

    // Dispatch pins. Pinned values come from another solve and carry its
    // tolerance noise; clamping into the variable's box keeps the program
    // feasible (a noise-level charge on a zero-capacity storage would
    // otherwise accumulate energy that can never leave).
    auto pin_family = [&](const std::vector<std::vector<std::vector<double>>>& fam, int count,
                          auto&& index) {
        if (fam.empty()) return;
        if (fam.size() != static_cast<std::size_t>(count))
            throw std::invalid_argument("planner: pin family size does not match catalog");
        for (int k = 0; k < count; ++k) {
            if (fam[static_cast<std::size_t>(k)].empty()) continue;
            for (int w = 0; w < n_sc; ++w) {
                const auto& series = fam[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)];
                for (int t = 0; t < vm.intervals[static_cast<std::size_t>(w)]; ++t) {
                    const double v = series[static_cast<std::size_t>(t)];
                    if (std::isnan(v)) continue;
                    const int j = index(w, t, k);
                    const double pinned =
                        std::clamp(v, p.lower[static_cast<std::size_t>(j)], p.upper[static_cast<std::size_t>(j)]);
                    p.lower[static_cast<std::size_t>(j)] = pinned;
                    p.upper[static_cast<std::size_t>(j)] = pinned;
                }
            }
        }
    };
    pin_family(pins.generation, n_gen, [&](int w, int t, int g) { return vm.gen_q(w, t, g); });
    pin_family(pins.storage_charge, n_sto, [&](int w, int t, int s) { return vm.sto_charge(w, t, s); });
    pin_family(pins.storage_discharge, n_sto,
               [&](int w, int t, int s) { return vm.sto_discharge(w, t, s); });

    p.quad = quad.build();

    // ---- rows ----
    // Fixed-mix runs carry the capacity limits as variable bounds, so only
    // the SOC recursion and balance rows remain per interval.
    const int per_interval_rows = fixed_mix ? n_sto + 1 : n_gen + 4 * n_sto + 1;
    int n_rows = 0;
    for (int w = 0; w < n_sc; ++w) {
        const int T = vm.intervals[static_cast<std::size_t>(w)];
        n_rows += T * per_interval_rows;
        n_rows += n_sto;  // end of horizon
    }
    n_rows += 1;  // emissions
    if (has_cm) {
        n_rows += n_gen + 1;
        for (const auto& s : catalog.storages)
            n_rows += static_cast<int>(s.credit_curve->segments.size()) +
                      (needs_saturation_row(*s.credit_curve) ? 1 : 0);
    }
    CsrBuilder rows(n_rows, vm.num_vars);
    p.sense.assign(static_cast<std::size_t>(n_rows), qp::RowSense::LessEqual);
    p.rhs.assign(static_cast<std::size_t>(n_rows), 0.0);
    prog.rows.assign(static_cast<std::size_t>(n_rows), RowLabel{RowKind::EnergyBalance});
    int r = 0;
    auto start_row = [&](RowKind kind, qp::RowSense sense, double rhs, int w = -1, int t = -1,
                         int tech = -1, int seg = -1) {
        p.sense[static_cast<std::size_t>(r)] = sense;
        p.rhs[static_cast<std::size_t>(r)] = rhs;
        prog.rows[static_cast<std::size_t>(r)] = RowLabel{kind, w, t, tech, seg};
        return r++;
    };

    for (int w = 0; w < n_sc; ++w) {
        const auto& sc = scenarios.scenarios[static_cast<std::size_t>(w)];
        const int T = sc.num_intervals();
        for (int t = 0; t < T; ++t) {
            const double wt = sc.weight_hours[static_cast<std::size_t>(t)];
            if (!fixed_mix) {
                for (int g = 0; g < n_gen; ++g) {
                    const int row = start_row(RowKind::GenCapacity, qp::RowSense::LessEqual, 0.0, w, t, g);
                    rows.add(row, vm.gen_q(w, t, g), 1.0);
                    const double a =
                        availability_of(scenarios, sc, catalog.generators[static_cast<std::size_t>(g)], t);
                    if (a > 0.0) rows.add(row, vm.gen_capacity(g), -a);
                }
            }
            for (int s = 0; s < n_sto; ++s) {
                const auto& spec = catalog.storages[static_cast<std::size_t>(s)];
                if (!fixed_mix) {
                    int row = start_row(RowKind::StorageCharge, qp::RowSense::LessEqual, 0.0, w, t, s);
                    rows.add(row, vm.sto_charge(w, t, s), 1.0);
                    rows.add(row, vm.sto_power(s), -1.0);
                    row = start_row(RowKind::StorageDischarge, qp::RowSense::LessEqual, 0.0, w, t, s);
                    rows.add(row, vm.sto_discharge(w, t, s), 1.0);
                    rows.add(row, vm.sto_power(s), -1.0);
                    row = start_row(RowKind::SocCapacity, qp::RowSense::LessEqual, 0.0, w, t, s);
                    rows.add(row, vm.soc(w, t, s), 1.0);
                    rows.add(row, vm.sto_energy(s), -1.0);
                }
                // e_t - e_prev - w (eta_ch q_ch - q_dis / eta_dis) = 0
                const int row = start_row(RowKind::SocRecursion, qp::RowSense::Equal, 0.0, w, t, s);
                rows.add(row, vm.soc(w, t, s), 1.0);
                rows.add(row, t == 0 ? vm.sto_initial(s) : vm.soc(w, t - 1, s), -1.0);
                rows.add(row, vm.sto_charge(w, t, s), -wt * spec.charge_efficiency);
                rows.add(row, vm.sto_discharge(w, t, s), wt / spec.discharge_efficiency);
            }
            // served demand minus supply = 0; the equality dual is the price
            const int row = start_row(RowKind::EnergyBalance, qp::RowSense::Equal, 0.0, w, t);
            rows.add(row, vm.served_fixed(w, t), 1.0);
            rows.add(row, vm.served_flexible(w, t), 1.0);
            for (int g = 0; g < n_gen; ++g) rows.add(row, vm.gen_q(w, t, g), -1.0);
            for (int s = 0; s < n_sto; ++s) {
                rows.add(row, vm.sto_discharge(w, t, s), -1.0);
                rows.add(row, vm.sto_charge(w, t, s), 1.0);
            }
        }
        for (int s = 0; s < n_sto; ++s) {
            // e_init - e_T <= 0. Pinned schedules come from another solve's
            // tolerance-level solution, so give the cycle condition a
            // matching feasibility band when the initial SOC is pinned.
            double slack = 0.0;
            if (!pins.storage_initial.empty() &&
                !std::isnan(pins.storage_initial[static_cast<std::size_t>(s)]))
                slack = 1e-4 * std::max(1.0, pins.storage_initial[static_cast<std::size_t>(s)]);
            const int row =
                start_row(RowKind::SocEndOfHorizon, qp::RowSense::LessEqual, slack, w, -1, s);
            rows.add(row, vm.sto_initial(s), 1.0);
            rows.add(row, vm.soc(w, T - 1, s), -1.0);
        }
    }
    {
        const int row = start_row(RowKind::EmissionCap, qp::RowSense::LessEqual, design.emission_cap);
        for (int w = 0; w < n_sc; ++w) {
            const auto& sc = scenarios.scenarios[static_cast<std::size_t>(w)];
            for (int t = 0; t < sc.num_intervals(); ++t) {
                const double wd = sc.weight_hours[static_cast<std::size_t>(t)] * sc.probability_weight;
                for (int g = 0; g < n_gen; ++g) {
                    const double ef = catalog.generators[static_cast<std::size_t>(g)].emission_factor;
                    if (ef > 0.0) rows.add(row, vm.gen_q(w, t, g), wd * ef);
                }
            }
        }
    }
    if (has_cm) {
        for (int g = 0; g < n_gen; ++g) {
            const int row = start_row(RowKind::GenCmQualification, qp::RowSense::LessEqual, 0.0, -1, -1, g);
            rows.add(row, vm.cm_gen(g), 1.0);
            const double cc = catalog.generators[static_cast<std::size_t>(g)].capacity_credit;
            if (cc > 0.0) rows.add(row, vm.gen_capacity(g), -cc);
        }
        for (int s = 0; s < n_sto; ++s) {
            const auto& spec = catalog.storages[static_cast<std::size_t>(s)];
            const auto& curve = *spec.credit_curve;
            for (std::size_t l = 0; l < curve.segments.size(); ++l) {
                const auto& seg = curve.segments[l];
                const int row = start_row(RowKind::StorageCmQualification, qp::RowSense::LessEqual, 0.0,
                                          -1, -1, s, static_cast<int>(l));
                rows.add(row, vm.cm_sto(s), 1.0);
                if (seg.alpha != 0.0) rows.add(row, vm.sto_power(s), -seg.alpha);
                if (seg.beta != 0.0)
                    rows.add(row, vm.sto_energy(s), -seg.beta * spec.discharge_efficiency);
            }
            if (needs_saturation_row(curve)) {
                const int row = start_row(RowKind::StorageCmQualification, qp::RowSense::LessEqual, 0.0,
                                          -1, -1, s, static_cast<int>(curve.segments.size()));
                rows.add(row, vm.cm_sto(s), 1.0);
                rows.add(row, vm.sto_power(s), -1.0);
            }
        }
        // CM demand minus supply = 0
        const int row = start_row(RowKind::CmClearing, qp::RowSense::Equal, 0.0);
        rows.add(row, vm.cm_demand_fixed(), 1.0);
        for (int n = 0; n < vm.n_cm_flex; ++n) rows.add(row, vm.cm_demand_flex(n), 1.0);
        for (int g = 0; g < n_gen; ++g) rows.add(row, vm.cm_gen(g), -1.0);
        for (int s = 0; s < n_sto; ++s) rows.add(row, vm.cm_sto(s), -1.0);
    }
    p.constraints = rows.build();
    p.constraints.cols = vm.num_vars;
    return prog;
}

EquilibriumSolution solve_equilibrium(const PlannerProgram& prog, const qp::SolveOptions& options) {
    const qp::SolveResult res = qp::solve(prog.qp, options);
    const VarMap& vm = prog.vars;
    EquilibriumSolution sol;
    sol.status = res.status;
    sol.objective = res.objective;
    sol.kkt_residual = std::max({res.residual_primal, res.residual_dual, res.residual_comp});
    sol.iterations = res.iterations;
    sol.mode = prog.design.run_mode;
    sol.demand_mode = prog.demand.mode;
    sol.voll = prog.design.voll;
    sol.price_cap = prog.design.price_cap;
    sol.emission_cap = prog.design.emission_cap;

    sol.gen_capacity.resize(static_cast<std::size_t>(vm.n_gen));
    for (int g = 0; g < vm.n_gen; ++g)
        sol.gen_capacity[static_cast<std::size_t>(g)] = res.x[static_cast<std::size_t>(vm.gen_capacity(g))];
    sol.storage_power.resize(static_cast<std::size_t>(vm.n_sto));
    sol.storage_energy.resize(static_cast<std::size_t>(vm.n_sto));
    sol.storage_initial.resize(static_cast<std::size_t>(vm.n_sto));
    for (int s = 0; s < vm.n_sto; ++s) {
        sol.storage_power[static_cast<std::size_t>(s)] = res.x[static_cast<std::size_t>(vm.sto_power(s))];
        sol.storage_energy[static_cast<std::size_t>(s)] = res.x[static_cast<std::size_t>(vm.sto_energy(s))];
        sol.storage_initial[static_cast<std::size_t>(s)] = res.x[static_cast<std::size_t>(vm.sto_initial(s))];
    }
    if (vm.has_cm) {
        sol.cm_generator.resize(static_cast<std::size_t>(vm.n_gen));
        sol.cm_storage.resize(static_cast<std::size_t>(vm.n_sto));
        for (int g = 0; g < vm.n_gen; ++g)
            sol.cm_generator[static_cast<std::size_t>(g)] = res.x[static_cast<std::size_t>(vm.cm_gen(g))];
        for (int s = 0; s < vm.n_sto; ++s)
            sol.cm_storage[static_cast<std::size_t>(s)] = res.x[static_cast<std::size_t>(vm.cm_sto(s))];
        sol.cm_demand = res.x[static_cast<std::size_t>(vm.cm_demand_fixed())];
        for (int n = 0; n < vm.n_cm_flex; ++n)
            sol.cm_demand += res.x[static_cast<std::size_t>(vm.cm_demand_flex(n))];
    } else {
        sol.cm_generator.assign(static_cast<std::size_t>(vm.n_gen), 0.0);
        sol.cm_storage.assign(static_cast<std::size_t>(vm.n_sto), 0.0);
    }

    const int n_sc = static_cast<int>(vm.intervals.size());
    sol.interval_hours = prog.weight;
    sol.dispatch.resize(static_cast<std::size_t>(n_sc));
    for (int w = 0; w < n_sc; ++w) {
        auto& d = sol.dispatch[static_cast<std::size_t>(w)];
        const int T = vm.intervals[static_cast<std::size_t>(w)];
        d.price.assign(static_cast<std::size_t>(T), 0.0);
        d.generation.assign(static_cast<std::size_t>(vm.n_gen), std::vector<double>(static_cast<std::size_t>(T)));
        d.charge.assign(static_cast<std::size_t>(vm.n_sto), std::vector<double>(static_cast<std::size_t>(T)));
        d.discharge.assign(static_cast<std::size_t>(vm.n_sto), std::vector<double>(static_cast<std::size_t>(T)));
        d.soc.assign(static_cast<std::size_t>(vm.n_sto), std::vector<double>(static_cast<std::size_t>(T)));
        d.served_fixed.assign(static_cast<std::size_t>(T), 0.0);
        d.served_flexible.assign(static_cast<std::size_t>(T), 0.0);
        for (int t = 0; t < T; ++t) {
            for (int g = 0; g < vm.n_gen; ++g)
                d.generation[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)] =
                    res.x[static_cast<std::size_t>(vm.gen_q(w, t, g))];
            for (int s = 0; s < vm.n_sto; ++s) {
                d.charge[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
                    res.x[static_cast<std::size_t>(vm.sto_charge(w, t, s))];
                d.discharge[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
                    res.x[static_cast<std::size_t>(vm.sto_discharge(w, t, s))];
                d.soc[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] =
                    res.x[static_cast<std::size_t>(vm.soc(w, t, s))];
            }
            d.served_fixed[static_cast<std::size_t>(t)] = res.x[static_cast<std::size_t>(vm.served_fixed(w, t))];
            d.served_flexible[static_cast<std::size_t>(t)] =
                res.x[static_cast<std::size_t>(vm.served_flexible(w, t))];
        }
    }

    // prices from row duals
    for (std::size_t row = 0; row < prog.rows.size(); ++row) {
        const RowLabel& lbl = prog.rows[row];
        const double dual = res.row_duals[row];
        switch (lbl.kind) {
            case RowKind::EnergyBalance: {
                const double wd = prog.weight[static_cast<std::size_t>(lbl.scenario)][static_cast<std::size_t>(lbl.interval)] *
                                  prog.delta[static_cast<std::size_t>(lbl.scenario)];
                sol.dispatch[static_cast<std::size_t>(lbl.scenario)].price[static_cast<std::size_t>(lbl.interval)] =
                    wd > 0 ? dual / wd : 0.0;
                break;
            }
            case RowKind::CmClearing:
                sol.lambda_cm = dual;
                break;
            case RowKind::EmissionCap:
                sol.lambda_ct = dual;
                break;
            default:
                break;
        }
    }

    // Expected annual emissions, read off the emission row's coefficients
    // so the solution does not need the catalog.
    for (std::size_t row = 0; row < prog.rows.size(); ++row) {
        if (prog.rows[row].kind != RowKind::EmissionCap) continue;
        const auto& A = prog.qp.constraints;
        double v = 0.0;
        for (int k = A.row_ptr[static_cast<int>(row)]; k < A.row_ptr[static_cast<int>(row) + 1]; ++k)
            v += A.val[k] * res.x[static_cast<std::size_t>(A.col[k])];
        sol.expected_emissions = v;
    }
    return sol;
}

double agent_profit(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                    const TechnologyCatalog& catalog, const std::string& technology) {
    const int g = catalog.find_generator(technology);
    const int s = g < 0 ? catalog.find_storage(technology) : -1;
    if (g < 0 && s < 0) throw std::invalid_argument("agent_profit: unknown technology '" + technology + "'");

    double profit = 0.0;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double wd = sc.weight_hours[static_cast<std::size_t>(t)] * sc.probability_weight;
            const double price = d.price[static_cast<std::size_t>(t)];
            if (g >= 0) {
                const auto& spec = catalog.generators[static_cast<std::size_t>(g)];
                profit += wd * (price - spec.variable_cost - sol.lambda_ct * spec.emission_factor) *
                          d.generation[static_cast<std::size_t>(g)][static_cast<std::size_t>(t)];
            } else {
                const auto& spec = catalog.storages[static_cast<std::size_t>(s)];
                const double ch = d.charge[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
                const double dis = d.discharge[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
                profit += wd * (price * (dis - ch) - spec.variable_cost * dis -
                                charge_tie_break_cost(t, sc.num_intervals()) * ch);
            }
        }
    }
    if (g >= 0) {
        profit += sol.cm_generator[static_cast<std::size_t>(g)] * sol.lambda_cm;
        profit -= sol.gen_capacity[static_cast<std::size_t>(g)] *
                  catalog.generators[static_cast<std::size_t>(g)].annual_cost_per_mw();
    } else {
        const auto& spec = catalog.storages[static_cast<std::size_t>(s)];
        profit += sol.cm_storage[static_cast<std::size_t>(s)] * sol.lambda_cm;
        profit -= sol.storage_power[static_cast<std::size_t>(s)] * spec.annual_cost_per_mw();
        profit -= sol.storage_energy[static_cast<std::size_t>(s)] * spec.annual_cost_per_mwh();
    }
    return profit;
}

double worst_balance_residual(const EquilibriumSolution& sol) {
    double worst = 0.0;
    for (const auto& d : sol.dispatch) {
        for (std::size_t t = 0; t < d.price.size(); ++t) {
            double supply = 0.0;
            for (const auto& q : d.generation) supply += q[t];
            for (std::size_t s = 0; s < d.discharge.size(); ++s)
                supply += d.discharge[s][t] - d.charge[s][t];
            const double demand = d.served_fixed[t] + d.served_flexible[t];
            worst = std::max(worst, std::abs(supply - demand));
        }
    }
    return worst;
}

} // namespace ldesim
