#include "ldesim/accreditation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace ldesim {

namespace {

void run_parallel(int threads, int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

constexpr const char* kReferenceName = "reference";

GeneratorSpec perfect_reference() {
    GeneratorSpec ref;
    ref.name = kReferenceName;
    ref.variable_cost = 0.0;
    ref.annualized_capex = 0.0;
    ref.fixed_om = 0.0;
    ref.emission_factor = 0.0;
    ref.availability_profile_key = "firm";
    ref.capacity_credit = 1.0;
    return ref;
}

struct PerturbTask {
    // what gets appended to the catalog with epsilon capacity
    std::optional<GeneratorSpec> gen;
    std::optional<StorageSpec> sto;
    double storage_energy = 0.0;  // MWh for the added storage
    std::string resource;
    std::optional<double> duration;
};

DispatchPins paradigm_pins(const EquilibriumSolution& baseline, Paradigm paradigm, int n_gen,
                           int n_sto) {
    DispatchPins pins;
    if (paradigm == Paradigm::Unconstrained) return pins;
    const int n_sc = static_cast<int>(baseline.dispatch.size());
    // Pins cover the pre-existing storages only; the perturbation resource
    // is appended after them and stays free (empty trailing slots).
    pins.storage_charge.assign(static_cast<std::size_t>(n_sto) + 1, {});
    pins.storage_discharge.assign(static_cast<std::size_t>(n_sto) + 1, {});
    pins.storage_initial.assign(static_cast<std::size_t>(n_sto) + 1,
                                std::numeric_limits<double>::quiet_NaN());
    for (int s = 0; s < n_sto; ++s) {
        auto& ch = pins.storage_charge[static_cast<std::size_t>(s)];
        ch.resize(static_cast<std::size_t>(n_sc));
        for (int w = 0; w < n_sc; ++w) ch[static_cast<std::size_t>(w)] = baseline.dispatch[static_cast<std::size_t>(w)].charge[static_cast<std::size_t>(s)];
        if (paradigm == Paradigm::ChargingAndDischargingFixed) {
            auto& dis = pins.storage_discharge[static_cast<std::size_t>(s)];
            dis.resize(static_cast<std::size_t>(n_sc));
            for (int w = 0; w < n_sc; ++w)
                dis[static_cast<std::size_t>(w)] = baseline.dispatch[static_cast<std::size_t>(w)].discharge[static_cast<std::size_t>(s)];
        }
        pins.storage_initial[static_cast<std::size_t>(s)] = baseline.storage_initial[static_cast<std::size_t>(s)];
    }
    (void)n_gen;
    return pins;
}

} // namespace

const char* to_string(Paradigm p) {
    switch (p) {
        case Paradigm::Unconstrained: return "UNCONSTRAINED";
        case Paradigm::ChargingFixed: return "CHARGING_FIXED";
        case Paradigm::ChargingAndDischargingFixed: return "CHARGING_AND_DISCHARGING_FIXED";
    }
    return "?";
}

UnservedSeries unserved_energy(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                               bool allow_uncapped) {
    if (sol.demand_mode == DemandMode::Uncapped && !allow_uncapped)
        throw std::invalid_argument(
            "unserved_energy: solution was dispatched against the uncapped demand curve; pass "
            "allow_uncapped to apply the capped-threshold convention");
    UnservedSeries out;
    out.shortfall.resize(scenarios.scenarios.size());
    const double voll = sol.voll;
    const double pc = sol.price_cap;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        out.shortfall[w].resize(static_cast<std::size_t>(sc.num_intervals()));
        for (int t = 0; t < sc.num_intervals(); ++t) {
            const double threshold =
                sc.fixed_demand[static_cast<std::size_t>(t)] +
                sc.flexible_demand[static_cast<std::size_t>(t)] * (voll - pc) / voll;
            const double served =
                d.served_fixed[static_cast<std::size_t>(t)] + d.served_flexible[static_cast<std::size_t>(t)];
            const double l = std::max(0.0, threshold - served);
            out.shortfall[w][static_cast<std::size_t>(t)] = l;
            out.eue += sc.probability_weight * sc.weight_hours[static_cast<std::size_t>(t)] * l;
        }
    }
    return out;
}

std::vector<double> default_duration_grid() {
    return {1, 2, 4, 6, 8, 12, 16, 24, 32, 48, 72, 96, 120, 168};
}

std::vector<std::pair<double, double>> AccreditationResult::storage_points(
    const std::string& name) const {
    std::vector<std::pair<double, double>> pts;
    for (const auto& e : estimates)
        if (e.resource == name && e.duration_h) pts.emplace_back(*e.duration_h, e.credit);
    return pts;
}

const CreditEstimate* AccreditationResult::find(const std::string& resource) const {
    for (const auto& e : estimates)
        if (e.resource == resource && !e.duration_h) return &e;
    return nullptr;
}

AccreditationResult accredit(const FixedCapacities& mix, const ScenarioSet& scenarios,
                             const TechnologyCatalog& catalog, double voll, double price_cap,
                             double emission_cap, const AccreditOptions& options) {
    const int n_gen = static_cast<int>(catalog.generators.size());
    const int n_sto = static_cast<int>(catalog.storages.size());
    if (mix.generator_mw.size() != static_cast<std::size_t>(n_gen) ||
        mix.storage_power_mw.size() != static_cast<std::size_t>(n_sto) ||
        mix.storage_energy_mwh.size() != static_cast<std::size_t>(n_sto))
        throw std::invalid_argument("accredit: mix does not match catalog");
    if (!(options.epsilon_mw > 0.0)) throw std::invalid_argument("accredit: epsilon must be positive");

    AccreditationResult result;

    // Step 1: baseline dispatch of the fixed mix under the capped demand.
    MarketDesign base_design;
    base_design.run_mode = RunMode::DispatchFixedMix;
    base_design.fixed_mix_demand = DemandMode::Capped;
    base_design.voll = voll;
    base_design.price_cap = price_cap;
    base_design.emission_cap = emission_cap;
    base_design.fixed_capacities = mix;
    result.baseline = solve_equilibrium(assemble(scenarios, catalog, base_design), options.solver);
    if (!result.baseline.optimal())
        throw std::runtime_error("accredit: baseline dispatch failed: " +
                                 std::string(qp::to_string(result.baseline.status)));
    result.eue_0 = unserved_energy(result.baseline, scenarios).eue;

    const DispatchPins pins = paradigm_pins(result.baseline, options.paradigm, n_gen, n_sto);

    // A perturbation solve: catalog plus epsilon of one resource.
    auto perturbed_eue = [&](const PerturbTask& task) {
        TechnologyCatalog cat = catalog;
        FixedCapacities caps = mix;
        MarketDesign design = base_design;
        DispatchPins task_pins = pins;
        if (task.gen) {
            cat.generators.push_back(*task.gen);
            caps.generator_mw.push_back(options.epsilon_mw);
            if (!task_pins.storage_charge.empty()) {
                // pin vectors sized n_sto+1 for a storage addition; shrink to n_sto
                task_pins.storage_charge.resize(static_cast<std::size_t>(n_sto));
                task_pins.storage_discharge.resize(static_cast<std::size_t>(n_sto));
                task_pins.storage_initial.resize(static_cast<std::size_t>(n_sto));
            }
        } else {
            cat.storages.push_back(*task.sto);
            caps.storage_power_mw.push_back(options.epsilon_mw);
            caps.storage_energy_mwh.push_back(task.storage_energy);
        }
        design.fixed_capacities = caps;
        auto sol = solve_equilibrium(assemble(scenarios, cat, design, task_pins), options.solver);
        if (!sol.optimal())
            throw std::runtime_error("accredit: perturbation solve for '" + task.resource +
                                     "' failed: " + std::string(qp::to_string(sol.status)));
        return unserved_energy(sol, scenarios).eue;
    };

    // Step 2: the perfect reference generator fixes the denominator.
    {
        PerturbTask ref_task;
        ref_task.gen = perfect_reference();
        ref_task.resource = kReferenceName;
        result.eue_ref = perturbed_eue(ref_task);
    }
    const double denom = result.eue_0 - result.eue_ref;
    // The perfect generator removes at least ~epsilon times the weighted
    // shortfall hours when scarcity is real; anything below a small
    // fraction of epsilon is solver noise.
    if (!(denom > std::max(1e-9, 1e-3 * options.epsilon_mw))) {
        result.scarcity = false;
        result.diagnostic =
            "EUE_0 and EUE_ref coincide (" + std::to_string(result.eue_0) +
            " MWh): the system has no scarcity at this mix, or epsilon is below numerical "
            "noise; increase epsilon or accept a scarcity-free system";
        return result;
    }

    auto credit_of = [&](double eue_r) { return (result.eue_0 - eue_r) / denom; };
    auto make_estimate = [&](const PerturbTask& task, double eue_r) {
        CreditEstimate e;
        e.resource = task.resource;
        e.duration_h = task.duration;
        e.paradigm = options.paradigm;
        e.eue_0 = result.eue_0;
        e.eue_ref = result.eue_ref;
        e.eue_r = eue_r;
        e.credit = credit_of(eue_r);
        return e;
    };

    // Step 3. Reference-as-resource first (identical task, so its credit is
    // exactly 1 by determinism), then generators, in one parallel wave.
    {
        std::vector<PerturbTask> tasks;
        {
            PerturbTask t;
            t.gen = perfect_reference();
            t.resource = kReferenceName;
            tasks.push_back(std::move(t));
        }
        for (int g = 0; g < n_gen; ++g) {
            PerturbTask t;
            GeneratorSpec clone = catalog.generators[static_cast<std::size_t>(g)];
            t.resource = clone.name;
            t.gen = std::move(clone);
            tasks.push_back(std::move(t));
        }
        std::vector<double> eues(tasks.size(), 0.0);
        std::vector<std::string> errors(tasks.size());
        run_parallel(options.threads, static_cast<int>(tasks.size()), [&](int i) {
            try {
                eues[static_cast<std::size_t>(i)] = perturbed_eue(tasks[static_cast<std::size_t>(i)]);
            } catch (const std::exception& ex) {
                errors[static_cast<std::size_t>(i)] = ex.what();
            }
        });
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!errors[i].empty()) throw std::runtime_error(errors[i]);
            result.estimates.push_back(make_estimate(tasks[i], eues[i]));
        }
    }

    // Storage resources across the duration grid, chunked so the saturation
    // rule can stop probing longer durations.
    for (int s = 0; s < n_sto; ++s) {
        const auto& spec = catalog.storages[static_cast<std::size_t>(s)];
        const auto& grid = options.durations_h;
        std::vector<CreditEstimate> sto_estimates;
        const int chunk = std::max(1, options.threads > 0
                                          ? options.threads
                                          : static_cast<int>(std::thread::hardware_concurrency()));
        for (std::size_t start = 0; start < grid.size();) {
            const std::size_t end = std::min(grid.size(), start + static_cast<std::size_t>(chunk));
            std::vector<PerturbTask> tasks;
            for (std::size_t i = start; i < end; ++i) {
                PerturbTask t;
                StorageSpec clone = spec;
                clone.name = spec.name;
                t.resource = spec.name;
                t.duration = grid[i];
                t.storage_energy = grid[i] * options.epsilon_mw / spec.discharge_efficiency;
                t.sto = std::move(clone);
                tasks.push_back(std::move(t));
            }
            std::vector<double> eues(tasks.size(), 0.0);
            std::vector<std::string> errors(tasks.size());
            run_parallel(options.threads, static_cast<int>(tasks.size()), [&](int i) {
                try {
                    eues[static_cast<std::size_t>(i)] = perturbed_eue(tasks[static_cast<std::size_t>(i)]);
                } catch (const std::exception& ex) {
                    errors[static_cast<std::size_t>(i)] = ex.what();
                }
            });
            bool saturated = false;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                if (!errors[i].empty()) throw std::runtime_error(errors[i]);
                sto_estimates.push_back(make_estimate(tasks[i], eues[i]));
                const std::size_t k = sto_estimates.size();
                if (options.truncate_saturated && k >= 2 &&
                    sto_estimates[k - 1].credit >= 1.0 - 1e-6 &&
                    sto_estimates[k - 2].credit >= 1.0 - 1e-6) {
                    saturated = true;
                    sto_estimates.resize(k);  // keep both saturated points
                    break;
                }
            }
            if (saturated) break;
            start = end;
        }
        for (auto& e : sto_estimates) result.estimates.push_back(std::move(e));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Curve fitting
// ---------------------------------------------------------------------------

namespace {

struct FitCandidate {
    double sse = std::numeric_limits<double>::infinity();
    std::vector<double> knots;
    std::vector<double> values;
    bool concavity_active = false;
};

// Constrained least squares on fixed knots: values v at the knots,
// monotone and concave via linear rows, solved with the in-house QP.
FitCandidate fit_with_knots(const std::vector<std::pair<double, double>>& pts,
                            const std::vector<double>& knots) {
    const int K = static_cast<int>(knots.size()) - 1;  // segments
    const int nv = K + 1;
    const std::size_t n = pts.size();

    // interpolation weights
    std::vector<std::vector<double>> m(n, std::vector<double>(static_cast<std::size_t>(nv), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = pts[i].first;
        int seg = 0;
        while (seg + 1 < K && z > knots[static_cast<std::size_t>(seg) + 1]) ++seg;
        const double lo = knots[static_cast<std::size_t>(seg)];
        const double hi = knots[static_cast<std::size_t>(seg) + 1];
        const double span = std::max(hi - lo, 1e-12);
        const double a = (z - lo) / span;
        m[i][static_cast<std::size_t>(seg)] = 1.0 - a;
        m[i][static_cast<std::size_t>(seg) + 1] = a;
    }

    qp::ConvexQP p;
    p.resize(nv);
    CsrBuilder qb(nv, nv);
    std::vector<std::vector<double>> mtm(static_cast<std::size_t>(nv),
                                         std::vector<double>(static_cast<std::size_t>(nv), 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b)
                mtm[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                    m[i][static_cast<std::size_t>(a)] * m[i][static_cast<std::size_t>(b)];
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
            if (mtm[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != 0.0)
                qb.add(a, b, -2.0 * mtm[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    p.quad = qb.build();
    double sst_const = 0.0;
    for (int a = 0; a < nv; ++a) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += m[i][static_cast<std::size_t>(a)] * pts[i].second;
        p.linear[static_cast<std::size_t>(a)] = 2.0 * acc;
    }
    for (std::size_t i = 0; i < n; ++i) sst_const += pts[i].second * pts[i].second;
    p.constant = -sst_const;

    // rows: monotone v_l <= v_{l+1}; concave slopes non-increasing
    const int mono = K;
    const int conc = K - 1;
    CsrBuilder ab(mono + conc, nv);
    int r = 0;
    for (int l = 0; l < K; ++l, ++r) {
        ab.add(r, l, 1.0);
        ab.add(r, l + 1, -1.0);
    }
    for (int l = 0; l + 1 < K; ++l, ++r) {
        const double d1 = std::max(knots[static_cast<std::size_t>(l) + 1] - knots[static_cast<std::size_t>(l)], 1e-12);
        const double d2 = std::max(knots[static_cast<std::size_t>(l) + 2] - knots[static_cast<std::size_t>(l) + 1], 1e-12);
        // (v_{l+2} - v_{l+1})/d2 - (v_{l+1} - v_l)/d1 <= 0
        ab.add(r, l + 2, 1.0 / d2);
        ab.add(r, l + 1, -1.0 / d2 - 1.0 / d1);
        ab.add(r, l, 1.0 / d1);
    }
    p.constraints = ab.build();
    p.constraints.cols = nv;
    p.sense.assign(static_cast<std::size_t>(mono + conc), qp::RowSense::LessEqual);
    p.rhs.assign(static_cast<std::size_t>(mono + conc), 0.0);

    qp::SolveOptions opts;
    opts.tolerance = 1e-10;
    auto res = qp::solve(p, opts);
    FitCandidate cand;
    if (res.status != qp::SolveStatus::Optimal &&
        res.status != qp::SolveStatus::NotConverged)
        return cand;

    Eigen::MatrixXd mmat(n, nv);
    Eigen::VectorXd yvec(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < nv; ++a) mmat(static_cast<Eigen::Index>(i), a) = m[i][static_cast<std::size_t>(a)];
        yvec(static_cast<Eigen::Index>(i)) = pts[i].second;
    }
    auto sse_of = [&](const Eigen::VectorXd& v) { return (mmat * v - yvec).squaredNorm(); };

    // Crossover cleanup: degenerate fits (ties in the data) leave the
    // interior-point solution ~sqrt(tol) away from the vertex. Guess the
    // active set from primal proximity, solve the least squares on its
    // nullspace exactly, and keep the refinement when it stays feasible.
    {
        const auto& A = p.constraints;
        std::vector<int> active;
        for (int cr = 0; cr < mono + conc; ++cr) {
            double v = 0.0;
            for (int k = A.row_ptr[cr]; k < A.row_ptr[cr + 1]; ++k)
                v += A.val[k] * res.x[static_cast<std::size_t>(A.col[k])];
            // generous threshold: a wrong guess is rejected below
            if (v > -1e-3) active.push_back(cr);
        }
        Eigen::VectorXd refined;
        if (active.empty()) {
            refined = mmat.colPivHouseholderQr().solve(yvec);
        } else {
            Eigen::MatrixXd cmat = Eigen::MatrixXd::Zero(static_cast<int>(active.size()), nv);
            for (std::size_t r2 = 0; r2 < active.size(); ++r2) {
                const int row = active[r2];
                for (int k = A.row_ptr[row]; k < A.row_ptr[row + 1]; ++k)
                    cmat(static_cast<Eigen::Index>(r2), A.col[k]) = A.val[k];
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(cmat);
            const Eigen::MatrixXd null = lu.kernel();  // honors redundant rows
            if (null.cols() > 0 && null.norm() > 0) {
                const Eigen::MatrixXd mn = mmat * null;
                const Eigen::VectorXd w = mn.colPivHouseholderQr().solve(yvec);
                refined = null * w;
            } else {
                refined = Eigen::VectorXd::Zero(nv);
            }
        }
        bool ok = refined.size() == nv;
        for (int a = 0; a < nv && ok; ++a)
            if (refined(a) < -1e-9 || !std::isfinite(refined(a))) ok = false;
        for (int cr = 0; cr < mono + conc && ok; ++cr) {
            double v = 0.0;
            for (int k = A.row_ptr[cr]; k < A.row_ptr[cr + 1]; ++k) v += A.val[k] * refined(A.col[k]);
            if (v > 1e-9) ok = false;
        }
        if (ok && sse_of(refined) <= std::max(0.0, -res.objective) + 1e-7) {
            for (int a = 0; a < nv; ++a) res.x[static_cast<std::size_t>(a)] = refined(a);
            res.objective = -sse_of(refined);
        }
    }

    cand.sse = std::max(0.0, -res.objective);
    cand.knots = knots;
    cand.values.assign(res.x.begin(), res.x.end());
    // The warning compares against the unconstrained least squares on the
    // same knots: a materially better unconstrained fit means the shape
    // constraints actively bound (non-concave input data).
    {
        const Eigen::VectorXd free_fit = mmat.colPivHouseholderQr().solve(yvec);
        const double sse_free = sse_of(free_fit);
        cand.concavity_active = cand.sse > sse_free + 1e-9 * std::max(1.0, yvec.squaredNorm());
    }
    return cand;
}

void combinations(int n, int k, const std::function<void(const std::vector<int>&)>& emit) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (;;) {
        emit(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

} // namespace

CreditCurveFit fit_credit_curve(const std::vector<std::pair<double, double>>& points,
                                int segment_count) {
    if (segment_count < 1) throw std::invalid_argument("fit_credit_curve: segment_count must be >= 1");
    if (points.size() < static_cast<std::size_t>(segment_count) + 1)
        throw std::invalid_argument("fit_credit_curve: need at least segment_count + 1 points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].first > points[i - 1].first))
            throw std::invalid_argument("fit_credit_curve: durations must be strictly increasing");

    const int n = static_cast<int>(points.size());
    const int interior = segment_count - 1;
    std::vector<double> candidates;  // interior knot sites
    for (int i = 1; i + 1 < n; ++i) candidates.push_back(points[static_cast<std::size_t>(i)].first);

    FitCandidate best;
    auto try_knots = [&](const std::vector<double>& inner) {
        std::vector<double> knots;
        knots.push_back(points.front().first);
        for (double z : inner) knots.push_back(z);
        knots.push_back(points.back().first);
        auto cand = fit_with_knots(points, knots);
        if (cand.sse < best.sse - 1e-15) best = cand;
    };

    if (interior == 0) {
        try_knots({});
    } else if (static_cast<int>(candidates.size()) < interior) {
        throw std::invalid_argument("fit_credit_curve: not enough distinct interior points");
    } else {
        // enumerate interior-knot placements; thin the candidate set if the
        // combination count explodes
        std::vector<double> sites = candidates;
        double combo_count = 1.0;
        for (int i = 0; i < interior; ++i)
            combo_count *= static_cast<double>(sites.size() - static_cast<std::size_t>(i)) / (i + 1);
        if (combo_count > 20000.0) {
            std::vector<double> thinned;
            const std::size_t target = 22;
            for (std::size_t i = 0; i < target; ++i)
                thinned.push_back(sites[i * (sites.size() - 1) / (target - 1)]);
            thinned.erase(std::unique(thinned.begin(), thinned.end()), thinned.end());
            sites = thinned;
        }
        combinations(static_cast<int>(sites.size()), interior, [&](const std::vector<int>& idx) {
            std::vector<double> inner;
            for (int i : idx) inner.push_back(sites[static_cast<std::size_t>(i)]);
            try_knots(inner);
        });
    }

    if (!std::isfinite(best.sse))
        throw std::runtime_error("fit_credit_curve: no feasible fit found");

    CreditCurveFit fit;
    fit.concavity_warning = best.concavity_active;
    for (std::size_t l = 0; l + 1 < best.knots.size(); ++l) {
        CreditCurve::Segment seg;
        const double span = std::max(best.knots[l + 1] - best.knots[l], 1e-12);
        seg.beta = (best.values[l + 1] - best.values[l]) / span;
        if (std::abs(seg.beta) < 1e-12) seg.beta = 0.0;
        seg.alpha = best.values[l] - seg.beta * best.knots[l];
        seg.zeta_lo = l == 0 ? 0.0 : best.knots[l];
        seg.zeta_hi = best.knots[l + 1];
        fit.curve.segments.push_back(seg);
    }
    double sst = 0.0, mean = 0.0;
    for (const auto& pt : points) mean += pt.second;
    mean /= static_cast<double>(points.size());
    for (const auto& pt : points) sst += (pt.second - mean) * (pt.second - mean);
    fit.r2 = sst > 1e-15 ? 1.0 - best.sse / sst : (best.sse <= 1e-9 ? 1.0 : 0.0);
    return fit;
}

} // namespace ldesim
