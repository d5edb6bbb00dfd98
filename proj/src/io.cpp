#include "ldesim/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ldesim::io {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

double json_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<double>();
}

} // namespace

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& token, const std::string& where) {
    if (token == "inf") return kInf;
    if (token == "-inf") return -kInf;
    double v = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error(where + ": malformed number '" + token + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Scenario CSV
// ---------------------------------------------------------------------------

ScenarioSet read_scenario_csv(std::istream& in, double horizon_hours,
                              const std::map<std::string, double>& scenario_weights) {
    ScenarioSet set;
    set.horizon_hours = horizon_hours;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("scenario csv: empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "scenario_id" || header[1] != "interval_id" ||
        header[2] != "weight_hours" || header[3] != "d_fix_mw" || header[4] != "d_flex_mw")
        throw std::runtime_error(
            "scenario csv: header must start with "
            "scenario_id,interval_id,weight_hours,d_fix_mw,d_flex_mw");
    for (std::size_t c = 5; c < header.size(); ++c) {
        if (header[c].rfind("avail_", 0) != 0)
            throw std::runtime_error("scenario csv: availability columns must be named avail_<key>, got '" +
                                     header[c] + "'");
        set.profile_keys.push_back(header[c].substr(6));
    }
    std::map<std::string, std::size_t> index;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        const std::string where = "scenario csv line " + std::to_string(line_no);
        if (cells.size() != header.size())
            throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                                     " columns, got " + std::to_string(cells.size()));
        const std::string& id = cells[0];
        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, set.scenarios.size()).first;
            Scenario sc;
            sc.id = id;
            sc.availability.resize(set.profile_keys.size());
            set.scenarios.push_back(std::move(sc));
        }
        Scenario& sc = set.scenarios[it->second];
        const double interval_id = parse_double(cells[1], where);
        if (static_cast<int>(interval_id) != sc.num_intervals())
            throw std::runtime_error(where + ": interval_id " + cells[1] +
                                     " out of order (expected " + std::to_string(sc.num_intervals()) + ")");
        sc.weight_hours.push_back(parse_double(cells[2], where));
        sc.fixed_demand.push_back(parse_double(cells[3], where));
        sc.flexible_demand.push_back(parse_double(cells[4], where));
        for (std::size_t c = 5; c < cells.size(); ++c)
            sc.availability[c - 5].push_back(parse_double(cells[c], where));
    }
    if (set.scenarios.empty()) throw std::runtime_error("scenario csv: no data rows");

    if (!scenario_weights.empty()) {
        for (auto& sc : set.scenarios) {
            auto it = scenario_weights.find(sc.id);
            if (it == scenario_weights.end())
                throw std::runtime_error("scenario weights: no weight for scenario '" + sc.id + "'");
            sc.probability_weight = it->second;
        }
    } else {
        for (auto& sc : set.scenarios)
            sc.probability_weight = 1.0 / static_cast<double>(set.scenarios.size());
    }
    return set;
}

ScenarioSet read_scenario_csv(const std::filesystem::path& path, double horizon_hours,
                              const std::map<std::string, double>& scenario_weights) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
    return read_scenario_csv(in, horizon_hours, scenario_weights);
}

void write_scenario_csv(const ScenarioSet& set, std::ostream& out) {
    out << "scenario_id,interval_id,weight_hours,d_fix_mw,d_flex_mw";
    for (const auto& key : set.profile_keys) out << ",avail_" << key;
    out << "\n";
    for (const auto& sc : set.scenarios) {
        for (int t = 0; t < sc.num_intervals(); ++t) {
            out << sc.id << "," << t << "," << format_double(sc.weight_hours[static_cast<std::size_t>(t)])
                << "," << format_double(sc.fixed_demand[static_cast<std::size_t>(t)]) << ","
                << format_double(sc.flexible_demand[static_cast<std::size_t>(t)]);
            for (std::size_t p = 0; p < set.profile_keys.size(); ++p)
                out << "," << format_double(sc.availability[p][static_cast<std::size_t>(t)]);
            out << "\n";
        }
    }
}

void write_scenario_csv(const ScenarioSet& set, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_scenario_csv(set, out);
}

// ---------------------------------------------------------------------------
// Catalog JSON
// ---------------------------------------------------------------------------

double capital_recovery_factor(double rate, double lifetime_years) {
    if (!(lifetime_years > 0.0)) throw std::invalid_argument("capital recovery: lifetime must be positive");
    if (rate <= 0.0) return 1.0 / lifetime_years;
    const double growth = std::pow(1.0 + rate, lifetime_years);
    return rate * growth / (growth - 1.0);
}

namespace {

// Costs may be given annualized directly or as overnight capex with
// lifetime and WACC (per kW / kWh, the units of vendor data sheets).
double annualized_per_mw(const json& j, const char* direct, const char* per_kw) {
    if (j.contains(direct)) return j.at(direct).get<double>();
    if (j.contains(per_kw)) {
        const double capex = j.at(per_kw).get<double>() * 1000.0;  // $/kW -> $/MW
        return capex * capital_recovery_factor(json_number(j, "wacc", 0.0),
                                               json_number(j, "lifetime_years", 0.0));
    }
    return 0.0;
}

} // namespace

TechnologyCatalog read_catalog_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw std::runtime_error(std::string("catalog json: ") + ex.what());
    }
    TechnologyCatalog cat;
    cat.reference_generator = j.value("reference", "");
    for (const auto& jg : j.value("generators", json::array())) {
        GeneratorSpec g;
        g.name = jg.at("name").get<std::string>();
        g.variable_cost = json_number(jg, "variable_cost", 0.0);
        g.annualized_capex = annualized_per_mw(jg, "annualized_capex", "power_capex_per_kw");
        g.fixed_om = jg.contains("fixed_om") ? jg.at("fixed_om").get<double>()
                                             : json_number(jg, "fixed_om_per_kw_yr", 0.0) * 1000.0;
        g.emission_factor = json_number(jg, "emission_t_per_mwh", 0.0);
        g.availability_profile_key = jg.value("availability", "firm");
        g.capacity_credit = json_number(jg, "capacity_credit", 1.0);
        cat.generators.push_back(std::move(g));
    }
    for (const auto& js : j.value("storages", json::array())) {
        StorageSpec s;
        s.name = js.at("name").get<std::string>();
        s.power_capex = annualized_per_mw(js, "power_capex_annualized", "power_capex_per_kw");
        s.power_fixed_om = js.contains("power_fixed_om")
                               ? js.at("power_fixed_om").get<double>()
                               : json_number(js, "power_fixed_om_per_kw_yr", 0.0) * 1000.0;
        s.energy_capex = annualized_per_mw(js, "energy_capex_annualized", "energy_capex_per_kwh");
        s.energy_fixed_om = js.contains("energy_fixed_om")
                                ? js.at("energy_fixed_om").get<double>()
                                : json_number(js, "energy_fixed_om_per_kwh_yr", 0.0) * 1000.0;
        s.charge_efficiency = json_number(js, "charge_efficiency", 1.0);
        s.discharge_efficiency = json_number(js, "discharge_efficiency", 1.0);
        s.variable_cost = json_number(js, "variable_cost", 0.5);
        if (js.contains("credit_curve")) {
            CreditCurve curve;
            for (const auto& seg : js.at("credit_curve").at("segments")) {
                curve.segments.push_back({seg.at("alpha").get<double>(), seg.at("beta").get<double>(),
                                          seg.at("zeta_lo").get<double>(),
                                          seg.at("zeta_hi").get<double>()});
            }
            s.credit_curve = std::move(curve);
        }
        cat.storages.push_back(std::move(s));
    }
    return cat;
}

TechnologyCatalog read_catalog_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog file: " + path.string());
    return read_catalog_json(in);
}

void write_catalog_json(const TechnologyCatalog& catalog, std::ostream& out) {
    json j;
    j["reference"] = catalog.reference_generator;
    j["generators"] = json::array();
    for (const auto& g : catalog.generators) {
        json jg;
        jg["name"] = g.name;
        jg["variable_cost"] = g.variable_cost;
        jg["annualized_capex"] = g.annualized_capex;
        jg["fixed_om"] = g.fixed_om;
        jg["emission_t_per_mwh"] = g.emission_factor;
        jg["availability"] = g.availability_profile_key.empty() ? "firm" : g.availability_profile_key;
        jg["capacity_credit"] = g.capacity_credit;
        j["generators"].push_back(std::move(jg));
    }
    j["storages"] = json::array();
    for (const auto& s : catalog.storages) {
        json js;
        js["name"] = s.name;
        js["power_capex_annualized"] = s.power_capex;
        js["power_fixed_om"] = s.power_fixed_om;
        js["energy_capex_annualized"] = s.energy_capex;
        js["energy_fixed_om"] = s.energy_fixed_om;
        js["charge_efficiency"] = s.charge_efficiency;
        js["discharge_efficiency"] = s.discharge_efficiency;
        js["variable_cost"] = s.variable_cost;
        if (s.credit_curve) {
            json segs = json::array();
            for (const auto& seg : s.credit_curve->segments)
                segs.push_back({{"alpha", seg.alpha},
                                {"beta", seg.beta},
                                {"zeta_lo", seg.zeta_lo},
                                {"zeta_hi", seg.zeta_hi}});
            js["credit_curve"] = {{"segments", std::move(segs)}};
        }
        j["storages"].push_back(std::move(js));
    }
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

FixedCapacities FixedCapacitiesByName::resolve(const TechnologyCatalog& catalog) const {
    FixedCapacities f;
    f.generator_mw.assign(catalog.generators.size(), 0.0);
    f.storage_power_mw.assign(catalog.storages.size(), 0.0);
    f.storage_energy_mwh.assign(catalog.storages.size(), 0.0);
    for (const auto& [name, entry] : entries) {
        const int g = catalog.find_generator(name);
        if (g >= 0) {
            f.generator_mw[static_cast<std::size_t>(g)] = entry.power_mw;
            continue;
        }
        const int s = catalog.find_storage(name);
        if (s < 0) throw std::runtime_error("fixed capacities: unknown technology '" + name + "'");
        f.storage_power_mw[static_cast<std::size_t>(s)] = entry.power_mw;
        f.storage_energy_mwh[static_cast<std::size_t>(s)] = entry.energy_mwh;
    }
    return f;
}

double RunConfig::emission_cap(const ScenarioSet& scenarios) const {
    if (emission_cap_tco2) return *emission_cap_tco2;
    if (emission_intensity_g_per_kwh)
        // g/kWh == kg/MWh; divide by 1000 for tonnes
        return *emission_intensity_g_per_kwh * scenarios.expected_annual_demand() / 1000.0;
    return kInf;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw std::runtime_error(std::string("config json: ") + ex.what());
    }
    RunConfig cfg;
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    if (j.contains("scenarios")) cfg.scenario_file = resolve(j.at("scenarios").get<std::string>());
    if (j.contains("catalog")) cfg.catalog_file = resolve(j.at("catalog").get<std::string>());
    if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    cfg.seed = static_cast<std::uint64_t>(json_number(j, "seed", 1.0));
    cfg.threads = static_cast<int>(json_number(j, "threads", 0.0));
    cfg.tolerance = json_number(j, "tolerance", 1e-8);
    cfg.horizon_hours = json_number(j, "horizon_hours", 8760.0);
    if (j.contains("scenario_weights"))
        for (const auto& [k, v] : j.at("scenario_weights").items())
            cfg.scenario_weights[k] = v.get<double>();

    if (j.contains("design")) {
        const auto& jd = j.at("design");
        cfg.voll = json_number(jd, "voll", cfg.voll);
        cfg.price_cap = json_number(jd, "price_cap", cfg.price_cap);
        if (jd.contains("emission_intensity_g_per_kwh"))
            cfg.emission_intensity_g_per_kwh = jd.at("emission_intensity_g_per_kwh").get<double>();
        if (jd.contains("emission_cap_tco2"))
            cfg.emission_cap_tco2 = jd.at("emission_cap_tco2").get<double>();
        if (jd.contains("mode")) {
            const std::string m = jd.at("mode").get<std::string>();
            if (m == "eom_voll") cfg.mode = RunMode::EomVoll;
            else if (m == "eom_pc") cfg.mode = RunMode::EomPc;
            else if (m == "e_plus_cm") cfg.mode = RunMode::EPlusCm;
            else if (m == "dispatch_fixed_mix") cfg.mode = RunMode::DispatchFixedMix;
            else throw std::runtime_error("config: unknown mode '" + m + "'");
        }
        if (jd.contains("fixed_capacities")) {
            FixedCapacitiesByName byname;
            for (const auto& [name, je] : jd.at("fixed_capacities").items())
                byname.entries[name] = {json_number(je, "power_mw", 0.0),
                                        json_number(je, "energy_mwh", 0.0)};
            cfg.fixed_capacities = std::move(byname);
        }
        if (jd.contains("cm")) {
            cfg.cm_capacity_target_mw = json_number(jd.at("cm"), "capacity_target_mw", 0.0);
            cfg.cm_net_cone = json_number(jd.at("cm"), "net_cone", 0.0);
        }
    }
    if (j.contains("accreditation")) {
        const auto& ja = j.at("accreditation");
        cfg.accreditation.epsilon_mw = json_number(ja, "epsilon_mw", cfg.accreditation.epsilon_mw);
        if (ja.contains("durations_h"))
            cfg.accreditation.durations_h = ja.at("durations_h").get<std::vector<double>>();
        if (ja.contains("paradigm")) {
            const std::string p = ja.at("paradigm").get<std::string>();
            if (p == "unconstrained") cfg.accreditation.paradigm = Paradigm::Unconstrained;
            else if (p == "charging_fixed") cfg.accreditation.paradigm = Paradigm::ChargingFixed;
            else if (p == "charging_and_discharging_fixed")
                cfg.accreditation.paradigm = Paradigm::ChargingAndDischargingFixed;
            else throw std::runtime_error("config: unknown paradigm '" + p + "'");
        }
        cfg.curve_segments = static_cast<int>(json_number(ja, "segment_count", 4.0));
        if (ja.contains("truncate_saturated"))
            cfg.accreditation.truncate_saturated = ja.at("truncate_saturated").get<bool>();
    }
    if (j.contains("sweep_factors")) cfg.sweep_factors = j.at("sweep_factors").get<std::vector<double>>();
    if (j.contains("synth")) {
        const auto& js = j.at("synth");
        cfg.synth.years = static_cast<int>(json_number(js, "years", 2.0));
        cfg.synth.intervals_per_year = static_cast<int>(json_number(js, "intervals_per_year", 336.0));
        cfg.synth.horizon_hours = json_number(js, "horizon_hours", cfg.horizon_hours);
        cfg.synth.peak_mw = json_number(js, "peak_mw", 100.0);
        cfg.synth.flexible_mw = json_number(js, "flexible_mw", 2.0);
        cfg.synth.solar_cf = json_number(js, "solar_cf", 0.11);
        cfg.synth.wind_cf = json_number(js, "wind_cf", 0.29);
        cfg.synth.drought_intervals = static_cast<int>(json_number(js, "drought_intervals", 10.0));
        cfg.synth.drought_wind_factor = json_number(js, "drought_wind_factor", 0.05);
        cfg.synth.drought_solar_factor = json_number(js, "drought_solar_factor", 0.3);
        cfg.synth.drought_demand_factor = json_number(js, "drought_demand_factor", 1.05);
        cfg.synth.demand_noise = json_number(js, "demand_noise", 0.04);
        cfg.synth.wind_ar = json_number(js, "wind_ar", 0.85);
    }
    cfg.synth.seed = cfg.seed;
    return cfg;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

void write_capacities_csv(const EquilibriumSolution& sol, const TechnologyCatalog& catalog,
                          const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "name,kind,power_mw,energy_mwh,duration_h,cm_contracted_mw\n";
    for (std::size_t g = 0; g < catalog.generators.size(); ++g) {
        out << catalog.generators[g].name << ",generator," << format_double(sol.gen_capacity[g])
            << ",,," << format_double(sol.cm_generator.empty() ? 0.0 : sol.cm_generator[g]) << "\n";
    }
    for (std::size_t s = 0; s < catalog.storages.size(); ++s) {
        out << catalog.storages[s].name << ",storage," << format_double(sol.storage_power[s]) << ","
            << format_double(sol.storage_energy[s]) << ","
            << format_double(sol.storage_duration(catalog.storages[s], static_cast<int>(s))) << ","
            << format_double(sol.cm_storage.empty() ? 0.0 : sol.cm_storage[s]) << "\n";
    }
}

void write_prices_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                      const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "scenario_id,interval_id,weight_hours,price_per_mwh\n";
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        for (int t = 0; t < sc.num_intervals(); ++t)
            out << sc.id << "," << t << "," << format_double(sc.weight_hours[static_cast<std::size_t>(t)])
                << "," << format_double(sol.dispatch[w].price[static_cast<std::size_t>(t)]) << "\n";
    }
}

void write_dispatch_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                        const TechnologyCatalog& catalog, const UnservedSeries& unserved,
                        const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "scenario_id,interval_id,weight_hours";
    for (const auto& g : catalog.generators) out << ",gen_" << g.name << "_mw";
    for (const auto& s : catalog.storages)
        out << ",charge_" << s.name << "_mw,discharge_" << s.name << "_mw,soc_" << s.name << "_mwh";
    out << ",served_fixed_mw,served_flexible_mw,unserved_mw\n";
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const auto& d = sol.dispatch[w];
        for (int t = 0; t < sc.num_intervals(); ++t) {
            out << sc.id << "," << t << "," << format_double(sc.weight_hours[static_cast<std::size_t>(t)]);
            for (std::size_t g = 0; g < catalog.generators.size(); ++g)
                out << "," << format_double(d.generation[g][static_cast<std::size_t>(t)]);
            for (std::size_t s = 0; s < catalog.storages.size(); ++s)
                out << "," << format_double(d.charge[s][static_cast<std::size_t>(t)]) << ","
                    << format_double(d.discharge[s][static_cast<std::size_t>(t)]) << ","
                    << format_double(d.soc[s][static_cast<std::size_t>(t)]);
            out << "," << format_double(d.served_fixed[static_cast<std::size_t>(t)]) << ","
                << format_double(d.served_flexible[static_cast<std::size_t>(t)]) << ","
                << format_double(unserved.shortfall[w][static_cast<std::size_t>(t)]) << "\n";
        }
    }
}

void write_duals_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                     const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "constraint,scenario_id,interval_id,dual\n";
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        for (int t = 0; t < sc.num_intervals(); ++t)
            out << "energy_balance," << sc.id << "," << t << ","
                << format_double(sol.dispatch[w].price[static_cast<std::size_t>(t)]) << "\n";
    }
    out << "cm_clearing,,," << format_double(sol.lambda_cm) << "\n";
    out << "emission_cap,,," << format_double(sol.lambda_ct) << "\n";
}

void write_run_summary_json(const SuiteRun& run, const std::filesystem::path& path) {
    auto out = open_out(path);
    json j;
    j["run"] = run.name;
    j["status"] = qp::to_string(run.solution.status);
    j["mode"] = to_string(run.solution.mode);
    j["objective"] = run.solution.objective;
    j["kkt_residual"] = run.solution.kkt_residual;
    j["iterations"] = run.solution.iterations;
    j["lambda_cm"] = run.solution.lambda_cm;
    j["lambda_ct"] = run.solution.lambda_ct;
    j["expected_emissions_t"] = run.solution.expected_emissions;
    j["eue_mwh"] = run.unserved.eue;
    j["welfare_true"] = run.welfare.as_dispatched.welfare;
    j["welfare_perfect_rationing"] = run.welfare.perfect_rationing.welfare;
    j["total_cost"] = run.welfare.as_dispatched.total_cost;
    // the only timestamp in any artifact lives here
    j["generated_at"] = static_cast<long long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    out << j.dump(2) << "\n";
}

void write_credits_csv(const AccreditationResult& result, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "resource,duration_h,paradigm,eue_0,eue_ref,eue_r,credit\n";
    for (const auto& e : result.estimates) {
        out << e.resource << ",";
        if (e.duration_h) out << format_double(*e.duration_h);
        out << "," << to_string(e.paradigm) << "," << format_double(e.eue_0) << ","
            << format_double(e.eue_ref) << "," << format_double(e.eue_r) << ","
            << format_double(e.credit) << "\n";
    }
}

void write_credit_curve_csv(const std::vector<StorageCurveFit>& fits,
                            const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "storage,segment,alpha,beta,zeta_lo,zeta_hi,r2,concavity_warning\n";
    for (const auto& f : fits) {
        for (std::size_t l = 0; l < f.fit.curve.segments.size(); ++l) {
            const auto& s = f.fit.curve.segments[l];
            out << f.storage << "," << l << "," << format_double(s.alpha) << ","
                << format_double(s.beta) << "," << format_double(s.zeta_lo) << ","
                << format_double(s.zeta_hi) << "," << format_double(f.fit.r2) << ","
                << (f.fit.concavity_warning ? 1 : 0) << "\n";
        }
    }
}

void write_calibration_csv(const NetConeResult& result, const TechnologyCatalog& credited,
                           const FixedCapacities& benchmark_mix, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "technology,installed_mw,gross_cost_per_mw_yr,energy_net_revenue_per_mw_yr,"
           "net_cone_uncredited_per_mw_yr,required_credit,estimated_credit\n";
    for (const auto& r : result.records) {
        out << r.technology << "," << format_double(r.installed_mw) << ","
            << format_double(r.gross_cost) << "," << format_double(r.energy_net_revenue) << ","
            << format_double(r.net_cone_uncredited) << ",";
        if (r.has_required_credit) out << format_double(r.required_credit);
        out << ",";
        const int g = credited.find_generator(r.technology);
        if (g >= 0) {
            out << format_double(credited.generators[static_cast<std::size_t>(g)].capacity_credit);
        } else {
            const int s = credited.find_storage(r.technology);
            if (s >= 0 && credited.storages[static_cast<std::size_t>(s)].credit_curve &&
                r.installed_mw > 0.0) {
                const auto& spec = credited.storages[static_cast<std::size_t>(s)];
                const double zeta = spec.duration(
                    benchmark_mix.storage_power_mw[static_cast<std::size_t>(s)],
                    benchmark_mix.storage_energy_mwh[static_cast<std::size_t>(s)]);
                out << format_double(spec.credit_curve->evaluate(zeta));
            }
        }
        out << "\n";
    }
}

void write_cm_curve_csv(const CapacityDemandCurve& curve, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "segment,kind,width_mw,price_start_per_mw_yr,price_end_per_mw_yr\n";
    out << "0,fixed," << format_double(curve.fixed_width) << "," << format_double(curve.fixed_price)
        << "," << format_double(curve.fixed_price) << "\n";
    for (std::size_t i = 0; i < curve.flex.size(); ++i)
        out << (i + 1) << ",flexible," << format_double(curve.flex[i].width) << ","
            << format_double(curve.flex[i].price_start) << ","
            << format_double(curve.flex[i].price_end) << "\n";
}

void write_metrics_csv(const SuiteRun& run, const ScenarioSet& scenarios,
                       const std::filesystem::path& path) {
    auto out = open_out(path);
    const double demand = scenarios.expected_annual_demand();
    out << "run,mu_price_served,mu_price_hours,sigma_cv_annual,sigma_cv_hourly,kappa_ccc,beta_eb,"
           "expected_served_mwh,consumer_energy_cost,consumer_capacity_cost,eue_mwh,eue_pct_demand,"
           "welfare_true,welfare_perfect_rationing\n";
    out << run.name << "," << format_double(run.metrics.mu_price_served) << ","
        << format_double(run.metrics.mu_price_hours) << ","
        << format_double(run.metrics.sigma_cv_annual) << ","
        << format_double(run.metrics.sigma_cv_hourly) << "," << format_double(run.metrics.kappa_ccc)
        << "," << format_double(run.metrics.beta_eb) << ","
        << format_double(run.metrics.expected_served_mwh) << ","
        << format_double(run.metrics.consumer_energy_cost) << ","
        << format_double(run.metrics.consumer_capacity_cost) << "," << format_double(run.unserved.eue)
        << "," << format_double(demand > 0 ? 100.0 * run.unserved.eue / demand : 0.0) << ","
        << format_double(run.welfare.as_dispatched.welfare) << ","
        << format_double(run.welfare.perfect_rationing.welfare) << "\n";
}

void write_suite_summary_csv(const RunSuiteResult& suite, const ScenarioSet& scenarios,
                             const std::filesystem::path& path) {
    auto out = open_out(path);
    const double demand = scenarios.expected_annual_demand();
    const double sw_voll = suite.eom_voll.welfare.as_dispatched.welfare;
    const double tc_voll = suite.eom_voll.welfare.as_dispatched.total_cost;
    out << "run,objective,eue_mwh,eue_pct_demand,welfare_ineff_dist,welfare_perfect_rationing,"
           "welfare_loss_pct_tc,mu_price_served,sigma_cv_annual,kappa_ccc,beta_eb,lambda_cm,"
           "lambda_ct,consumer_energy_cost,consumer_capacity_cost\n";
    for (const SuiteRun* run :
         {&suite.eom_voll, &suite.eom_pc_opt_mix, &suite.e_plus_cm, &suite.eom_pc}) {
        const double loss_pct =
            tc_voll > 0 ? 100.0 * (sw_voll - run->welfare.perfect_rationing.welfare) / tc_voll : 0.0;
        out << run->name << "," << format_double(run->solution.objective) << ","
            << format_double(run->unserved.eue) << ","
            << format_double(demand > 0 ? 100.0 * run->unserved.eue / demand : 0.0) << ","
            << format_double(run->welfare.as_dispatched.welfare) << ","
            << format_double(run->welfare.perfect_rationing.welfare) << "," << format_double(loss_pct)
            << "," << format_double(run->metrics.mu_price_served) << ","
            << format_double(run->metrics.sigma_cv_annual) << ","
            << format_double(run->metrics.kappa_ccc) << "," << format_double(run->metrics.beta_eb)
            << "," << format_double(run->solution.lambda_cm) << ","
            << format_double(run->solution.lambda_ct) << ","
            << format_double(run->metrics.consumer_energy_cost) << ","
            << format_double(run->metrics.consumer_capacity_cost) << "\n";
    }
}

void write_net_revenue_distribution_csv(const EquilibriumSolution& sol, const ScenarioSet& scenarios,
                                        const TechnologyCatalog& catalog,
                                        const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "storage,scenario_id,energy_margin,cm_revenue,annualized_cost,net_revenue\n";
    for (const auto& rec : annual_net_revenue_distribution(sol, scenarios, catalog))
        out << rec.storage << "," << rec.scenario << "," << format_double(rec.energy_margin) << ","
            << format_double(rec.cm_revenue) << "," << format_double(rec.annualized_cost) << ","
            << format_double(rec.net) << "\n";
}

void write_missing_money_csv(const std::string& run_name, const std::vector<MissingMoneyRow>& rows,
                             const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "run,technology,revenue_below_pc,revenue_at_or_above_pc,cm_revenue,annualized_cost,"
           "recovery_fraction\n";
    for (const auto& r : rows)
        out << run_name << "," << r.technology << "," << format_double(r.revenue_below_pc) << ","
            << format_double(r.revenue_at_or_above_pc) << "," << format_double(r.cm_revenue) << ","
            << format_double(r.annualized_cost) << "," << format_double(r.recovery_fraction) << "\n";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "factor,mu_price,lambda_cm,welfare,eue_mwh,d_mu_price,d_lambda_cm,d_welfare,d_eue\n";
    for (const auto& r : rows)
        out << format_double(r.factor) << "," << format_double(r.mu_price) << ","
            << format_double(r.lambda_cm) << "," << format_double(r.welfare) << ","
            << format_double(r.eue) << "," << format_double(r.d_mu_price) << ","
            << format_double(r.d_lambda_cm) << "," << format_double(r.d_welfare) << ","
            << format_double(r.d_eue) << "\n";
}

void write_error_json(const std::filesystem::path& output_dir, int exit_code,
                      const std::string& stage, const std::string& message) {
    std::filesystem::create_directories(output_dir);
    std::ofstream out(output_dir / "error.json");
    json j;
    j["exit_code"] = exit_code;
    j["stage"] = stage;
    j["message"] = message;
    out << j.dump(2) << "\n";
}

void export_run(const SuiteRun& run, const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_capacities_csv(run.solution, catalog, dir / "capacities.csv");
    write_prices_csv(run.solution, scenarios, dir / "prices.csv");
    write_dispatch_csv(run.solution, scenarios, catalog, run.unserved, dir / "dispatch.csv");
    write_duals_csv(run.solution, scenarios, dir / "duals.csv");
    write_metrics_csv(run, scenarios, dir / "metrics.csv");
    write_run_summary_json(run, dir / "run_summary.json");
    write_missing_money_csv(run.name, missing_money_split(run.solution, scenarios, catalog),
                            dir / "missing_money.csv");
    write_net_revenue_distribution_csv(run.solution, scenarios, catalog,
                                       dir / "net_revenue_distribution.csv");
}

} // namespace ldesim::io
