#include "ldesim/domain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ldesim {

int ScenarioSet::find_profile(const std::string& key) const {
    for (std::size_t i = 0; i < profile_keys.size(); ++i)
        if (profile_keys[i] == key) return static_cast<int>(i);
    return -1;
}

double ScenarioSet::expected_annual_demand() const {
    double total = 0.0;
    for (const auto& sc : scenarios)
        for (int t = 0; t < sc.num_intervals(); ++t)
            total += sc.probability_weight * sc.weight_hours[t] *
                     (sc.fixed_demand[t] + sc.flexible_demand[t]);
    return total;
}

double ScenarioSet::peak_fixed_demand() const {
    double peak = 0.0;
    for (const auto& sc : scenarios)
        for (double d : sc.fixed_demand) peak = std::max(peak, d);
    return peak;
}

double CreditCurve::envelope(double zeta) const {
    if (segments.empty()) return 0.0;
    double v = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) v = std::min(v, s.alpha + s.beta * zeta);
    return v;
}

double CreditCurve::evaluate(double zeta) const {
    if (segments.empty()) return 0.0;
    return std::clamp(envelope(zeta), 0.0, 1.0);
}

void CreditCurve::scale(double factor) {
    for (auto& s : segments) {
        s.alpha *= factor;
        s.beta *= factor;
    }
}

std::vector<std::string> CreditCurve::check() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < segments.size(); ++l) {
        const auto& s = segments[l];
        if (s.beta < -1e-12) out.push_back("segment " + std::to_string(l) + " has negative slope");
        if (s.zeta_hi < s.zeta_lo) out.push_back("segment " + std::to_string(l) + " has inverted range");
        if (l > 0) {
            const auto& p = segments[l - 1];
            if (s.beta > p.beta + 1e-12)
                out.push_back("slope increases at segment " + std::to_string(l) + " (curve not concave)");
            const double left = p.alpha + p.beta * p.zeta_hi;
            const double right = s.alpha + s.beta * s.zeta_lo;
            if (std::abs(p.zeta_hi - s.zeta_lo) > 1e-9)
                out.push_back("segment ranges not contiguous at " + std::to_string(l));
            if (std::abs(left - right) > 1e-9 * std::max(1.0, std::abs(left)))
                out.push_back("discontinuity at breakpoint " + std::to_string(l));
        }
    }
    return out;
}

int TechnologyCatalog::find_generator(const std::string& name) const {
    for (std::size_t i = 0; i < generators.size(); ++i)
        if (generators[i].name == name) return static_cast<int>(i);
    return -1;
}

int TechnologyCatalog::find_storage(const std::string& name) const {
    for (std::size_t i = 0; i < storages.size(); ++i)
        if (storages[i].name == name) return static_cast<int>(i);
    return -1;
}

const GeneratorSpec* TechnologyCatalog::reference() const {
    const int g = find_generator(reference_generator);
    return g >= 0 ? &generators[static_cast<std::size_t>(g)] : nullptr;
}

TruncatedWidths truncate_demand_for_price_cap(double d_fix, double d_flex, double voll, double pc) {
    if (!(voll > 0.0)) throw std::invalid_argument("truncate: VOLL must be positive");
    if (!(pc > 0.0)) throw std::invalid_argument("truncate: price cap must be positive");
    if (pc > voll) throw std::invalid_argument("truncate: price cap exceeds VOLL");
    if (d_fix < 0.0 || d_flex < 0.0) throw std::invalid_argument("truncate: negative demand");
    const double moved = d_flex * (voll - pc) / voll;
    return {d_fix + moved, d_flex - moved};
}

EnergyDemandCurve EnergyDemandCurve::build(const ScenarioSet& set, DemandMode mode, double voll,
                                           double pc) {
    EnergyDemandCurve c;
    c.mode = mode;
    c.voll = voll;
    c.price_cap = pc;
    c.wtp_ceiling = mode == DemandMode::Capped ? pc : voll;
    c.fixed_width.resize(set.scenarios.size());
    c.flexible_width.resize(set.scenarios.size());
    for (std::size_t w = 0; w < set.scenarios.size(); ++w) {
        const auto& sc = set.scenarios[w];
        const int T = sc.num_intervals();
        c.fixed_width[w].resize(static_cast<std::size_t>(T));
        c.flexible_width[w].resize(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) {
            if (mode == DemandMode::Capped) {
                const auto tw =
                    truncate_demand_for_price_cap(sc.fixed_demand[t], sc.flexible_demand[t], voll, pc);
                c.fixed_width[w][static_cast<std::size_t>(t)] = tw.fixed_width;
                c.flexible_width[w][static_cast<std::size_t>(t)] = tw.flexible_width;
            } else {
                c.fixed_width[w][static_cast<std::size_t>(t)] = sc.fixed_demand[t];
                c.flexible_width[w][static_cast<std::size_t>(t)] = sc.flexible_demand[t];
            }
        }
    }
    return c;
}

double CapacityDemandCurve::total_width() const {
    double w = fixed_width;
    for (const auto& s : flex) w += s.width;
    return w;
}

double CapacityDemandCurve::integral() const {
    double v = fixed_price * fixed_width;
    for (const auto& s : flex) v += 0.5 * (s.price_start + s.price_end) * s.width;
    return v;
}

std::vector<std::string> CapacityDemandCurve::check() const {
    std::vector<std::string> out;
    if (!(total_width() > 0.0)) out.push_back("capacity demand curve has zero width");
    double prev = fixed_price;
    if (fixed_price < 0.0) out.push_back("negative capacity price cap");
    for (std::size_t i = 0; i < flex.size(); ++i) {
        const auto& s = flex[i];
        if (s.width < 0.0) out.push_back("flex segment " + std::to_string(i) + " has negative width");
        if (s.price_start > prev + 1e-9 * std::max(1.0, prev))
            out.push_back("capacity prices increase at segment " + std::to_string(i));
        if (s.price_end > s.price_start + 1e-9 * std::max(1.0, s.price_start))
            out.push_back("segment " + std::to_string(i) + " slopes upward");
        prev = s.price_end;
    }
    if (!flex.empty() && std::abs(flex.back().price_end) > 1e-9)
        out.push_back("capacity demand curve must end at price 0");
    return out;
}

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::EomVoll: return "EOM_VOLL";
        case RunMode::EomPc: return "EOM_PC";
        case RunMode::EPlusCm: return "E_PLUS_CM";
        case RunMode::DispatchFixedMix: return "DISPATCH_FIXED_MIX";
    }
    return "?";
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) os << i.where << ": " << i.message << "\n";
    return os.str();
}

namespace {

void check_nonneg(ValidationReport& rep, const std::string& where, const char* what, double v) {
    if (!(v >= 0.0) || std::isnan(v))
        rep.issues.push_back({where, std::string(what) + " must be nonnegative, got " + std::to_string(v)});
}

} // namespace

ValidationReport validate_inputs(const ScenarioSet& scenarios, const TechnologyCatalog& catalog,
                                 const MarketDesign& design) {
    ValidationReport rep;

    if (scenarios.scenarios.empty()) rep.issues.push_back({"scenarios", "scenario set is empty"});
    double wsum = 0.0;
    for (std::size_t w = 0; w < scenarios.scenarios.size(); ++w) {
        const auto& sc = scenarios.scenarios[w];
        const std::string swhere = "scenario[" + (sc.id.empty() ? std::to_string(w) : sc.id) + "]";
        wsum += sc.probability_weight;
        if (!(sc.probability_weight > 0.0))
            rep.issues.push_back({swhere, "probability weight must be positive"});
        const std::size_t T = sc.weight_hours.size();
        if (sc.fixed_demand.size() != T || sc.flexible_demand.size() != T)
            rep.issues.push_back({swhere, "demand series lengths do not match interval count"});
        if (sc.availability.size() != scenarios.profile_keys.size())
            rep.issues.push_back({swhere, "availability profile count does not match profile keys"});
        double hsum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const std::string iwhere = swhere + ".interval[" + std::to_string(t) + "]";
            if (!(sc.weight_hours[t] > 0.0))
                rep.issues.push_back({iwhere, "interval duration must be positive"});
            else
                hsum += sc.weight_hours[t];
            if (t < sc.fixed_demand.size()) check_nonneg(rep, iwhere, "fixed demand", sc.fixed_demand[t]);
            if (t < sc.flexible_demand.size())
                check_nonneg(rep, iwhere, "flexible demand", sc.flexible_demand[t]);
        }
        if (scenarios.horizon_hours > 0 &&
            std::abs(hsum - scenarios.horizon_hours) > 1e-6 * scenarios.horizon_hours)
            rep.issues.push_back({swhere, "interval durations sum to " + std::to_string(hsum) +
                                              " h, declared horizon is " +
                                              std::to_string(scenarios.horizon_hours) + " h"});
        for (std::size_t p = 0; p < sc.availability.size(); ++p) {
            if (sc.availability[p].size() != T) {
                rep.issues.push_back(
                    {swhere, "availability series '" +
                                 (p < scenarios.profile_keys.size() ? scenarios.profile_keys[p] : "?") +
                                 "' length mismatch"});
                continue;
            }
            for (std::size_t t = 0; t < T; ++t) {
                const double a = sc.availability[p][t];
                if (!(a >= 0.0 && a <= 1.0))
                    rep.issues.push_back({swhere + ".interval[" + std::to_string(t) + "]",
                                          "availability '" + scenarios.profile_keys[p] + "' outside [0,1]"});
            }
        }
    }
    if (!scenarios.scenarios.empty() && std::abs(wsum - 1.0) > 1e-9)
        rep.issues.push_back({"scenarios", "probability weights sum to " + std::to_string(wsum)});

    for (const auto& g : catalog.generators) {
        const std::string where = "generator[" + g.name + "]";
        check_nonneg(rep, where, "variable cost", g.variable_cost);
        check_nonneg(rep, where, "annualized capex", g.annualized_capex);
        check_nonneg(rep, where, "fixed O&M", g.fixed_om);
        check_nonneg(rep, where, "emission factor", g.emission_factor);
        if (!(g.capacity_credit >= 0.0 && g.capacity_credit <= 1.0))
            rep.issues.push_back({where, "capacity credit outside [0,1]"});
        if (!g.availability_profile_key.empty() && g.availability_profile_key != "firm" &&
            scenarios.find_profile(g.availability_profile_key) < 0)
            rep.issues.push_back({where, "availability profile '" + g.availability_profile_key +
                                             "' not present in scenario data"});
    }
    for (const auto& s : catalog.storages) {
        const std::string where = "storage[" + s.name + "]";
        check_nonneg(rep, where, "power capex", s.power_capex);
        check_nonneg(rep, where, "power fixed O&M", s.power_fixed_om);
        check_nonneg(rep, where, "energy capex", s.energy_capex);
        check_nonneg(rep, where, "energy fixed O&M", s.energy_fixed_om);
        check_nonneg(rep, where, "variable cost", s.variable_cost);
        if (!(s.charge_efficiency > 0.0 && s.charge_efficiency <= 1.0))
            rep.issues.push_back({where, "charge efficiency must be in (0,1]"});
        if (!(s.discharge_efficiency > 0.0 && s.discharge_efficiency <= 1.0))
            rep.issues.push_back({where, "discharge efficiency must be positive and at most 1"});
        if (s.credit_curve) {
            for (auto& msg : s.credit_curve->check())
                rep.issues.push_back({where + ".credit_curve", msg});
        }
    }

    if (design.price_cap > design.voll) rep.issues.push_back({"design", "price cap exceeds VOLL"});
    if (!(design.voll > 0.0)) rep.issues.push_back({"design", "VOLL must be positive"});
    if (!(design.price_cap > 0.0)) rep.issues.push_back({"design", "price cap must be positive"});
    if (design.emission_cap < 0.0) rep.issues.push_back({"design", "emission cap must be nonnegative"});
    if (design.run_mode == RunMode::EPlusCm) {
        if (!design.capacity_demand_curve)
            rep.issues.push_back({"design", "E_PLUS_CM requires a capacity demand curve"});
        else
            for (auto& msg : design.capacity_demand_curve->check())
                rep.issues.push_back({"design.capacity_demand_curve", msg});
        for (const auto& s : catalog.storages)
            if (!s.credit_curve || s.credit_curve->empty())
                rep.issues.push_back({"storage[" + s.name + "]", "E_PLUS_CM requires a credit curve"});
    }
    if (design.run_mode == RunMode::DispatchFixedMix) {
        if (!design.fixed_capacities) {
            rep.issues.push_back({"design", "DISPATCH_FIXED_MIX requires fixed capacities"});
        } else {
            const auto& f = *design.fixed_capacities;
            if (f.generator_mw.size() != catalog.generators.size() ||
                f.storage_power_mw.size() != catalog.storages.size() ||
                f.storage_energy_mwh.size() != catalog.storages.size())
                rep.issues.push_back({"design", "fixed capacity vectors do not match catalog"});
            for (double v : f.generator_mw) check_nonneg(rep, "design.fixed_capacities", "capacity", v);
            for (double v : f.storage_power_mw)
                check_nonneg(rep, "design.fixed_capacities", "capacity", v);
            for (double v : f.storage_energy_mwh)
                check_nonneg(rep, "design.fixed_capacities", "capacity", v);
        }
    }
    if (!catalog.reference_generator.empty() &&
        catalog.find_generator(catalog.reference_generator) < 0)
        rep.issues.push_back(
            {"catalog", "reference generator '" + catalog.reference_generator + "' not found"});
    return rep;
}

} // namespace ldesim
