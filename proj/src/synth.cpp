#include "ldesim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ldesim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; the stdlib normal_distribution is implementation-defined,
// this is not.
double normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 1e-300) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Rescale toward a target mean under [lo, hi] clamping; a few passes
// land within the tolerance the generator promises.
void scale_to_mean(std::vector<double>& v, double target, double lo, double hi) {
    for (int pass = 0; pass < 4; ++pass) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (mean <= 1e-12) break;
        const double f = target / mean;
        for (double& x : v) x = std::clamp(x * f, lo, hi);
    }
}

} // namespace

ScenarioSet generate_synthetic_scenarios(const SynthConfig& cfg) {
    if (cfg.intervals_per_year < 24)
        throw std::invalid_argument("synth: need at least 24 intervals per year");
    if (cfg.years < 1) throw std::invalid_argument("synth: need at least one year");

    std::mt19937_64 rng(cfg.seed);
    const int n = cfg.intervals_per_year;
    const double w = cfg.horizon_hours / static_cast<double>(n);

    ScenarioSet set;
    set.horizon_hours = cfg.horizon_hours;
    set.profile_keys = {"solar", "wind"};

    struct RawYear {
        std::vector<double> demand, solar, wind;
    };
    std::vector<RawYear> years(static_cast<std::size_t>(cfg.years));

    for (int y = 0; y < cfg.years; ++y) {
        auto& yr = years[static_cast<std::size_t>(y)];
        yr.demand.resize(static_cast<std::size_t>(n));
        yr.solar.resize(static_cast<std::size_t>(n));
        yr.wind.resize(static_cast<std::size_t>(n));

        // smooth demand noise
        double dnoise = 0.0;
        double wstate = 0.0;
        const int drought_len = std::min(cfg.drought_intervals, n / 4);
        // late-winter window, deterministic position per year
        const int drought_start =
            n - drought_len - static_cast<int>(uniform01(rng) * 0.06 * n) - 1;

        for (int t = 0; t < n; ++t) {
            const double tau = static_cast<double>(t) / n;  // 0 = winter
            // V-shaped drought: mild at the edges, harshest at the center,
            // so scarcity has a distinct deepest interval
            double depth = 0.0;
            if (t >= drought_start && t < drought_start + drought_len && drought_len > 0) {
                const double rel = (t - drought_start + 0.5) / drought_len;  // (0,1)
                depth = 1.0 - std::abs(2.0 * rel - 1.0);
            }
            auto droughted = [&](double base, double factor) {
                return base * (1.0 - depth * (1.0 - factor));
            };

            dnoise = 0.7 * dnoise + 0.3 * normal(rng);
            double demand = 1.0 + 0.22 * std::cos(kTwoPi * tau) +
                            0.04 * std::cos(2.0 * kTwoPi * tau + 0.5) +
                            cfg.demand_noise * dnoise;
            demand = std::max(0.3, demand);
            demand = droughted(demand, cfg.drought_demand_factor);
            yr.demand[static_cast<std::size_t>(t)] = demand;

            const double solar_season = 0.5 - 0.5 * std::cos(kTwoPi * tau);  // summer high
            double solar = solar_season * (0.8 + 0.4 * uniform01(rng));
            solar = droughted(solar, cfg.drought_solar_factor);
            yr.solar[static_cast<std::size_t>(t)] = std::clamp(solar, 0.0, 1.0);

            wstate = cfg.wind_ar * wstate + std::sqrt(1.0 - cfg.wind_ar * cfg.wind_ar) * normal(rng);
            const double wind_season = 1.0 + 0.3 * std::cos(kTwoPi * tau);  // winter high
            double wind = cfg.wind_cf * wind_season * std::exp(0.55 * wstate - 0.15);
            wind = droughted(wind, cfg.drought_wind_factor);
            yr.wind[static_cast<std::size_t>(t)] = std::clamp(wind, 0.001, 0.98);
        }
        scale_to_mean(yr.solar, cfg.solar_cf, 0.0, 1.0);
        scale_to_mean(yr.wind, cfg.wind_cf, 0.001, 0.98);
    }

    // normalize demand so the global peak is exactly peak_mw
    double raw_peak = 0.0;
    for (const auto& yr : years)
        for (double d : yr.demand) raw_peak = std::max(raw_peak, d);
    for (int y = 0; y < cfg.years; ++y) {
        Scenario sc;
        sc.id = "y" + std::to_string(y + 1);
        sc.probability_weight = 1.0 / static_cast<double>(cfg.years);
        sc.weight_hours.assign(static_cast<std::size_t>(n), w);
        sc.fixed_demand.resize(static_cast<std::size_t>(n));
        sc.flexible_demand.assign(static_cast<std::size_t>(n), cfg.flexible_mw);
        for (int t = 0; t < n; ++t)
            sc.fixed_demand[static_cast<std::size_t>(t)] =
                years[static_cast<std::size_t>(y)].demand[static_cast<std::size_t>(t)] / raw_peak *
                cfg.peak_mw;
        sc.availability.push_back(std::move(years[static_cast<std::size_t>(y)].solar));
        sc.availability.push_back(std::move(years[static_cast<std::size_t>(y)].wind));
        set.scenarios.push_back(std::move(sc));
    }
    return set;
}

} // namespace ldesim
