#pragma once

#include "ldesim/domain.hpp"

#include <cstdint>

namespace ldesim {

/// Synthetic weather-year generator: seasonal demand with a winter peak
/// normalized to peak_mw exactly, solar and wind availability scaled to
/// the requested mean capacity factors, and one engineered low-renewables
/// window per year so scarcity exists. Deterministic in the seed.
struct SynthConfig {
    std::uint64_t seed = 1;
    int years = 2;
    int intervals_per_year = 336;
    double horizon_hours = 8760.0;
    double peak_mw = 100.0;
    double flexible_mw = 2.0;
    double solar_cf = 0.11;
    double wind_cf = 0.29;
    int drought_intervals = 10;
    double drought_wind_factor = 0.05;
    double drought_solar_factor = 0.3;
    double drought_demand_factor = 1.05;
    double demand_noise = 0.04;
    double wind_ar = 0.85;
};

ScenarioSet generate_synthetic_scenarios(const SynthConfig& config);

} // namespace ldesim
