#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgrid/params.hpp"
#include "mgrid/state.hpp"

namespace mgrid {

/// Step-function electricity price over the day. Tiers are 1-based,
/// inclusive period ranges that must partition [1, T].
struct PriceSchedule {
    struct Tier {
        int from = 1;
        int to = 1;
        double price = 0.0;
    };
    std::vector<Tier> tiers;

    double price_at(int period_1based) const;
    void validate(int horizon) const;
};

struct ScenarioErrorModel {
    double wind_rel_std = 0.10;
    double demand_e_rel_std = 0.05;
    double price_rel_std = 0.05;
    double demand_q_rel_std = 0.05;

    void validate() const;
};

/// A day-ahead forecast plus a seeded error model; scenario content is a
/// pure function of (seed, scenario index).
struct ScenarioSet {
    DayAheadForecast forecast;
    ScenarioErrorModel errors;
    std::uint64_t seed = 0;
    int count = 1;

    /// Zero-mean Gaussian draws, std = rel_std * forecast, reproducible per
    /// (seed, scenario, period, quantity).
    ExogenousSample sample_errors(int scenario, int period) const;

    /// Forecast + error clamped at zero.
    Realization realized(int scenario, int period) const;

    /// Whole realized series of one scenario.
    std::vector<Realization> realized_series(int scenario) const;

    /// The forecast itself as a series (zero errors).
    std::vector<Realization> forecast_series() const;
};

/// Synthetic day-ahead profiles: wind within its rated cap, electric demand
/// peaking in periods 73-80, heat demand with steep morning and evening
/// climbs, and the tiered price schedule.
DayAheadForecast default_profiles(const MicrogridParams& params,
                                  const PriceSchedule& prices);

PriceSchedule default_price_schedule();

/// CSV exchange: header `period,wind,demand_e,price,demand_q`, one row per
/// period.
void write_profiles_csv(const DayAheadForecast& forecast, const std::string& path);
DayAheadForecast read_profiles_csv(const std::string& path);

}  // namespace mgrid
