#pragma once

#include <vector>

#include "mgrid/ccgt.hpp"

namespace mgrid {

/// Full microgrid state at a period boundary. Lagged outputs are kept for
/// the ramp constraints; exogenous quantities hold the realized values for
/// the current period.
struct SystemState {
    double fc_power_prev = 0.0;    // MW, fuel cell output of the previous period
    double ccgt_power = 0.0;       // MW, CCGT electric output set last period
    double soc = 0.0;              // MWh
    double wind_available = 0.0;   // MW
    double demand_e = 0.0;         // MW
    double price = 0.0;            // $/MWh
    double gb_heat_prev = 0.0;     // MW
    double hp_heat_prev = 0.0;     // MW
    AugmentedCcgtState ccgt_aug{}; // companion-form heat state
    double demand_q = 0.0;         // MW
    double grid_power_prev = 0.0;  // MW, signed grid exchange of the previous period
};

/// Per-period dispatch decision. grid_power is signed (positive buys from
/// the grid); everything else is nonnegative.
struct Decision {
    double fc_power = 0.0;
    double gas_flow = 0.0;
    double grid_power = 0.0;
    double charge_power = 0.0;
    double discharge_power = 0.0;
    bool charge_flag = false;
    bool discharge_flag = false;
    double wind_curtail = 0.0;
    double load_curtail = 0.0;
    double gb_heat = 0.0;
    double hp_heat = 0.0;
    double heat_curtail = 0.0;
};

/// Forecast errors arriving with the next period.
struct ExogenousSample {
    double wind_error = 0.0;
    double demand_e_error = 0.0;
    double price_error = 0.0;
    double demand_q_error = 0.0;
};

struct ForecastRow {
    double wind = 0.0;
    double demand_e = 0.0;
    double price = 0.0;
    double demand_q = 0.0;
};

/// Realized exogenous quantities, forecast plus error clamped at zero.
struct Realization {
    double wind = 0.0;
    double demand_e = 0.0;
    double price = 0.0;
    double demand_q = 0.0;
};

struct DayAheadForecast {
    std::vector<double> wind;
    std::vector<double> demand_e;
    std::vector<double> price;
    std::vector<double> demand_q;

    int periods() const { return static_cast<int>(wind.size()); }
    ForecastRow row(int t) const {
        return {wind.at(t), demand_e.at(t), price.at(t), demand_q.at(t)};
    }
    void validate(int horizon) const;
};

}  // namespace mgrid
