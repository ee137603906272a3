#pragma once

#include <stdexcept>
#include <string>

#include "mgrid/ccgt.hpp"

namespace mgrid {

/// Thrown on invalid configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Ramp rates are quoted per hour for electric units and per minute for heat
/// units; both convert to a per-period limit.
enum class RampBasis { PerHour, PerMinute };

struct UnitParams {
    double power_min = 0.0;
    double power_max = 0.0;
    double ramp_up = 0.0;    // magnitude, in the unit's ramp basis
    double ramp_down = 0.0;  // magnitude
    RampBasis ramp_basis = RampBasis::PerHour;
    double cost_coefficient = 0.0;  // $/MWh of delivered output

    double ramp_up_per_period(double period_hours) const {
        return ramp_basis == RampBasis::PerHour ? ramp_up * period_hours
                                                : ramp_up * period_hours * 60.0;
    }
    double ramp_down_per_period(double period_hours) const {
        return ramp_basis == RampBasis::PerHour ? ramp_down * period_hours
                                                : ramp_down * period_hours * 60.0;
    }
    void validate(const std::string& name) const;
};

struct StorageParams {
    double soc_min = 0.0;       // MWh
    double soc_max = 0.0;       // MWh
    double charge_max = 0.0;    // MW
    double discharge_max = 0.0; // MW
    double eta_charge = 1.0;
    double eta_discharge = 1.0;
    double soc_initial = 0.0;   // MWh

    void validate() const;
};

struct PenaltyParams {
    double wind_curtailment = 0.0;  // $/MWh
    double load_curtailment = 0.0;
    double heat_curtailment = 0.0;

    void validate() const;
};

/// Affine electric output of the CCGT, P = a0 + b0 g over [gas_min, gas_max].
struct CcgtElectricMap {
    double a0 = 0.0;       // MW
    double b0 = 0.0;       // MW per unit gas flow
    double gas_min = 0.0;
    double gas_max = 0.0;

    void validate(const UnitParams& ccgt_electric) const;
};

/// Which CCGT heat sample enters the period heat balance.
enum class HeatBalanceSample { EndOfPeriod, PeriodAverage };

struct MicrogridParams {
    UnitParams fc;
    UnitParams ccgt_electric;
    UnitParams grid;
    UnitParams gb;
    UnitParams hp;
    UnitParams ccgt_heat;
    StorageParams storage;
    PenaltyParams penalties;
    CcgtElectricMap ccgt_map;
    double heat_pump_cop = 3.0;
    double wind_capacity = 3.6;  // MW, turbine rating capping any wind profile
    double period_hours = 0.25;
    int horizon = 96;
    double ccgt_initial_heat = 20.0;  // MW, start-of-day steady heat level
    HeatBalanceSample heat_balance_sample = HeatBalanceSample::EndOfPeriod;

    /// CCGT electric output for a given gas flow. An idle plant (zero gas)
    /// produces nothing when a0 <= 0; with a positive a0 the output is held
    /// at least at the minimum stable level.
    double ccgt_electric_output(double gas_flow) const {
        if (gas_flow == 0.0) {
            if (ccgt_map.a0 <= 0.0) return 0.0;
            return ccgt_map.a0 > ccgt_electric.power_min ? ccgt_map.a0
                                                         : ccgt_electric.power_min;
        }
        return ccgt_map.a0 + ccgt_map.b0 * gas_flow;
    }

    void validate() const;
};

/// Fills the gas-flow bounds and the electric map from the CCGT heat range
/// mapped through the ARMA steady-state gain onto the electric range.
CcgtElectricMap derive_ccgt_map(const UnitParams& ccgt_electric,
                                const UnitParams& ccgt_heat,
                                const ArmaParams& arma);

/// Parameter set equal to the published tables; the canonical config file is
/// generated from this.
MicrogridParams default_microgrid_params();
ArmaParams default_arma_params();

}  // namespace mgrid
