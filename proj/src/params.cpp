#include "mgrid/params.hpp"

#include <cmath>
#include <stdexcept>

namespace mgrid {

void UnitParams::validate(const std::string& name) const {
    if (!(power_min <= power_max))
        throw ConfigError("units." + name + ": power_min > power_max");
    if (!(ramp_up > 0.0) || !(ramp_down > 0.0))
        throw ConfigError("units." + name + ": ramp rates must be positive");
    if (!std::isfinite(cost_coefficient))
        throw ConfigError("units." + name + ": cost_coefficient not finite");
}

void StorageParams::validate() const {
    if (!(0.0 <= soc_min && soc_min <= soc_initial && soc_initial <= soc_max))
        throw ConfigError("storage: require 0 <= soc_min <= soc_initial <= soc_max");
    if (!(charge_max >= 0.0) || !(discharge_max >= 0.0))
        throw ConfigError("storage: charge_max/discharge_max must be nonnegative");
    if (!(eta_charge > 0.0 && eta_charge <= 1.0))
        throw ConfigError("storage.eta_charge must lie in (0, 1]");
    if (!(eta_discharge > 0.0 && eta_discharge <= 1.0))
        throw ConfigError("storage.eta_discharge must lie in (0, 1]");
}

void PenaltyParams::validate() const {
    if (wind_curtailment < 0.0 || load_curtailment < 0.0 || heat_curtailment < 0.0)
        throw ConfigError("penalties: curtailment penalties must be nonnegative");
}

void CcgtElectricMap::validate(const UnitParams& ccgt_electric) const {
    if (!(b0 > 0.0)) throw ConfigError("ccgt_map.b0 must be positive");
    if (!(gas_min < gas_max)) throw ConfigError("ccgt_map: gas_min >= gas_max");
    const double tol = 1e-6;
    if (a0 + b0 * gas_min < ccgt_electric.power_min - tol)
        throw ConfigError("ccgt_map: electric output at gas_min below CCGT power_min");
    if (a0 + b0 * gas_max > ccgt_electric.power_max + tol)
        throw ConfigError("ccgt_map: electric output at gas_max above CCGT power_max");
}

void MicrogridParams::validate() const {
    fc.validate("fc");
    ccgt_electric.validate("ccgt_electric");
    grid.validate("grid");
    gb.validate("gb");
    hp.validate("hp");
    ccgt_heat.validate("ccgt_heat");
    storage.validate();
    penalties.validate();
    ccgt_map.validate(ccgt_electric);
    if (!(heat_pump_cop > 0.0)) throw ConfigError("heat_pump_cop must be positive");
    if (!(wind_capacity >= 0.0)) throw ConfigError("wind_capacity must be nonnegative");
    if (!(period_hours > 0.0)) throw ConfigError("period_hours must be positive");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (ccgt_initial_heat < ccgt_heat.power_min || ccgt_initial_heat > ccgt_heat.power_max)
        throw ConfigError("ccgt_initial_heat outside the CCGT heat range");
}

CcgtElectricMap derive_ccgt_map(const UnitParams& ccgt_electric, const UnitParams& ccgt_heat,
                                const ArmaParams& arma) {
    const double gain = arma.steady_state_gain();
    CcgtElectricMap map;
    map.gas_min = ccgt_heat.power_min / gain;
    map.gas_max = ccgt_heat.power_max / gain;
    map.b0 = (ccgt_electric.power_max - ccgt_electric.power_min) / (map.gas_max - map.gas_min);
    map.a0 = ccgt_electric.power_min - map.b0 * map.gas_min;
    return map;
}

ArmaParams default_arma_params() {
    ArmaParams p;
    p.a = {1.6301, -0.6292, -0.3266, 0.2570};
    p.b = {0.2087, 0.06311, 0.3656, 0.4031};
    p.sample_interval_s = 50.0;
    p.samples_per_period = 18;
    return p;
}

MicrogridParams default_microgrid_params() {
    MicrogridParams p;
    p.fc = {0.8, 7.0, 7.0, 7.0, RampBasis::PerHour, 65.0};
    p.ccgt_electric = {6.0, 43.0, 38.0, 38.0, RampBasis::PerHour, 92.0};
    p.grid = {-6.0, 6.0, 6.0, 6.0, RampBasis::PerHour, 0.0};  // traded at p_t
    p.gb = {1.0, 15.0, 3.0, 3.0, RampBasis::PerMinute, 300.0};
    p.hp = {0.0, 5.0, 5.0, 5.0, RampBasis::PerMinute, 0.0};   // cost via its power draw
    p.ccgt_heat = {15.0, 50.0, 0.5, 0.5, RampBasis::PerMinute, 0.0};
    p.storage = {1.5, 15.0, 3.0, 3.0, 0.9, 0.9, 7.5};
    p.penalties = {200.0, 150.0, 350.0};
    p.ccgt_map = derive_ccgt_map(p.ccgt_electric, p.ccgt_heat, default_arma_params());
    p.heat_pump_cop = 3.0;
    p.wind_capacity = 3.6;
    p.period_hours = 0.25;
    p.horizon = 96;
    p.ccgt_initial_heat = 20.0;
    return p;
}

}  // namespace mgrid
