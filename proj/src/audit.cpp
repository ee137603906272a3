#include "mgrid/audit.hpp"

#include <cmath>

namespace mgrid {

namespace {

void check_range(std::vector<ConstraintViolation>& out, const std::string& name, double value,
                 double lo, double hi, double tol) {
    if (value < lo - tol) out.push_back({name + "_lo", lo - value});
    if (value > hi + tol) out.push_back({name + "_hi", value - hi});
}

}  // namespace

std::vector<ConstraintViolation> audit_decision(const SystemState& s, const Decision& d,
                                                const MicrogridParams& p,
                                                const ArmaParams& arma, double tol) {
    std::vector<ConstraintViolation> out;
    const double dt = p.period_hours;

    // CCGT heat recomputed sample by sample, independent of the period lift
    AugmentedCcgtState aug = s.ccgt_aug;
    double heat_sum = 0.0;
    for (int k = 0; k < arma.samples_per_period; ++k) {
        aug = step(aug, d.gas_flow, arma);
        heat_sum += heat_output(aug, arma);
    }
    const double heat_end = heat_output(aug, arma);
    const double heat_balance_term = p.heat_balance_sample == HeatBalanceSample::PeriodAverage
                                         ? heat_sum / arma.samples_per_period
                                         : heat_end;
    const double ccgt_e = p.ccgt_electric_output(d.gas_flow);

    // power balance
    const double uc = d.charge_flag ? 1.0 : 0.0;
    const double ud = d.discharge_flag ? 1.0 : 0.0;
    const double power_lhs = d.fc_power + ccgt_e + d.grid_power +
                             (d.discharge_power * ud - d.charge_power * uc) +
                             (s.wind_available - d.wind_curtail) -
                             d.hp_heat / p.heat_pump_cop + d.load_curtail;
    if (std::abs(power_lhs - s.demand_e) > tol)
        out.push_back({"power_balance", std::abs(power_lhs - s.demand_e)});

    // heat balance
    const double heat_lhs = d.gb_heat + heat_balance_term + d.hp_heat + d.heat_curtail;
    if (std::abs(heat_lhs - s.demand_q) > tol)
        out.push_back({"heat_balance", std::abs(heat_lhs - s.demand_q)});

    // unit bounds
    check_range(out, "fc_bounds", d.fc_power, p.fc.power_min, p.fc.power_max, tol);
    check_range(out, "ccgt_e_bounds", ccgt_e, p.ccgt_electric.power_min,
                p.ccgt_electric.power_max, tol);
    check_range(out, "grid_bounds", d.grid_power, p.grid.power_min, p.grid.power_max, tol);
    check_range(out, "gb_bounds", d.gb_heat, p.gb.power_min, p.gb.power_max, tol);
    check_range(out, "hp_bounds", d.hp_heat, p.hp.power_min, p.hp.power_max, tol);
    check_range(out, "ccgt_q_bounds", heat_end, p.ccgt_heat.power_min, p.ccgt_heat.power_max,
                tol);
    check_range(out, "gas_bounds", d.gas_flow, p.ccgt_map.gas_min, p.ccgt_map.gas_max, tol);

    // ramps
    check_range(out, "fc_ramp", d.fc_power - s.fc_power_prev, -p.fc.ramp_down_per_period(dt),
                p.fc.ramp_up_per_period(dt), tol);
    check_range(out, "ccgt_e_ramp", ccgt_e - s.ccgt_power,
                -p.ccgt_electric.ramp_down_per_period(dt),
                p.ccgt_electric.ramp_up_per_period(dt), tol);
    check_range(out, "grid_ramp", d.grid_power - s.grid_power_prev,
                -p.grid.ramp_down_per_period(dt), p.grid.ramp_up_per_period(dt), tol);
    check_range(out, "gb_ramp", d.gb_heat - s.gb_heat_prev, -p.gb.ramp_down_per_period(dt),
                p.gb.ramp_up_per_period(dt), tol);
    check_range(out, "hp_ramp", d.hp_heat - s.hp_heat_prev, -p.hp.ramp_down_per_period(dt),
                p.hp.ramp_up_per_period(dt), tol);
    check_range(out, "ccgt_q_ramp", heat_end - heat_output(s.ccgt_aug, arma),
                -p.ccgt_heat.ramp_down_per_period(dt), p.ccgt_heat.ramp_up_per_period(dt), tol);

    // storage gating and flags
    check_range(out, "charge_gate", d.charge_power, 0.0, uc * p.storage.charge_max, tol);
    check_range(out, "discharge_gate", d.discharge_power, 0.0, ud * p.storage.discharge_max,
                tol);
    if (d.charge_flag && d.discharge_flag) out.push_back({"flag_sum", 1.0});

    // projected SOC window
    const double soc_next =
        s.soc + (d.charge_power * p.storage.eta_charge -
                 d.discharge_power / p.storage.eta_discharge) *
                    dt;
    check_range(out, "soc", soc_next, p.storage.soc_min, p.storage.soc_max, tol);

    // curtailment limits
    check_range(out, "wind_curtail", d.wind_curtail, 0.0, s.wind_available, tol);
    check_range(out, "load_curtail", d.load_curtail, 0.0, s.demand_e, tol);
    check_range(out, "heat_curtail", d.heat_curtail, 0.0, s.demand_q, tol);

    return out;
}

}  // namespace mgrid
