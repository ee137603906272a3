#include "mgrid/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mgrid {

void DayAheadForecast::validate(int horizon) const {
    const auto n = static_cast<size_t>(horizon);
    if (wind.size() != n || demand_e.size() != n || price.size() != n || demand_q.size() != n)
        throw ConfigError("forecast: profile arrays must all have length " +
                          std::to_string(horizon));
    auto nonneg = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; });
    };
    if (!nonneg(wind) || !nonneg(demand_e) || !nonneg(price) || !nonneg(demand_q))
        throw ConfigError("forecast: profiles must be nonnegative");
}

double stage_cost(const SystemState& state, const Decision& d, const MicrogridParams& p) {
    const double fuel = p.fc.cost_coefficient * d.fc_power +
                        p.ccgt_electric.cost_coefficient * p.ccgt_electric_output(d.gas_flow) +
                        p.gb.cost_coefficient * d.gb_heat;
    const double trade = state.price * d.grid_power;
    const double curtail = p.penalties.wind_curtailment * d.wind_curtail +
                           p.penalties.load_curtailment * d.load_curtail +
                           p.penalties.heat_curtailment * d.heat_curtail;
    return p.period_hours * (fuel + trade + curtail);
}

Realization realized_state(const ForecastRow& f, const ExogenousSample& e) {
    Realization r;
    r.wind = std::max(0.0, f.wind + e.wind_error);
    r.demand_e = std::max(0.0, f.demand_e + e.demand_e_error);
    r.price = std::max(0.0, f.price + e.price_error);
    r.demand_q = std::max(0.0, f.demand_q + e.demand_q_error);
    return r;
}

SystemState transition(const SystemState& s, const Decision& d, const ExogenousSample& exo,
                       const ForecastRow& forecast_next, const MicrogridParams& p,
                       const ArmaParams& arma) {
    SystemState next;
    next.fc_power_prev = d.fc_power;
    next.ccgt_power = p.ccgt_electric_output(d.gas_flow);
    next.soc = s.soc + (d.charge_power * p.storage.eta_charge -
                        d.discharge_power / p.storage.eta_discharge) *
                           p.period_hours;
    next.gb_heat_prev = d.gb_heat;
    next.hp_heat_prev = d.hp_heat;
    next.grid_power_prev = d.grid_power;

    AugmentedCcgtState aug = s.ccgt_aug;
    for (int k = 0; k < arma.samples_per_period; ++k) aug = step(aug, d.gas_flow, arma);
    next.ccgt_aug = aug;

    const Realization r = realized_state(forecast_next, exo);
    next.wind_available = r.wind;
    next.demand_e = r.demand_e;
    next.price = r.price;
    next.demand_q = r.demand_q;
    return next;
}

SystemState transition(const SystemState& s, const Decision& d, const ExogenousSample& exo,
                       const DayAheadForecast& forecast, int next_index,
                       const MicrogridParams& p, const ArmaParams& arma) {
    if (next_index < 0 || next_index >= forecast.periods())
        throw std::out_of_range("transition: horizon index " + std::to_string(next_index) +
                                " outside forecast of length " +
                                std::to_string(forecast.periods()));
    return transition(s, d, exo, forecast.row(next_index), p, arma);
}

SystemState make_initial_state(const MicrogridParams& p, const ArmaParams& arma,
                               const Realization& first) {
    SystemState s;
    s.fc_power_prev = p.fc.power_min;
    s.ccgt_aug = AugmentedCcgtState::steady(p.ccgt_initial_heat, arma);
    // electric output consistent with the steady gas that holds the initial heat
    const double gas0 = p.ccgt_initial_heat / arma.steady_state_gain();
    s.ccgt_power = p.ccgt_electric_output(gas0);
    s.soc = p.storage.soc_initial;
    s.gb_heat_prev = p.gb.power_min;
    s.hp_heat_prev = p.hp.power_min;
    s.grid_power_prev = 0.0;
    s.wind_available = first.wind;
    s.demand_e = first.demand_e;
    s.price = first.price;
    s.demand_q = first.demand_q;
    return s;
}

}  // namespace mgrid
