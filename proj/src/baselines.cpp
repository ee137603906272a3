#include "mgrid/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mgrid/model.hpp"

namespace mgrid {

Decision myopic_decide(const SystemState& state, const MicrogridParams& params,
                       const PeriodLift& lift, int segment_count) {
    const std::vector<double> zeros(static_cast<size_t>(segment_count), 0.0);
    const SubproblemResult r = solve_period(state, zeros, params, lift);
    if (r.status != LpStatus::Optimal)
        throw SolverError(std::string("myopic: subproblem ") + to_string(r.status));
    return r.decision;
}

Decision mpc_decide(const SystemState& state, int t, const MpcConfig& config,
                    const ScenarioSet& scenarios, int scenario_index,
                    const MicrogridParams& params, const PeriodLift& lift,
                    const PiecewiseLinearVfa* terminal_vfa) {
    const int T = scenarios.forecast.periods();
    if (t < 0 || t >= T) throw std::out_of_range("mpc: period index outside horizon");
    const int H = std::min(config.horizon, T - t);

    std::vector<Realization> series;
    series.reserve(static_cast<size_t>(H));
    // the current period is already observed in the state
    series.push_back({state.wind_available, state.demand_e, state.price, state.demand_q});
    for (int k = 1; k < H; ++k) {
        if (config.forecast == MpcConfig::Forecast::Perfect) {
            series.push_back(scenarios.realized(scenario_index, t + k));
        } else {
            const ForecastRow f = scenarios.forecast.row(t + k);
            series.push_back({f.wind, f.demand_e, f.price, f.demand_q});
        }
    }

    std::span<const double> terminal;
    if (config.terminal_vfa && terminal_vfa != nullptr) {
        const int vrow = t + H - 1;
        if (vrow < terminal_vfa->periods())
            terminal = terminal_vfa->slopes[static_cast<size_t>(vrow)];
    }

    const MultiPeriodResult r = solve_multi_period(state, H, series, terminal, params, lift,
                                                   BinaryMode::BranchAndBound);
    if (r.status != LpStatus::Optimal)
        throw SolverError(std::string("mpc: period ") + std::to_string(t) + " " +
                          to_string(r.status) +
                          (r.infeasible_row.empty() ? "" : " at " + r.infeasible_row));
    return r.decisions.front();
}

namespace {

ScheduleResult run_full_horizon(const SystemState& initial_state,
                                std::span<const Realization> series,
                                const MicrogridParams& params, const ArmaParams& arma,
                                const PeriodLift& lift, BinaryMode binary_mode,
                                HeatModel heat_model) {
    const int T = static_cast<int>(series.size());
    const MultiPeriodResult r = solve_multi_period(initial_state, T, series, {}, params, lift,
                                                   binary_mode, heat_model);
    ScheduleResult out;
    out.status = r.status;
    out.nodes_explored = r.nodes_explored;
    if (r.status != LpStatus::Optimal) return out;
    out.decisions = r.decisions;
    out.cost = r.objective;
    out.end_heat = r.end_heat;

    out.heat_trace.reserve(static_cast<size_t>(T) * arma.samples_per_period);
    if (heat_model == HeatModel::StaticGain) {
        for (int t = 0; t < T; ++t)
            for (int k = 0; k < arma.samples_per_period; ++k)
                out.heat_trace.push_back(out.end_heat[static_cast<size_t>(t)]);
    } else {
        AugmentedCcgtState aug = initial_state.ccgt_aug;
        for (int t = 0; t < T; ++t) {
            const auto seg =
                intra_period_trace(aug, r.decisions[static_cast<size_t>(t)].gas_flow, arma);
            out.heat_trace.insert(out.heat_trace.end(), seg.begin(), seg.end());
            for (int k = 0; k < arma.samples_per_period; ++k)
                aug = step(aug, r.decisions[static_cast<size_t>(t)].gas_flow, arma);
        }
    }
    return out;
}

}  // namespace

ScheduleResult full_horizon_milp(const SystemState& initial_state,
                                 std::span<const Realization> series,
                                 const MicrogridParams& params, const ArmaParams& arma,
                                 const PeriodLift& lift, BinaryMode binary_mode) {
    return run_full_horizon(initial_state, series, params, arma, lift, binary_mode,
                            HeatModel::Dynamic);
}

ScheduleResult static_hub_variant(const SystemState& initial_state,
                                  std::span<const Realization> series,
                                  const MicrogridParams& params, const ArmaParams& arma,
                                  const PeriodLift& lift, BinaryMode binary_mode) {
    return run_full_horizon(initial_state, series, params, arma, lift, binary_mode,
                            HeatModel::StaticGain);
}

namespace {

/// Re-prices one scheduled period against the realization: unit setpoints
/// stay frozen, the grid and the curtailments close the balances, residual
/// surplus is dumped at the matching curtailment penalty.
struct Reprice {
    Decision decision;
    double cost = 0.0;
};

Reprice reprice_period(const SystemState& s, const Decision& plan,
                       const MicrogridParams& p, const ArmaParams& arma) {
    const double dt = p.period_hours;
    AugmentedCcgtState aug = s.ccgt_aug;
    double heat_sum = 0.0;
    for (int k = 0; k < arma.samples_per_period; ++k) {
        aug = step(aug, plan.gas_flow, arma);
        heat_sum += heat_output(aug, arma);
    }
    const double q_ccgt = p.heat_balance_sample == HeatBalanceSample::PeriodAverage
                              ? heat_sum / arma.samples_per_period
                              : heat_output(aug, arma);
    const double ccgt_e = p.ccgt_electric_output(plan.gas_flow);

    LinearProgram lp;
    const int grid = lp.add_variable(
        "grid", std::max(p.grid.power_min, s.grid_power_prev - p.grid.ramp_down_per_period(dt)),
        std::min(p.grid.power_max, s.grid_power_prev + p.grid.ramp_up_per_period(dt)),
        dt * s.price);
    const int wcur = lp.add_variable("wind_curtail", 0.0, s.wind_available,
                                     dt * p.penalties.wind_curtailment);
    const int lcur = lp.add_variable("load_curtail", 0.0, s.demand_e,
                                     dt * p.penalties.load_curtailment);
    const int qcur = lp.add_variable("heat_curtail", 0.0, s.demand_q,
                                     dt * p.penalties.heat_curtailment);
    const int edump =
        lp.add_variable("surplus_dump_e", 0.0, kInf, dt * p.penalties.load_curtailment);
    const int qdump =
        lp.add_variable("surplus_dump_q", 0.0, kInf, dt * p.penalties.heat_curtailment);

    const double fixed_e = plan.fc_power + ccgt_e +
                           (plan.discharge_power - plan.charge_power) + s.wind_available -
                           plan.hp_heat / p.heat_pump_cop;
    {
        const int r = lp.add_eq("power_balance", s.demand_e - fixed_e);
        lp.set_coeff(r, grid, 1.0);
        lp.set_coeff(r, wcur, -1.0);
        lp.set_coeff(r, lcur, 1.0);
        lp.set_coeff(r, edump, -1.0);
    }
    {
        const int r =
            lp.add_eq("heat_balance", s.demand_q - plan.gb_heat - q_ccgt - plan.hp_heat);
        lp.set_coeff(r, qcur, 1.0);
        lp.set_coeff(r, qdump, -1.0);
    }
    lp.objective_offset =
        dt * (p.fc.cost_coefficient * plan.fc_power +
              p.ccgt_electric.cost_coefficient * ccgt_e + p.gb.cost_coefficient * plan.gb_heat);

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal)
        throw SolverError(std::string("day-ahead reprice: ") + to_string(sol.status));

    Reprice out;
    out.decision = plan;
    out.decision.grid_power = sol.value(grid);
    out.decision.wind_curtail = sol.value(wcur);
    out.decision.load_curtail = sol.value(lcur);
    out.decision.heat_curtail = sol.value(qcur);
    out.cost = sol.objective;
    return out;
}

}  // namespace

DayAheadResult day_ahead_milp(const SystemState& initial_state, const ScenarioSet& scenarios,
                              int scenario_index, const MicrogridParams& params,
                              const ArmaParams& arma, const PeriodLift& lift) {
    DayAheadResult out;
    const auto forecast = scenarios.forecast_series();
    out.schedule = full_horizon_milp(initial_state, forecast, params, arma, lift,
                                     BinaryMode::BranchAndBound);
    if (out.schedule.status != LpStatus::Optimal) return out;

    const int T = scenarios.forecast.periods();
    SystemState s = initial_state;
    // the initial state presented to the plan carried forecast exogenous;
    // overwrite with the realized first period
    {
        const Realization r0 = scenarios.realized(scenario_index, 0);
        s.wind_available = r0.wind;
        s.demand_e = r0.demand_e;
        s.price = r0.price;
        s.demand_q = r0.demand_q;
    }
    out.realized_cost = 0.0;
    for (int t = 0; t < T; ++t) {
        const Reprice rp =
            reprice_period(s, out.schedule.decisions[static_cast<size_t>(t)], params, arma);
        out.realized_decisions.push_back(rp.decision);
        out.realized_cost += rp.cost;
        if (t + 1 < T)
            s = transition(s, rp.decision, scenarios.sample_errors(scenario_index, t + 1),
                           scenarios.forecast, t + 1, params, arma);
    }
    return out;
}

}  // namespace mgrid
