#pragma once

#include <optional>
#include <vector>

#include "mgrid/audit.hpp"
#include "mgrid/scenario.hpp"
#include "mgrid/subproblem.hpp"
#include "mgrid/vfa.hpp"

namespace mgrid {

struct MpcConfig {
    int horizon = 8;  // lookahead periods, clipped at the end of day
    enum class Forecast { DayAhead, Perfect } forecast = Forecast::DayAhead;
    bool terminal_vfa = false;  // price the lookahead's final heat with a trained VFA
};

/// Single-period optimization with zero continuation value.
Decision myopic_decide(const SystemState& state, const MicrogridParams& params,
                       const PeriodLift& lift, int segment_count);

/// Receding horizon: re-optimizes over min(H, T-t) coupled periods and keeps
/// only the first decision. Period t uses the state's realized exogenous
/// values; later periods come from the scenario's forecast (or its realized
/// series under perfect foresight).
Decision mpc_decide(const SystemState& state, int t, const MpcConfig& config,
                    const ScenarioSet& scenarios, int scenario_index,
                    const MicrogridParams& params, const PeriodLift& lift,
                    const PiecewiseLinearVfa* terminal_vfa);

struct ScheduleResult {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<Decision> decisions;
    double cost = 0.0;                // objective of the schedule, $
    std::vector<double> heat_trace;   // per 50-second sample, T*18 points
    std::vector<double> end_heat;     // per-period heat entering the balance
    int nodes_explored = 0;
};

/// Full-horizon deterministic program against a given exogenous series
/// (perfect foresight when the series is the realization). The heat trace
/// reconstructs every 50-second sample from the scheduled gas flows.
ScheduleResult full_horizon_milp(const SystemState& initial_state,
                                 std::span<const Realization> series,
                                 const MicrogridParams& params, const ArmaParams& arma,
                                 const PeriodLift& lift, BinaryMode binary_mode);

/// Energy-hub counterpart: CCGT heat as an instantaneous steady-state gain
/// on the gas flow. Its trace is a per-period staircase.
ScheduleResult static_hub_variant(const SystemState& initial_state,
                                  std::span<const Realization> series,
                                  const MicrogridParams& params, const ArmaParams& arma,
                                  const PeriodLift& lift, BinaryMode binary_mode);

/// Day-ahead flavor: schedules against the forecast, then re-prices each
/// period against the realization with unit setpoints frozen; the grid
/// exchange and the curtailments re-close the balances, and any residual
/// surplus is dumped at the matching curtailment penalty.
struct DayAheadResult {
    ScheduleResult schedule;       // the plan against the forecast
    double realized_cost = 0.0;    // after re-pricing against the scenario
    std::vector<Decision> realized_decisions;
};
DayAheadResult day_ahead_milp(const SystemState& initial_state, const ScenarioSet& scenarios,
                              int scenario_index, const MicrogridParams& params,
                              const ArmaParams& arma, const PeriodLift& lift);

}  // namespace mgrid
