#pragma once

#include "mgrid/params.hpp"
#include "mgrid/state.hpp"

namespace mgrid {

/// Operating cost of one period in $: fuel/operation cost of FC, CCGT and GB
/// weighted by their cost coefficients, signed grid trade at the current
/// price, and the three curtailment penalties. The heat pump has no explicit
/// term; its cost is the electricity it consumes through the power balance.
double stage_cost(const SystemState& state, const Decision& decision,
                  const MicrogridParams& params);

/// Componentwise forecast plus error, clamped at the physical floor of zero.
Realization realized_state(const ForecastRow& forecast, const ExogenousSample& exo);

/// One-period state transition. The decision is assumed feasible for the
/// state; lagged outputs are copied, storage is integrated, the CCGT
/// augmented state advances by one period of held gas, and the exogenous
/// block is replaced by forecast + error.
SystemState transition(const SystemState& state, const Decision& decision,
                       const ExogenousSample& exo, const ForecastRow& forecast_next,
                       const MicrogridParams& params, const ArmaParams& arma);

/// transition() against a full forecast; throws std::out_of_range when
/// next_index is not a valid horizon index.
SystemState transition(const SystemState& state, const Decision& decision,
                       const ExogenousSample& exo, const DayAheadForecast& forecast,
                       int next_index, const MicrogridParams& params,
                       const ArmaParams& arma);

/// Start-of-day state: lagged outputs at their minimums, storage at its
/// initial level, CCGT at the configured steady heat level, exogenous block
/// from the given realization.
SystemState make_initial_state(const MicrogridParams& params, const ArmaParams& arma,
                               const Realization& first_period);

}  // namespace mgrid
