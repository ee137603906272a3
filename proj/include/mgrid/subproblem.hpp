#pragma once

#include <span>
#include <string>
#include <vector>

#include "mgrid/lp.hpp"
#include "mgrid/model.hpp"

namespace mgrid {

/// Thrown when a solver failure propagates out of a dispatch routine; the
/// message carries the failing period and LP status.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FlagPair {
    bool charge = false;
    bool discharge = false;
};

struct SubproblemResult {
    LpStatus status = LpStatus::NumericalFailure;
    Decision decision;
    double objective = 0.0;          // stage cost plus the VFA term, $
    double post_decision_heat = 0.0; // end-of-period CCGT heat, MW
    std::vector<double> segment_fill;
};

/// Per-period deterministic subproblem for fixed charge/discharge flags:
/// the stage cost plus the slope-weighted segment variables, subject to the
/// power and heat balances, unit bounds, ramps, storage gating, projected
/// SOC bounds, curtailment limits, the lifted CCGT dynamics, and the
/// segment linking rows. Slopes must be monotone nondecreasing.
LinearProgram build_subproblem(const SystemState& state, std::span<const double> slopes,
                               FlagPair flags, const MicrogridParams& params,
                               const PeriodLift& lift);

/// Solves the three admissible flag assignments and returns the cheapest;
/// ties resolve toward no storage action. Always feasible for states the
/// engine produces: curtailment slack and the signed grid exchange can
/// close any balance.
SubproblemResult solve_period(const SystemState& state, std::span<const double> slopes,
                              const MicrogridParams& params, const PeriodLift& lift);

enum class BinaryMode { Relaxed, BranchAndBound };
enum class HeatModel { Dynamic, StaticGain };

struct MultiPeriodResult {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<Decision> decisions;
    double objective = 0.0;
    std::vector<double> end_heat;  // per-period CCGT heat entering the balance
    std::string infeasible_row;
    int nodes_explored = 0;
    // proven optimality gap of the returned incumbent: the pruning
    // tolerance on a completed search, the distance to the root relaxation
    // when the node budget ran out first
    double bound_gap = 0.0;
};

/// One coupled program over H periods sharing storage, ramps and the lifted
/// CCGT chain. series[0] holds the exogenous values of the first decision
/// period; the state's own exogenous block is ignored. Relaxed mode leaves
/// the storage flags continuous in [0,1]; branch-and-bound searches flag
/// fixings depth-first with LP bounding until integer-feasible.
/// terminal_slopes, when nonempty, price the final period's post-decision
/// heat. The static-gain heat model replaces the lifted dynamics with the
/// steady-state conversion for the energy-hub comparison.
MultiPeriodResult solve_multi_period(const SystemState& initial_state, int horizon,
                                     std::span<const Realization> series,
                                     std::span<const double> terminal_slopes,
                                     const MicrogridParams& params, const PeriodLift& lift,
                                     BinaryMode binary_mode,
                                     HeatModel heat_model = HeatModel::Dynamic);

/// One admissible storage pattern for a period (Eq. 29 leaves exactly these
/// three: idle, charge-enabled, discharge-enabled).
enum class StorageFix : int8_t { None = 0, ChargeOnly = 1, DischargeOnly = 2 };

/// The coupled program with every period's flags pinned: the leaf program
/// branch-and-bound explores, exposed for exhaustive cross-checks.
MultiPeriodResult solve_multi_period_fixed(const SystemState& initial_state, int horizon,
                                           std::span<const Realization> series,
                                           std::span<const double> terminal_slopes,
                                           const MicrogridParams& params,
                                           const PeriodLift& lift,
                                           std::span<const StorageFix> flags,
                                           HeatModel heat_model = HeatModel::Dynamic);

}  // namespace mgrid
