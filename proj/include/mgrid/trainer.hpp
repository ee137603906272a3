#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mgrid/baselines.hpp"

namespace mgrid {

struct TrainingConfig {
    int iteration_budget = 40;
    int convergence_window = 10;
    double convergence_rel_tol = 0.01;  // (max-min)/mean over the window
    double perturbation_mw = 1.0;       // rho of the marginal-value probe
    std::uint64_t seed = 1;
    int scenario_count = 1;             // training scenarios drawn per iteration
    int minibatch = 1;                  // marginal observations averaged per update

    void validate() const;
};

struct ConvergenceTrace {
    std::vector<double> total_cost;        // realized cost of each iteration's pass
    std::vector<double> slope_change_norm; // L2 change of all slopes per iteration
    bool converged = false;
    int iterations_run() const { return static_cast<int>(total_cost.size()); }
};

struct TrainResult {
    PiecewiseLinearVfa vfa;
    ConvergenceTrace trace;
};

/// One-sided finite difference of the period value at the incoming CCGT
/// heat: solves the period twice, once from the state and once with the
/// heat read-out shifted down by rho, and returns the per-MW difference.
/// Pass the unperturbed objective when already known to save one solve.
double sample_marginal(const SystemState& state, std::span<const double> slopes, double rho,
                       const MicrogridParams& params, const ArmaParams& arma,
                       const PeriodLift& lift,
                       std::optional<double> base_objective = std::nullopt);

/// Forward-iteration training of the per-period value functions: roll a
/// scenario with the previous iteration's slopes, observe marginal values
/// by perturbation, smooth them with the harmonic stepsize and restore
/// monotonicity with SPAR. Stops early when the cost trace settles.
TrainResult train(const TrainingConfig& config, const ScenarioSet& scenarios,
                  const MicrogridParams& params, const ArmaParams& arma,
                  const PeriodLift& lift, int segment_count, const StepsizeRule& rule);

struct Policy {
    enum class Kind { Vfa, Myopic, Mpc } kind = Kind::Myopic;
    const PiecewiseLinearVfa* vfa = nullptr;  // Vfa, and Mpc with terminal_vfa
    MpcConfig mpc;
};

struct Trajectory {
    std::vector<SystemState> states;
    std::vector<Decision> decisions;
    std::vector<double> stage_costs;
    std::vector<double> heat_trace;  // 50-second samples, T*18 points
    double total_cost = 0.0;
};

/// Rolls one scenario forward under the given decision rule against the
/// realized exogenous draws.
Trajectory simulate_policy(const Policy& policy, const ScenarioSet& scenarios,
                           int scenario_index, const MicrogridParams& params,
                           const ArmaParams& arma, const PeriodLift& lift,
                           int segment_count);

/// Re-simulates a precomputed schedule (MILP baselines) through the same
/// transition path, so its costs and audits are produced identically to the
/// online policies.
Trajectory simulate_schedule(const std::vector<Decision>& decisions,
                             const ScenarioSet& scenarios, int scenario_index,
                             const MicrogridParams& params, const ArmaParams& arma);

}  // namespace mgrid
