#include "mgrid/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mgrid/model.hpp"

namespace mgrid {

void TrainingConfig::validate() const {
    if (iteration_budget < 1) throw ConfigError("training.iteration_budget must be >= 1");
    if (convergence_window < 2) throw ConfigError("training.convergence_window must be >= 2");
    if (!(convergence_rel_tol > 0.0))
        throw ConfigError("training.convergence_rel_tol must be positive");
    if (!(perturbation_mw > 0.0)) throw ConfigError("training.perturbation_mw must be positive");
    if (scenario_count < 1) throw ConfigError("training.scenario_count must be >= 1");
    if (minibatch < 1) throw ConfigError("training.minibatch must be >= 1");
}

double sample_marginal(const SystemState& state, std::span<const double> slopes, double rho,
                       const MicrogridParams& params, const ArmaParams& arma,
                       const PeriodLift& lift, std::optional<double> base_objective) {
    double v_base;
    if (base_objective) {
        v_base = *base_objective;
    } else {
        const SubproblemResult r = solve_period(state, slopes, params, lift);
        if (r.status != LpStatus::Optimal)
            throw SolverError(std::string("marginal: base subproblem ") + to_string(r.status));
        v_base = r.objective;
    }
    SystemState shifted = state;
    shifted.ccgt_aug = shift_output(state.ccgt_aug, -rho, arma);
    const SubproblemResult lo = solve_period(shifted, slopes, params, lift);
    if (lo.status != LpStatus::Optimal)
        throw SolverError(std::string("marginal: perturbed subproblem ") + to_string(lo.status));
    return (v_base - lo.objective) / rho;
}

namespace {

double slope_l2_diff(const PiecewiseLinearVfa& a, const PiecewiseLinearVfa& b) {
    double s = 0.0;
    for (size_t t = 0; t < a.slopes.size(); ++t)
        for (size_t k = 0; k < a.slopes[t].size(); ++k) {
            const double d = a.slopes[t][k] - b.slopes[t][k];
            s += d * d;
        }
    return std::sqrt(s);
}

}  // namespace

TrainResult train(const TrainingConfig& config, const ScenarioSet& scenarios,
                  const MicrogridParams& params, const ArmaParams& arma,
                  const PeriodLift& lift, int segment_count, const StepsizeRule& rule) {
    config.validate();
    if (scenarios.count < 1) throw ConfigError("training: scenario set is empty");
    const int T = params.horizon;
    const double q_min = params.ccgt_heat.power_min;
    const double rho = config.perturbation_mw;

    TrainResult out;
    out.vfa = PiecewiseLinearVfa::zeros(T - 1, q_min, params.ccgt_heat.power_max,
                                        segment_count);
    const std::vector<double> terminal_zeros(static_cast<size_t>(segment_count), 0.0);

    std::mt19937_64 rng(config.seed);
    const int pool = std::min(config.scenario_count, scenarios.count);

    for (int n = 1; n <= config.iteration_budget; ++n) {
        const int scen = static_cast<int>(
            std::uniform_int_distribution<int>(0, pool - 1)(rng));
        const PiecewiseLinearVfa before = out.vfa;

        SystemState s = make_initial_state(params, arma, scenarios.realized(scen, 0));
        double total_cost = 0.0;
        for (int t = 0; t < T; ++t) {
            const std::span<const double> slopes =
                (t < T - 1) ? std::span<const double>(out.vfa.slopes[static_cast<size_t>(t)])
                            : std::span<const double>(terminal_zeros);
            const SubproblemResult res = solve_period(s, slopes, params, lift);
            if (res.status != LpStatus::Optimal)
                throw SolverError("train: iteration " + std::to_string(n) + " period " +
                                  std::to_string(t) + " " + to_string(res.status));

            if (t >= 1) {
                const double q_in = heat_output(s.ccgt_aug, arma);
                if (q_in >= q_min + rho - 1e-9) {
                    double obs = sample_marginal(s, slopes, rho, params, arma, lift,
                                                 res.objective);
                    if (config.minibatch > 1) {
                        // optional expectation over the arriving information:
                        // re-draw this period's exogenous block around the
                        // same lagged state and average the marginals
                        for (int b = 1; b < config.minibatch; ++b) {
                            SystemState alt = s;
                            const ForecastRow f = scenarios.forecast.row(t);
                            std::normal_distribution<double> gauss(0.0, 1.0);
                            alt.wind_available = std::max(
                                0.0, f.wind * (1.0 + scenarios.errors.wind_rel_std * gauss(rng)));
                            alt.demand_e = std::max(
                                0.0,
                                f.demand_e * (1.0 + scenarios.errors.demand_e_rel_std * gauss(rng)));
                            alt.price = std::max(
                                0.0, f.price * (1.0 + scenarios.errors.price_rel_std * gauss(rng)));
                            alt.demand_q = std::max(
                                0.0,
                                f.demand_q * (1.0 + scenarios.errors.demand_q_rel_std * gauss(rng)));
                            obs += sample_marginal(alt, slopes, rho, params, arma, lift);
                        }
                        obs /= config.minibatch;
                    }
                    const int seg = out.vfa.segment_of(q_in);
                    update_slope(out.vfa, t - 1, seg, obs, n, rule);
                }
            }

            total_cost += stage_cost(s, res.decision, params);
            if (t + 1 < T)
                s = transition(s, res.decision, scenarios.sample_errors(scen, t + 1),
                               scenarios.forecast, t + 1, params, arma);
        }

        out.trace.total_cost.push_back(total_cost);
        out.trace.slope_change_norm.push_back(slope_l2_diff(out.vfa, before));

        const int w = config.convergence_window;
        if (n >= w) {
            const auto first = out.trace.total_cost.end() - w;
            const double mx = *std::max_element(first, out.trace.total_cost.end());
            const double mn = *std::min_element(first, out.trace.total_cost.end());
            double mean = 0.0;
            for (auto it = first; it != out.trace.total_cost.end(); ++it) mean += *it;
            mean /= w;
            if (mean != 0.0 && (mx - mn) / std::abs(mean) < config.convergence_rel_tol) {
                out.trace.converged = true;
                break;
            }
        }
    }
    return out;
}

Trajectory simulate_policy(const Policy& policy, const ScenarioSet& scenarios,
                           int scenario_index, const MicrogridParams& params,
                           const ArmaParams& arma, const PeriodLift& lift,
                           int segment_count) {
    const int T = params.horizon;
    const std::vector<double> zeros(static_cast<size_t>(segment_count), 0.0);

    Trajectory traj;
    traj.heat_trace.reserve(static_cast<size_t>(T) * arma.samples_per_period);
    SystemState s = make_initial_state(params, arma, scenarios.realized(scenario_index, 0));
    for (int t = 0; t < T; ++t) {
        Decision d;
        switch (policy.kind) {
            case Policy::Kind::Myopic:
                d = myopic_decide(s, params, lift, segment_count);
                break;
            case Policy::Kind::Vfa: {
                const std::span<const double> slopes =
                    (policy.vfa != nullptr && t < policy.vfa->periods())
                        ? std::span<const double>(policy.vfa->slopes[static_cast<size_t>(t)])
                        : std::span<const double>(zeros);
                const SubproblemResult r = solve_period(s, slopes, params, lift);
                if (r.status != LpStatus::Optimal)
                    throw SolverError("vfa policy: period " + std::to_string(t) + " " +
                                      to_string(r.status));
                d = r.decision;
                break;
            }
            case Policy::Kind::Mpc:
                d = mpc_decide(s, t, policy.mpc, scenarios, scenario_index, params, lift,
                               policy.vfa);
                break;
        }
        const auto seg = intra_period_trace(s.ccgt_aug, d.gas_flow, arma);
        traj.heat_trace.insert(traj.heat_trace.end(), seg.begin(), seg.end());
        traj.states.push_back(s);
        traj.decisions.push_back(d);
        traj.stage_costs.push_back(stage_cost(s, d, params));
        traj.total_cost += traj.stage_costs.back();
        if (t + 1 < T)
            s = transition(s, d, scenarios.sample_errors(scenario_index, t + 1),
                           scenarios.forecast, t + 1, params, arma);
    }
    return traj;
}

Trajectory simulate_schedule(const std::vector<Decision>& decisions,
                             const ScenarioSet& scenarios, int scenario_index,
                             const MicrogridParams& params, const ArmaParams& arma) {
    const int T = params.horizon;
    if (static_cast<int>(decisions.size()) != T)
        throw std::invalid_argument("simulate_schedule: schedule length does not match horizon");
    Trajectory traj;
    traj.heat_trace.reserve(static_cast<size_t>(T) * arma.samples_per_period);
    SystemState s = make_initial_state(params, arma, scenarios.realized(scenario_index, 0));
    for (int t = 0; t < T; ++t) {
        const Decision& d = decisions[static_cast<size_t>(t)];
        const auto seg = intra_period_trace(s.ccgt_aug, d.gas_flow, arma);
        traj.heat_trace.insert(traj.heat_trace.end(), seg.begin(), seg.end());
        traj.states.push_back(s);
        traj.decisions.push_back(d);
        traj.stage_costs.push_back(stage_cost(s, d, params));
        traj.total_cost += traj.stage_costs.back();
        if (t + 1 < T)
            s = transition(s, d, scenarios.sample_errors(scenario_index, t + 1),
                           scenarios.forecast, t + 1, params, arma);
    }
    return traj;
}

}  // namespace mgrid
