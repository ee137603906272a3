// Command-line front end: train the value functions, evaluate and compare
// dispatch policies, and emit plot-ready CSV/JSON artifacts.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgrid/config.hpp"

using namespace mgrid;
namespace fs = std::filesystem;
using nlohmann::json;

#ifndef MG_BUILD_ID
#define MG_BUILD_ID "unknown"
#endif

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Write-then-rename so partial files never appear under the final name.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
    }
    fs::rename(tmp, path);
}

struct Manifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    void write() const {
        json j;
        j["command"] = command;
        j["config"] = config_path.empty() ? "(defaults)" : config_path;
        j["seed"] = seed;
        j["out_dir"] = out_dir;
        j["build_id"] = MG_BUILD_ID;
        j["wall_seconds"] = wall_seconds;
        j["outputs"] = outputs;
        write_atomic(fs::path(out_dir) / "manifest.json", j.dump(2) + "\n");
    }
};

/// Fan scenario indices out to a small worker pool; exceptions surface after
/// the join.
void parallel_scenarios(int count, const std::function<void(int)>& work) {
    const int workers =
        std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), count));
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) work(k);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct ScenarioOutcome {
    double cost = 0.0;
    double wind_curtail = 0.0;
    double load_curtail = 0.0;
    double heat_curtail = 0.0;
    std::vector<SystemState> states;
    std::vector<Decision> decisions;
    std::vector<double> stage_costs;
    std::vector<double> heat_trace;
};

struct Evaluation {
    std::string policy;
    std::vector<ScenarioOutcome> outcomes;
    double runtime_s = 0.0;

    double mean_cost() const {
        double s = 0.0;
        for (const auto& o : outcomes) s += o.cost;
        return s / static_cast<double>(outcomes.size());
    }
    double std_cost() const {
        const double m = mean_cost();
        double s = 0.0;
        for (const auto& o : outcomes) s += (o.cost - m) * (o.cost - m);
        return std::sqrt(s / static_cast<double>(outcomes.size()));
    }
};

ScenarioOutcome outcome_from_trajectory(const Trajectory& t, const MicrogridParams& p) {
    ScenarioOutcome o;
    o.cost = t.total_cost;
    o.states = t.states;
    o.decisions = t.decisions;
    o.stage_costs = t.stage_costs;
    o.heat_trace = t.heat_trace;
    for (const Decision& d : t.decisions) {
        o.wind_curtail += d.wind_curtail * p.period_hours;
        o.load_curtail += d.load_curtail * p.period_hours;
        o.heat_curtail += d.heat_curtail * p.period_hours;
    }
    return o;
}

/// Evaluates one policy over the common scenario set.
Evaluation evaluate_policy(const std::string& policy, const EngineConfig& cfg,
                           const ScenarioSet& scen, const PeriodLift& lift,
                           const PiecewiseLinearVfa* vfa) {
    Evaluation ev;
    ev.policy = policy;
    ev.outcomes.resize(static_cast<size_t>(scen.count));
    const double started = now_seconds();

    parallel_scenarios(scen.count, [&](int k) {
        if (policy == "myopic" || policy == "adp" || policy == "mpc") {
            Policy pol;
            if (policy == "myopic") pol.kind = Policy::Kind::Myopic;
            if (policy == "adp") {
                pol.kind = Policy::Kind::Vfa;
                pol.vfa = vfa;
            }
            if (policy == "mpc") {
                pol.kind = Policy::Kind::Mpc;
                pol.mpc = cfg.mpc;
                pol.vfa = cfg.mpc.terminal_vfa ? vfa : nullptr;
            }
            const Trajectory t =
                simulate_policy(pol, scen, k, cfg.mg, cfg.arma, lift, cfg.vfa_segments);
            ev.outcomes[static_cast<size_t>(k)] = outcome_from_trajectory(t, cfg.mg);
        } else if (policy == "milp") {
            const SystemState s0 = make_initial_state(cfg.mg, cfg.arma, scen.realized(k, 0));
            const auto series = scen.realized_series(k);
            const ScheduleResult r = full_horizon_milp(s0, series, cfg.mg, cfg.arma, lift,
                                                       BinaryMode::BranchAndBound);
            if (r.status != LpStatus::Optimal)
                throw SolverError(std::string("milp scenario ") + std::to_string(k) + ": " +
                                  to_string(r.status));
            const Trajectory t = simulate_schedule(r.decisions, scen, k, cfg.mg, cfg.arma);
            ev.outcomes[static_cast<size_t>(k)] = outcome_from_trajectory(t, cfg.mg);
        } else if (policy == "milp-day-ahead") {
            const SystemState s0 = make_initial_state(cfg.mg, cfg.arma, scen.realized(k, 0));
            const DayAheadResult da = day_ahead_milp(s0, scen, k, cfg.mg, cfg.arma, lift);
            if (da.schedule.status != LpStatus::Optimal)
                throw SolverError(std::string("day-ahead scenario ") + std::to_string(k) +
                                  ": " + to_string(da.schedule.status));
            const Trajectory t =
                simulate_schedule(da.realized_decisions, scen, k, cfg.mg, cfg.arma);
            ScenarioOutcome o = outcome_from_trajectory(t, cfg.mg);
            o.cost = da.realized_cost;
            ev.outcomes[static_cast<size_t>(k)] = std::move(o);
        } else if (policy == "milp-static") {
            const SystemState s0 = make_initial_state(cfg.mg, cfg.arma, scen.realized(k, 0));
            const auto series = scen.realized_series(k);
            const ScheduleResult r = static_hub_variant(s0, series, cfg.mg, cfg.arma, lift,
                                                        BinaryMode::BranchAndBound);
            if (r.status != LpStatus::Optimal)
                throw SolverError(std::string("milp-static scenario ") + std::to_string(k) +
                                  ": " + to_string(r.status));
            ScenarioOutcome o;
            o.cost = r.cost;
            o.decisions = r.decisions;
            o.heat_trace = r.heat_trace;
            // states under the hub's own model: exogenous from the series,
            // storage and lags accumulated from the schedule
            SystemState s = s0;
            for (int t2 = 0; t2 < cfg.mg.horizon; ++t2) {
                s.wind_available = series[static_cast<size_t>(t2)].wind;
                s.demand_e = series[static_cast<size_t>(t2)].demand_e;
                s.price = series[static_cast<size_t>(t2)].price;
                s.demand_q = series[static_cast<size_t>(t2)].demand_q;
                o.states.push_back(s);
                const Decision& d = r.decisions[static_cast<size_t>(t2)];
                o.stage_costs.push_back(stage_cost(s, d, cfg.mg));
                o.wind_curtail += d.wind_curtail * cfg.mg.period_hours;
                o.load_curtail += d.load_curtail * cfg.mg.period_hours;
                o.heat_curtail += d.heat_curtail * cfg.mg.period_hours;
                if (t2 + 1 < cfg.mg.horizon)
                    s = transition(s, d, {}, ForecastRow{}, cfg.mg, cfg.arma);
            }
            ev.outcomes[static_cast<size_t>(k)] = std::move(o);
        } else {
            throw ConfigError("unknown policy '" + policy + "'");
        }
    });
    ev.runtime_s = now_seconds() - started;
    return ev;
}

void write_trace_csv(const fs::path& path, const ScenarioOutcome& o,
                     const EngineConfig& cfg, const PeriodLift& lift) {
    std::ostringstream os;
    os.precision(10);
    os << "period,wind,demand_e,price,demand_q,fc_power,gas_flow,ccgt_power_e,grid_power,"
          "charge_power,discharge_power,soc,wind_curtail,load_curtail,gb_heat,hp_heat,"
          "ccgt_heat,heat_curtail,stage_cost\n";
    for (size_t t = 0; t < o.decisions.size(); ++t) {
        const SystemState& s = o.states[t];
        const Decision& d = o.decisions[t];
        os << (t + 1) << "," << s.wind_available << "," << s.demand_e << "," << s.price << ","
           << s.demand_q << "," << d.fc_power << "," << d.gas_flow << ","
           << cfg.mg.ccgt_electric_output(d.gas_flow) << "," << d.grid_power << ","
           << d.charge_power << "," << d.discharge_power << "," << s.soc << ","
           << d.wind_curtail << "," << d.load_curtail << "," << d.gb_heat << "," << d.hp_heat
           << "," << lift.end_heat(s.ccgt_aug, d.gas_flow) << "," << d.heat_curtail << ","
           << o.stage_costs[t] << "\n";
    }
    write_atomic(path, os.str());
}

void write_heat_csv(const fs::path& path, const ScenarioOutcome& o, int samples_per_period) {
    std::ostringstream os;
    os.precision(10);
    os << "period,sample,heat_mw\n";
    for (size_t k = 0; k < o.heat_trace.size(); ++k)
        os << (k / samples_per_period + 1) << "," << (k % samples_per_period + 1) << ","
           << o.heat_trace[k] << "\n";
    write_atomic(path, os.str());
}

void write_summary_json(const fs::path& path, const Evaluation& ev, const ScenarioSet& scen) {
    json j;
    j["policy"] = ev.policy;
    j["scenarios"] = scen.count;
    j["seed"] = scen.seed;
    j["mean_cost"] = ev.mean_cost();
    j["std_cost"] = ev.std_cost();
    j["runtime_s"] = ev.runtime_s;
    json per = json::array();
    for (size_t k = 0; k < ev.outcomes.size(); ++k) {
        const auto& o = ev.outcomes[k];
        per.push_back({{"scenario", k},
                       {"total_cost", o.cost},
                       {"wind_curtail_mwh", o.wind_curtail},
                       {"load_curtail_mwh", o.load_curtail},
                       {"heat_curtail_mwh", o.heat_curtail}});
    }
    j["per_scenario"] = per;
    write_atomic(path, j.dump(2) + "\n");
}

PiecewiseLinearVfa train_and_save(const EngineConfig& cfg, const PeriodLift& lift,
                                  const fs::path& out, Manifest& manifest) {
    const ScenarioSet tscen = make_training_scenarios(cfg);
    const TrainResult result = train(cfg.training, tscen, cfg.mg, cfg.arma, lift,
                                     cfg.vfa_segments, cfg.stepsize);
    write_atomic(out / "vfa.json", result.vfa.to_json() + "\n");
    std::ostringstream os;
    os.precision(12);
    os << "iteration,total_cost,slope_change_norm\n";
    for (int i = 0; i < result.trace.iterations_run(); ++i)
        os << (i + 1) << "," << result.trace.total_cost[static_cast<size_t>(i)] << ","
           << result.trace.slope_change_norm[static_cast<size_t>(i)] << "\n";
    write_atomic(out / "convergence.csv", os.str());
    manifest.outputs.push_back("vfa.json");
    manifest.outputs.push_back("convergence.csv");
    std::cout << "training: " << result.trace.iterations_run() << " iterations, "
              << (result.trace.converged ? "converged" : "budget exhausted")
              << ", final cost " << result.trace.total_cost.back() << " $\n";
    return result.vfa;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heat-and-power microgrid dispatch: PLF-ADP training, policy evaluation "
                 "and baselines"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> scenarios_override;
    app.add_option("--config", config_path, "JSON config file (defaults when omitted)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed_override, "override the evaluation scenario seed");
    app.add_option("--scenarios", scenarios_override, "override the scenario count");

    auto* cmd_train = app.add_subcommand("train", "fit the value functions, write vfa.json");
    auto* cmd_evaluate = app.add_subcommand("evaluate", "run one policy over the scenario set");
    auto* cmd_compare =
        app.add_subcommand("compare", "cost table across policies on shared scenarios");
    auto* cmd_gen = app.add_subcommand("gen-profiles", "write the day-ahead profiles CSV");
    auto* cmd_dump =
        app.add_subcommand("dump-lp", "write the first-period dispatch LP as text");
    for (auto* sub : {cmd_train, cmd_evaluate, cmd_compare, cmd_gen, cmd_dump})
        sub->fallthrough();

    std::string policy = "adp";
    cmd_evaluate->add_option("--policy", policy,
                             "adp | myopic | mpc | milp | milp-day-ahead | milp-static");

    CLI11_PARSE(app, argc, argv);

    const double started = now_seconds();
    try {
        EngineConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (seed_override) cfg.scenario_seed = *seed_override;
        if (scenarios_override) cfg.scenario_count = *scenarios_override;
        cfg.validate();

        fs::create_directories(out_dir);
        Manifest manifest;
        manifest.config_path = config_path;
        manifest.seed = cfg.scenario_seed;
        manifest.out_dir = out_dir;

        const PeriodLift lift = build_period_lift(cfg.arma);
        const ScenarioSet scen = make_scenarios(cfg);

        if (cmd_gen->parsed()) {
            manifest.command = "gen-profiles";
            write_profiles_csv(scen.forecast, (fs::path(out_dir) / "profiles.csv").string());
            manifest.outputs.push_back("profiles.csv");
            std::cout << "wrote " << (fs::path(out_dir) / "profiles.csv").string() << "\n";
        } else if (cmd_dump->parsed()) {
            manifest.command = "dump-lp";
            const SystemState s0 = make_initial_state(cfg.mg, cfg.arma, scen.realized(0, 0));
            const std::vector<double> zeros(static_cast<size_t>(cfg.vfa_segments), 0.0);
            const LinearProgram lp =
                build_subproblem(s0, zeros, {false, false}, cfg.mg, lift);
            std::ostringstream os;
            lp.write_text(os);
            write_atomic(fs::path(out_dir) / "subproblem.lp.txt", os.str());
            manifest.outputs.push_back("subproblem.lp.txt");
            std::cout << "wrote " << (fs::path(out_dir) / "subproblem.lp.txt").string() << "\n";
        } else if (cmd_train->parsed()) {
            manifest.command = "train";
            train_and_save(cfg, lift, out_dir, manifest);
        } else if (cmd_evaluate->parsed()) {
            manifest.command = "evaluate --policy " + policy;
            std::optional<PiecewiseLinearVfa> vfa;
            if (policy == "adp" || (policy == "mpc" && cfg.mpc.terminal_vfa)) {
                const fs::path vfa_path = fs::path(out_dir) / "vfa.json";
                if (!fs::exists(vfa_path))
                    throw ConfigError("policy '" + policy + "' needs " + vfa_path.string() +
                                      "; run train first");
                vfa = PiecewiseLinearVfa::load(vfa_path.string());
            }
            const Evaluation ev =
                evaluate_policy(policy, cfg, scen, lift, vfa ? &*vfa : nullptr);
            write_summary_json(fs::path(out_dir) / ("summary_" + policy + ".json"), ev, scen);
            manifest.outputs.push_back("summary_" + policy + ".json");
            for (int k = 0; k < scen.count; ++k) {
                const std::string tag = policy + "_s" + std::to_string(k);
                write_trace_csv(fs::path(out_dir) / ("trace_" + tag + ".csv"),
                                ev.outcomes[static_cast<size_t>(k)], cfg, lift);
                write_heat_csv(fs::path(out_dir) / ("heat_" + tag + ".csv"),
                               ev.outcomes[static_cast<size_t>(k)],
                               cfg.arma.samples_per_period);
                manifest.outputs.push_back("trace_" + tag + ".csv");
                manifest.outputs.push_back("heat_" + tag + ".csv");
            }
            std::cout << policy << ": mean cost " << ev.mean_cost() << " $ over "
                      << scen.count << " scenarios (std " << ev.std_cost() << ")\n";
        } else if (cmd_compare->parsed()) {
            manifest.command = "compare";
            std::optional<PiecewiseLinearVfa> vfa;
            const fs::path vfa_path = fs::path(out_dir) / "vfa.json";
            if (fs::exists(vfa_path)) {
                vfa = PiecewiseLinearVfa::load(vfa_path.string());
            } else {
                std::cout << "no vfa.json in " << out_dir << "; training first\n";
                vfa = train_and_save(cfg, lift, out_dir, manifest);
            }
            const std::vector<std::string> policies = {"milp", "milp-day-ahead", "adp", "mpc",
                                                       "myopic"};
            std::vector<Evaluation> evals;
            for (const auto& pol : policies)
                evals.push_back(evaluate_policy(pol, cfg, scen, lift, &*vfa));
            const double myopic_mean = evals.back().mean_cost();

            std::ostringstream os;
            os.precision(10);
            os << "policy,mean_cost,std_cost,pct_vs_myopic,runtime_s,scenarios\n";
            std::printf("%-16s %14s %12s %10s %10s\n", "policy", "mean cost $", "std $",
                        "% vs myo", "runtime s");
            for (const auto& ev : evals) {
                const double pct = 100.0 * (ev.mean_cost() - myopic_mean) / myopic_mean;
                os << ev.policy << "," << ev.mean_cost() << "," << ev.std_cost() << "," << pct
                   << "," << ev.runtime_s << "," << scen.count << "\n";
                std::printf("%-16s %14.2f %12.2f %+9.2f%% %10.2f\n", ev.policy.c_str(),
                            ev.mean_cost(), ev.std_cost(), pct, ev.runtime_s);
            }
            write_atomic(fs::path(out_dir) / "comparison.csv", os.str());
            manifest.outputs.push_back("comparison.csv");
        }

        manifest.wall_seconds = now_seconds() - started;
        manifest.write();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
