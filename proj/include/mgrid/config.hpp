#pragma once

#include <string>

#include "mgrid/trainer.hpp"

namespace mgrid {

/// Everything a run needs, loaded from one JSON config file. The canonical
/// file (config/default.json) carries the published table values; every
/// constant the engine uses lives here, none are hard-coded elsewhere.
struct EngineConfig {
    MicrogridParams mg;
    ArmaParams arma;
    PriceSchedule prices;
    ScenarioErrorModel errors;       // evaluation error model
    std::uint64_t scenario_seed = 42;
    int scenario_count = 20;
    TrainingConfig training;
    double training_error_scale = 0.0;  // scales the error model while training
    MpcConfig mpc;
    int vfa_segments = 35;
    StepsizeRule stepsize;
    std::string profiles_csv;  // optional path overriding the synthetic profiles

    void validate() const;
};

EngineConfig default_config();

/// Throws ConfigError naming the offending field.
EngineConfig load_config(const std::string& path);
EngineConfig config_from_json(const std::string& text);
std::string config_to_json(const EngineConfig& config);
void save_config(const EngineConfig& config, const std::string& path);

/// Evaluation scenario set for this config: profiles from the CSV override
/// when set, the synthetic defaults otherwise.
ScenarioSet make_scenarios(const EngineConfig& config);

/// Same forecast with the training seed, pool size and scaled errors.
ScenarioSet make_training_scenarios(const EngineConfig& config);

}  // namespace mgrid
