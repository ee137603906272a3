#include "mgrid/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mgrid {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("config: missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
}

json unit_to_json(const UnitParams& u) {
    return {{"power_min", u.power_min},
            {"power_max", u.power_max},
            {"ramp_up", u.ramp_up},
            {"ramp_down", u.ramp_down},
            {"ramp_basis", u.ramp_basis == RampBasis::PerHour ? "per_hour" : "per_minute"},
            {"cost_coefficient", u.cost_coefficient}};
}

UnitParams unit_from_json(const json& j, const std::string& name) {
    UnitParams u;
    u.power_min = field<double>(j, "power_min");
    u.power_max = field<double>(j, "power_max");
    u.ramp_up = field<double>(j, "ramp_up");
    u.ramp_down = field<double>(j, "ramp_down");
    const std::string basis = field<std::string>(j, "ramp_basis");
    if (basis == "per_hour") u.ramp_basis = RampBasis::PerHour;
    else if (basis == "per_minute") u.ramp_basis = RampBasis::PerMinute;
    else throw ConfigError("units." + name + ".ramp_basis must be per_hour or per_minute");
    u.cost_coefficient = field<double>(j, "cost_coefficient");
    return u;
}

}  // namespace

void EngineConfig::validate() const {
    mg.validate();
    arma.validate(mg.period_hours);
    prices.validate(mg.horizon);
    errors.validate();
    training.validate();
    if (vfa_segments < 1) throw ConfigError("vfa.segment_count must be >= 1");
    if (!(stepsize.a_h > 0.0)) throw ConfigError("vfa.stepsize_a must be positive");
    if (mpc.horizon < 1 || mpc.horizon > mg.horizon)
        throw ConfigError("mpc.horizon must lie in [1, horizon]");
    if (scenario_count < 1) throw ConfigError("scenarios.count must be >= 1");
    if (training_error_scale < 0.0)
        throw ConfigError("training.error_scale must be nonnegative");
}

EngineConfig default_config() {
    EngineConfig c;
    c.mg = default_microgrid_params();
    c.arma = default_arma_params();
    c.prices = default_price_schedule();
    c.errors = ScenarioErrorModel{};
    c.scenario_seed = 42;
    c.scenario_count = 20;
    c.training = TrainingConfig{};
    c.training_error_scale = 0.0;
    c.mpc = MpcConfig{};
    c.vfa_segments = 35;
    c.stepsize = StepsizeRule{};
    return c;
}

std::string config_to_json(const EngineConfig& c) {
    json j;
    j["period_hours"] = c.mg.period_hours;
    j["horizon_periods"] = c.mg.horizon;
    j["units"] = {{"fc", unit_to_json(c.mg.fc)},
                  {"ccgt_electric", unit_to_json(c.mg.ccgt_electric)},
                  {"grid", unit_to_json(c.mg.grid)},
                  {"gb", unit_to_json(c.mg.gb)},
                  {"hp", unit_to_json(c.mg.hp)},
                  {"ccgt_heat", unit_to_json(c.mg.ccgt_heat)}};
    j["storage"] = {{"soc_min", c.mg.storage.soc_min},
                    {"soc_max", c.mg.storage.soc_max},
                    {"charge_max", c.mg.storage.charge_max},
                    {"discharge_max", c.mg.storage.discharge_max},
                    {"eta_charge", c.mg.storage.eta_charge},
                    {"eta_discharge", c.mg.storage.eta_discharge},
                    {"soc_initial", c.mg.storage.soc_initial}};
    j["penalties"] = {{"wind_curtailment", c.mg.penalties.wind_curtailment},
                      {"load_curtailment", c.mg.penalties.load_curtailment},
                      {"heat_curtailment", c.mg.penalties.heat_curtailment}};
    j["ccgt_electric_map"] = {{"a0", c.mg.ccgt_map.a0},
                              {"b0", c.mg.ccgt_map.b0},
                              {"gas_min", c.mg.ccgt_map.gas_min},
                              {"gas_max", c.mg.ccgt_map.gas_max}};
    j["heat_pump_cop"] = c.mg.heat_pump_cop;
    j["wind_capacity"] = c.mg.wind_capacity;
    j["ccgt_initial_heat"] = c.mg.ccgt_initial_heat;
    j["heat_balance_sample"] =
        c.mg.heat_balance_sample == HeatBalanceSample::EndOfPeriod ? "end" : "average";
    j["arma"] = {{"a", c.arma.a},
                 {"b", c.arma.b},
                 {"sample_interval_s", c.arma.sample_interval_s},
                 {"samples_per_period", c.arma.samples_per_period}};
    json tiers = json::array();
    for (const auto& t : c.prices.tiers)
        tiers.push_back({{"from", t.from}, {"to", t.to}, {"price", t.price}});
    j["price_tiers"] = tiers;
    j["scenarios"] = {{"seed", c.scenario_seed},
                      {"count", c.scenario_count},
                      {"wind_rel_std", c.errors.wind_rel_std},
                      {"demand_e_rel_std", c.errors.demand_e_rel_std},
                      {"price_rel_std", c.errors.price_rel_std},
                      {"demand_q_rel_std", c.errors.demand_q_rel_std}};
    j["training"] = {{"iteration_budget", c.training.iteration_budget},
                     {"convergence_window", c.training.convergence_window},
                     {"convergence_rel_tol", c.training.convergence_rel_tol},
                     {"perturbation_mw", c.training.perturbation_mw},
                     {"seed", c.training.seed},
                     {"scenario_count", c.training.scenario_count},
                     {"minibatch", c.training.minibatch},
                     {"error_scale", c.training_error_scale}};
    j["mpc"] = {{"horizon", c.mpc.horizon},
                {"forecast", c.mpc.forecast == MpcConfig::Forecast::DayAhead ? "day_ahead"
                                                                             : "perfect"},
                {"terminal_vfa", c.mpc.terminal_vfa}};
    j["vfa"] = {{"segment_count", c.vfa_segments}, {"stepsize_a", c.stepsize.a_h}};
    j["profiles_csv"] = c.profiles_csv;
    return j.dump(2);
}

EngineConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    EngineConfig c;
    c.mg.period_hours = field<double>(j, "period_hours");
    c.mg.horizon = field<int>(j, "horizon_periods");
    const json units = field<json>(j, "units");
    c.mg.fc = unit_from_json(field<json>(units, "fc"), "fc");
    c.mg.ccgt_electric = unit_from_json(field<json>(units, "ccgt_electric"), "ccgt_electric");
    c.mg.grid = unit_from_json(field<json>(units, "grid"), "grid");
    c.mg.gb = unit_from_json(field<json>(units, "gb"), "gb");
    c.mg.hp = unit_from_json(field<json>(units, "hp"), "hp");
    c.mg.ccgt_heat = unit_from_json(field<json>(units, "ccgt_heat"), "ccgt_heat");
    const json st = field<json>(j, "storage");
    c.mg.storage.soc_min = field<double>(st, "soc_min");
    c.mg.storage.soc_max = field<double>(st, "soc_max");
    c.mg.storage.charge_max = field<double>(st, "charge_max");
    c.mg.storage.discharge_max = field<double>(st, "discharge_max");
    c.mg.storage.eta_charge = field<double>(st, "eta_charge");
    c.mg.storage.eta_discharge = field<double>(st, "eta_discharge");
    c.mg.storage.soc_initial = field<double>(st, "soc_initial");
    const json pen = field<json>(j, "penalties");
    c.mg.penalties.wind_curtailment = field<double>(pen, "wind_curtailment");
    c.mg.penalties.load_curtailment = field<double>(pen, "load_curtailment");
    c.mg.penalties.heat_curtailment = field<double>(pen, "heat_curtailment");
    const json map = field<json>(j, "ccgt_electric_map");
    c.mg.ccgt_map.a0 = field<double>(map, "a0");
    c.mg.ccgt_map.b0 = field<double>(map, "b0");
    c.mg.ccgt_map.gas_min = field<double>(map, "gas_min");
    c.mg.ccgt_map.gas_max = field<double>(map, "gas_max");
    c.mg.heat_pump_cop = field<double>(j, "heat_pump_cop");
    c.mg.wind_capacity = field<double>(j, "wind_capacity");
    c.mg.ccgt_initial_heat = field<double>(j, "ccgt_initial_heat");
    const std::string hbs = field<std::string>(j, "heat_balance_sample");
    if (hbs == "end") c.mg.heat_balance_sample = HeatBalanceSample::EndOfPeriod;
    else if (hbs == "average") c.mg.heat_balance_sample = HeatBalanceSample::PeriodAverage;
    else throw ConfigError("config: heat_balance_sample must be 'end' or 'average'");
    const json ar = field<json>(j, "arma");
    c.arma.a = field<std::array<double, 4>>(ar, "a");
    c.arma.b = field<std::array<double, 4>>(ar, "b");
    c.arma.sample_interval_s = field<double>(ar, "sample_interval_s");
    c.arma.samples_per_period = field<int>(ar, "samples_per_period");
    c.prices.tiers.clear();
    for (const auto& t : field<json>(j, "price_tiers"))
        c.prices.tiers.push_back({field<int>(t, "from"), field<int>(t, "to"),
                                  field<double>(t, "price")});
    const json sc = field<json>(j, "scenarios");
    c.scenario_seed = field<std::uint64_t>(sc, "seed");
    c.scenario_count = field<int>(sc, "count");
    c.errors.wind_rel_std = field<double>(sc, "wind_rel_std");
    c.errors.demand_e_rel_std = field<double>(sc, "demand_e_rel_std");
    c.errors.price_rel_std = field<double>(sc, "price_rel_std");
    c.errors.demand_q_rel_std = field<double>(sc, "demand_q_rel_std");
    const json tr = field<json>(j, "training");
    c.training.iteration_budget = field<int>(tr, "iteration_budget");
    c.training.convergence_window = field<int>(tr, "convergence_window");
    c.training.convergence_rel_tol = field<double>(tr, "convergence_rel_tol");
    c.training.perturbation_mw = field<double>(tr, "perturbation_mw");
    c.training.seed = field<std::uint64_t>(tr, "seed");
    c.training.scenario_count = field<int>(tr, "scenario_count");
    c.training.minibatch = field<int>(tr, "minibatch");
    c.training_error_scale = field<double>(tr, "error_scale");
    const json mp = field<json>(j, "mpc");
    c.mpc.horizon = field<int>(mp, "horizon");
    const std::string fsrc = field<std::string>(mp, "forecast");
    if (fsrc == "day_ahead") c.mpc.forecast = MpcConfig::Forecast::DayAhead;
    else if (fsrc == "perfect") c.mpc.forecast = MpcConfig::Forecast::Perfect;
    else throw ConfigError("config: mpc.forecast must be 'day_ahead' or 'perfect'");
    c.mpc.terminal_vfa = field<bool>(mp, "terminal_vfa");
    const json vf = field<json>(j, "vfa");
    c.vfa_segments = field<int>(vf, "segment_count");
    c.stepsize.a_h = field<double>(vf, "stepsize_a");
    c.profiles_csv = field<std::string>(j, "profiles_csv");
    c.validate();
    return c;
}

EngineConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json(ss.str());
}

void save_config(const EngineConfig& config, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("config: cannot write " + path);
    os << config_to_json(config) << "\n";
}

ScenarioSet make_scenarios(const EngineConfig& config) {
    ScenarioSet set;
    set.forecast = config.profiles_csv.empty() ? default_profiles(config.mg, config.prices)
                                               : read_profiles_csv(config.profiles_csv);
    set.forecast.validate(config.mg.horizon);
    set.errors = config.errors;
    set.seed = config.scenario_seed;
    set.count = config.scenario_count;
    return set;
}

ScenarioSet make_training_scenarios(const EngineConfig& config) {
    ScenarioSet set = make_scenarios(config);
    set.errors.wind_rel_std *= config.training_error_scale;
    set.errors.demand_e_rel_std *= config.training_error_scale;
    set.errors.price_rel_std *= config.training_error_scale;
    set.errors.demand_q_rel_std *= config.training_error_scale;
    set.seed = config.training.seed;
    set.count = config.training.scenario_count;
    return set;
}

}  // namespace mgrid
