#include "mgrid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mgrid/model.hpp"

namespace mgrid {

double PriceSchedule::price_at(int period_1based) const {
    for (const Tier& t : tiers)
        if (period_1based >= t.from && period_1based <= t.to) return t.price;
    throw ConfigError("price_tiers: period " + std::to_string(period_1based) +
                      " not covered by any tier");
}

void PriceSchedule::validate(int horizon) const {
    if (tiers.empty()) throw ConfigError("price_tiers: empty");
    int expected = 1;
    for (const Tier& t : tiers) {
        if (t.from != expected)
            throw ConfigError("price_tiers: tiers must partition [1, T]; gap at period " +
                              std::to_string(expected));
        if (t.to < t.from) throw ConfigError("price_tiers: tier with to < from");
        if (!(t.price > 0.0)) throw ConfigError("price_tiers: prices must be positive");
        expected = t.to + 1;
    }
    if (expected != horizon + 1)
        throw ConfigError("price_tiers: tiers end at " + std::to_string(expected - 1) +
                          ", horizon is " + std::to_string(horizon));
}

void ScenarioErrorModel::validate() const {
    if (wind_rel_std < 0.0 || demand_e_rel_std < 0.0 || price_rel_std < 0.0 ||
        demand_q_rel_std < 0.0)
        throw ConfigError("scenarios: relative stds must be nonnegative");
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double to_unit(std::uint64_t h) {
    // (0, 1]: avoids log(0) in the Box-Muller transform
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u > 0x1.0p-53 ? u : 0x1.0p-53;
}

/// One standard normal per (seed, scenario, period, quantity) counter.
double counter_normal(std::uint64_t seed, int scenario, int period, int quantity) {
    std::uint64_t h = splitmix64(seed ^ 0x5bd1e995u);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(scenario) * 0x9e3779b97f4a7c15ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(period) * 0xc2b2ae3d27d4eb4fULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(quantity) * 0x165667b19e3779f9ULL));
    const double u1 = to_unit(h);
    const double u2 = to_unit(splitmix64(h));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

ExogenousSample ScenarioSet::sample_errors(int scenario, int period) const {
    if (scenario < 0 || scenario >= count)
        throw std::out_of_range("scenario index " + std::to_string(scenario) +
                                " outside [0, " + std::to_string(count) + ")");
    const ForecastRow f = forecast.row(period);
    ExogenousSample e;
    e.wind_error = errors.wind_rel_std * f.wind * counter_normal(seed, scenario, period, 0);
    e.demand_e_error =
        errors.demand_e_rel_std * f.demand_e * counter_normal(seed, scenario, period, 1);
    e.price_error =
        errors.price_rel_std * f.price * counter_normal(seed, scenario, period, 2);
    e.demand_q_error =
        errors.demand_q_rel_std * f.demand_q * counter_normal(seed, scenario, period, 3);
    return e;
}

Realization ScenarioSet::realized(int scenario, int period) const {
    return realized_state(forecast.row(period), sample_errors(scenario, period));
}

std::vector<Realization> ScenarioSet::realized_series(int scenario) const {
    std::vector<Realization> out;
    out.reserve(static_cast<size_t>(forecast.periods()));
    for (int t = 0; t < forecast.periods(); ++t) out.push_back(realized(scenario, t));
    return out;
}

std::vector<Realization> ScenarioSet::forecast_series() const {
    std::vector<Realization> out;
    out.reserve(static_cast<size_t>(forecast.periods()));
    for (int t = 0; t < forecast.periods(); ++t) {
        const ForecastRow f = forecast.row(t);
        out.push_back({f.wind, f.demand_e, f.price, f.demand_q});
    }
    return out;
}

PriceSchedule default_price_schedule() {
    PriceSchedule p;
    p.tiers = {{1, 24, 35.0},  {25, 40, 60.0}, {41, 60, 95.0},
               {61, 72, 60.0}, {73, 84, 95.0}, {85, 96, 60.0}};
    return p;
}

namespace {

/// Piecewise-linear interpolation through (period, value) knots, 1-based
/// periods, held flat outside the knot range.
std::vector<double> interp_profile(int T, const std::vector<std::pair<int, double>>& knots) {
    std::vector<double> out(static_cast<size_t>(T), knots.front().second);
    for (int t = 1; t <= T; ++t) {
        double v = knots.back().second;
        for (size_t k = 0; k + 1 < knots.size(); ++k) {
            const auto [t0, v0] = knots[k];
            const auto [t1, v1] = knots[k + 1];
            if (t >= t0 && t <= t1) {
                v = v0 + (v1 - v0) * static_cast<double>(t - t0) /
                             std::max(1, t1 - t0);
                break;
            }
        }
        if (t < knots.front().first) v = knots.front().second;
        out[static_cast<size_t>(t - 1)] = v;
    }
    return out;
}

}  // namespace

DayAheadForecast default_profiles(const MicrogridParams& params, const PriceSchedule& prices) {
    const int T = params.horizon;
    DayAheadForecast f;

    // wind inside the turbine rating, breezier overnight
    f.wind.resize(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t) {
        const double phase = 2.0 * std::numbers::pi * (t - 6) / 96.0;
        const double w = 2.0 + 1.3 * std::cos(phase) + 0.2 * std::sin(3.0 * phase);
        f.wind[static_cast<size_t>(t - 1)] =
            std::clamp(w, 0.0, params.wind_capacity);
    }

    // electric demand peaking inside periods 73-80
    f.demand_e = interp_profile(T, {{1, 9.0},
                                    {16, 8.0},
                                    {24, 8.5},
                                    {40, 14.0},
                                    {56, 15.0},
                                    {64, 13.5},
                                    {72, 16.0},
                                    {77, 22.5},
                                    {80, 21.5},
                                    {88, 16.0},
                                    {96, 13.0}});

    // heat demand with two steep climbs the CCGT cannot follow from a cold
    // start: a morning surge and the evening peak
    f.demand_q = interp_profile(T, {{1, 26.0},
                                    {20, 24.0},
                                    {30, 26.0},
                                    {33, 44.0},
                                    {44, 44.0},
                                    {56, 34.0},
                                    {70, 31.0},
                                    {72, 31.5},
                                    {76, 47.0},
                                    {84, 47.0},
                                    {96, 30.0}});

    f.price.resize(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t)
        f.price[static_cast<size_t>(t - 1)] = prices.price_at(t);

    // keep the grid able to absorb the heat-driven CCGT electric output:
    // whenever the full heat-tracking level would outrun the export, storage
    // and heat-pump headroom, lift the electric demand to cover the gap
    const double gain = default_arma_params().steady_state_gain();
    const CcgtElectricMap map =
        derive_ccgt_map(params.ccgt_electric, params.ccgt_heat, default_arma_params());
    for (int t = 0; t < T; ++t) {
        const double q_track = std::min(params.ccgt_heat.power_max,
                                        f.demand_q[static_cast<size_t>(t)] -
                                            params.gb.power_min - params.hp.power_max);
        const double elec_at_track = map.a0 + map.b0 * (q_track / gain);
        const double absorb = -params.grid.power_min +
                              params.hp.power_max / params.heat_pump_cop;
        const double need = elec_at_track + params.fc.power_min - absorb + 1.5;
        f.demand_e[static_cast<size_t>(t)] =
            std::max(f.demand_e[static_cast<size_t>(t)], need);
    }

    f.validate(T);
    return f;
}

void write_profiles_csv(const DayAheadForecast& forecast, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("profiles: cannot write " + path);
    os.precision(12);
    os << "period,wind,demand_e,price,demand_q\n";
    for (int t = 0; t < forecast.periods(); ++t)
        os << (t + 1) << "," << forecast.wind[static_cast<size_t>(t)] << ","
           << forecast.demand_e[static_cast<size_t>(t)] << ","
           << forecast.price[static_cast<size_t>(t)] << ","
           << forecast.demand_q[static_cast<size_t>(t)] << "\n";
}

DayAheadForecast read_profiles_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("profiles: cannot read " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("profiles: empty file " + path);
    if (line.rfind("period,", 0) != 0)
        throw ConfigError("profiles: missing header row in " + path);
    DayAheadForecast f;
    int expected = 1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        double vals[5];
        for (int k = 0; k < 5; ++k) {
            if (!std::getline(ss, field, ','))
                throw ConfigError("profiles: short row in " + path);
            vals[k] = std::stod(field);
        }
        if (static_cast<int>(vals[0]) != expected)
            throw ConfigError("profiles: period column must count 1..T in " + path);
        ++expected;
        f.wind.push_back(vals[1]);
        f.demand_e.push_back(vals[2]);
        f.price.push_back(vals[3]);
        f.demand_q.push_back(vals[4]);
    }
    return f;
}

}  // namespace mgrid
