#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mgrid/trainer.hpp"

using namespace mgrid;

namespace {

struct Fixture {
    MicrogridParams p;
    ArmaParams arma = default_arma_params();
    PeriodLift lift = build_period_lift(default_arma_params());
    ScenarioSet scen;

    explicit Fixture(int T = 12) {
        p = default_microgrid_params();
        p.horizon = T;
        DayAheadForecast f;
        for (int t = 0; t < T; ++t) {
            f.wind.push_back(1.5);
            f.demand_e.push_back(11.0 + 1.5 * std::sin(0.5 * t));
            f.price.push_back(t < T / 2 ? 40.0 : 85.0);
            const double ramp = std::clamp((t - T / 3) * 6.0, 0.0, 18.0);
            f.demand_q.push_back(25.0 + ramp);
        }
        scen.forecast = f;
        scen.errors = {0.0, 0.0, 0.0, 0.0};
        scen.seed = 11;
        scen.count = 3;
    }
};

}  // namespace

TEST_CASE("marginal sampling") {
    SUBCASE("free reshuffling makes the heat level worthless") {
        // no fuel costs, zero price, wide windows: the perturbation is
        // absorbed at zero cost
        Fixture f;
        f.p.fc.cost_coefficient = 0.0;
        f.p.ccgt_electric.cost_coefficient = 0.0;
        f.p.gb.cost_coefficient = 0.0;
        f.p.gb = {0.0, 30.0, 1000, 1000, RampBasis::PerMinute, 0.0};
        f.p.ccgt_electric.ramp_up = 1000;
        f.p.ccgt_electric.ramp_down = 1000;
        f.p.ccgt_heat.ramp_up = 1000;
        f.p.ccgt_heat.ramp_down = 1000;
        f.p.grid = {-20, 20, 10000, 10000, RampBasis::PerHour, 0.0};
        SystemState s = make_initial_state(f.p, f.arma, {1.5, 11.0, 0.0, 30.0});
        const std::vector<double> zeros(35, 0.0);
        const double obs = sample_marginal(s, zeros, 1.0, f.p, f.arma, f.lift);
        CHECK(obs == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("a pinned gas flow forces the boiler to make up the shortfall") {
        Fixture f;
        // gas cannot move: the electric ramp window collapses to a point
        f.p.ccgt_electric.ramp_up = 1e-9;
        f.p.ccgt_electric.ramp_down = 1e-9;
        f.p.hp = {0.0, 0.0, 1, 1, RampBasis::PerMinute, 0.0};
        f.p.storage.charge_max = 0.0;
        f.p.storage.discharge_max = 0.0;
        SystemState s = make_initial_state(f.p, f.arma, {1.5, 11.0, 40.0, 28.0});
        const std::vector<double> zeros(35, 0.0);
        const double obs = sample_marginal(s, zeros, 1.0, f.p, f.arma, f.lift);
        // the end-of-period response to the uniform state shift
        double row_sum = 0.0;
        for (double v : f.lift.end_state_row) row_sum += v;
        const double delta_q = row_sum / f.arma.b_sum();  // per MW of read-out shift
        const double expected = -f.p.gb.cost_coefficient * f.p.period_hours * delta_q;
        CHECK(obs == doctest::Approx(expected).epsilon(1e-6));
        // the raw boiler marginal (-300 dt) is scaled by how much of the
        // incoming-heat shift survives to the end-of-period sample
        CHECK(delta_q > 0.0);
        CHECK(delta_q < 1.0);
        CHECK(obs < 0.0);
    }
}

TEST_CASE("training") {
    const Fixture f;
    TrainingConfig cfg;
    cfg.iteration_budget = 12;
    cfg.convergence_window = 5;
    cfg.convergence_rel_tol = 1e-4;
    cfg.seed = 5;
    cfg.scenario_count = 1;
    const StepsizeRule rule{20.0};

    SUBCASE("first pass with zero slopes is the myopic trajectory") {
        TrainingConfig one = cfg;
        one.iteration_budget = 1;
        const TrainResult r = train(one, f.scen, f.p, f.arma, f.lift, 35, rule);
        REQUIRE(r.trace.iterations_run() == 1);
        const Policy myopic{Policy::Kind::Myopic, nullptr, {}};
        const Trajectory t = simulate_policy(myopic, f.scen, 0, f.p, f.arma, f.lift, 35);
        CHECK(r.trace.total_cost[0] == t.total_cost);
    }
    SUBCASE("slopes stay monotone and training reproduces bitwise") {
        const TrainResult a = train(cfg, f.scen, f.p, f.arma, f.lift, 35, rule);
        CHECK(a.vfa.rows_monotone());
        const TrainResult b = train(cfg, f.scen, f.p, f.arma, f.lift, 35, rule);
        REQUIRE(a.trace.iterations_run() == b.trace.iterations_run());
        for (int i = 0; i < a.trace.iterations_run(); ++i) {
            CHECK(a.trace.total_cost[static_cast<size_t>(i)] ==
                  b.trace.total_cost[static_cast<size_t>(i)]);
            CHECK(a.trace.slope_change_norm[static_cast<size_t>(i)] ==
                  b.trace.slope_change_norm[static_cast<size_t>(i)]);
        }
        for (size_t t = 0; t < a.vfa.slopes.size(); ++t)
            for (size_t k = 0; k < a.vfa.slopes[t].size(); ++k)
                CHECK(a.vfa.slopes[t][k] == b.vfa.slopes[t][k]);
    }
    SUBCASE("trained policy does not lose to myopic on the training day") {
        const TrainResult r = train(cfg, f.scen, f.p, f.arma, f.lift, 35, rule);
        const Policy vfa_policy{Policy::Kind::Vfa, &r.vfa, {}};
        const Policy myopic{Policy::Kind::Myopic, nullptr, {}};
        const Trajectory tv = simulate_policy(vfa_policy, f.scen, 0, f.p, f.arma, f.lift, 35);
        const Trajectory tm = simulate_policy(myopic, f.scen, 0, f.p, f.arma, f.lift, 35);
        CHECK(tv.total_cost <= tm.total_cost + 1e-6);
    }
    SUBCASE("perfect foresight bounds the trained policy from below") {
        const TrainResult r = train(cfg, f.scen, f.p, f.arma, f.lift, 35, rule);
        const Policy vfa_policy{Policy::Kind::Vfa, &r.vfa, {}};
        for (int sc = 0; sc < f.scen.count; ++sc) {
            const Trajectory tv =
                simulate_policy(vfa_policy, f.scen, sc, f.p, f.arma, f.lift, 35);
            const SystemState s0 = make_initial_state(f.p, f.arma, f.scen.realized(sc, 0));
            const auto series = f.scen.realized_series(sc);
            const ScheduleResult milp = full_horizon_milp(s0, series, f.p, f.arma, f.lift,
                                                          BinaryMode::BranchAndBound);
            REQUIRE(milp.status == LpStatus::Optimal);
            CHECK(milp.cost <= tv.total_cost + 1e-6);
        }
    }
}

TEST_CASE("policy simulation bookkeeping") {
    const Fixture f;
    const Policy myopic{Policy::Kind::Myopic, nullptr, {}};
    const Trajectory t = simulate_policy(myopic, f.scen, 1, f.p, f.arma, f.lift, 35);

    SUBCASE("sizes and accounting line up") {
        CHECK(t.states.size() == static_cast<size_t>(f.p.horizon));
        CHECK(t.decisions.size() == static_cast<size_t>(f.p.horizon));
        CHECK(t.heat_trace.size() ==
              static_cast<size_t>(f.p.horizon) * f.arma.samples_per_period);
        double re = 0.0;
        for (size_t i = 0; i < t.decisions.size(); ++i)
            re += stage_cost(t.states[i], t.decisions[i], f.p);
        CHECK(re == doctest::Approx(t.total_cost).epsilon(1e-9));
    }
    SUBCASE("zero-slope value policy reproduces myopic bitwise") {
        const PiecewiseLinearVfa zero_vfa =
            PiecewiseLinearVfa::zeros(f.p.horizon - 1, 15.0, 50.0, 35);
        const Policy zero_policy{Policy::Kind::Vfa, &zero_vfa, {}};
        const Trajectory tz = simulate_policy(zero_policy, f.scen, 1, f.p, f.arma, f.lift, 35);
        REQUIRE(tz.decisions.size() == t.decisions.size());
        for (size_t i = 0; i < t.decisions.size(); ++i) {
            CHECK(tz.decisions[i].gas_flow == t.decisions[i].gas_flow);
            CHECK(tz.decisions[i].fc_power == t.decisions[i].fc_power);
            CHECK(tz.decisions[i].grid_power == t.decisions[i].grid_power);
            CHECK(tz.decisions[i].charge_power == t.decisions[i].charge_power);
            CHECK(tz.decisions[i].discharge_power == t.decisions[i].discharge_power);
            CHECK(tz.decisions[i].gb_heat == t.decisions[i].gb_heat);
            CHECK(tz.decisions[i].hp_heat == t.decisions[i].hp_heat);
        }
        CHECK(tz.total_cost == t.total_cost);
    }
}
