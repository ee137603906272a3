#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mgrid/model.hpp"

using namespace mgrid;

namespace {

SystemState nominal_state(const MicrogridParams& p, const ArmaParams& arma) {
    SystemState s;
    s.fc_power_prev = 2.0;
    s.ccgt_power = 15.0;
    s.soc = p.storage.soc_initial;
    s.wind_available = 2.0;
    s.demand_e = 12.0;
    s.price = 60.0;
    s.gb_heat_prev = 2.0;
    s.hp_heat_prev = 1.0;
    s.ccgt_aug = AugmentedCcgtState::steady(20.0, arma);
    s.demand_q = 26.0;
    s.grid_power_prev = 0.0;
    return s;
}

}  // namespace

TEST_CASE("stage cost") {
    const MicrogridParams p = default_microgrid_params();
    const ArmaParams arma = default_arma_params();
    SystemState s = nominal_state(p, arma);

    SUBCASE("zero decision costs nothing") {
        CHECK(stage_cost(s, Decision{}, p) == 0.0);
    }
    SUBCASE("pure grid purchase") {
        s.price = 60.0;
        Decision d;
        d.grid_power = 2.0;
        CHECK(stage_cost(s, d, p) == doctest::Approx(30.0).epsilon(1e-12));
    }
    SUBCASE("heat curtailment penalty") {
        Decision d;
        d.heat_curtail = 1.0;
        CHECK(stage_cost(s, d, p) == doctest::Approx(87.5).epsilon(1e-12));
    }
    SUBCASE("grid sales earn revenue") {
        Decision d;
        d.grid_power = -3.0;
        CHECK(stage_cost(s, d, p) == doctest::Approx(-3.0 * 60.0 * 0.25).epsilon(1e-12));
    }
    SUBCASE("linear in continuous fields for fixed flags") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int rep = 0; rep < 50; ++rep) {
            auto draw = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
            Decision a, b;
            a.fc_power = draw(0.8, 7);
            b.fc_power = draw(0.8, 7);
            a.gas_flow = draw(p.ccgt_map.gas_min, p.ccgt_map.gas_max);
            b.gas_flow = draw(p.ccgt_map.gas_min, p.ccgt_map.gas_max);
            a.grid_power = draw(-6, 6);
            b.grid_power = draw(-6, 6);
            a.gb_heat = draw(1, 15);
            b.gb_heat = draw(1, 15);
            a.wind_curtail = draw(0, 2);
            b.wind_curtail = draw(0, 2);
            a.load_curtail = draw(0, 2);
            b.load_curtail = draw(0, 2);
            a.heat_curtail = draw(0, 2);
            b.heat_curtail = draw(0, 2);
            const double lam = u(rng);
            Decision mix;
            mix.fc_power = lam * a.fc_power + (1 - lam) * b.fc_power;
            mix.gas_flow = lam * a.gas_flow + (1 - lam) * b.gas_flow;
            mix.grid_power = lam * a.grid_power + (1 - lam) * b.grid_power;
            mix.gb_heat = lam * a.gb_heat + (1 - lam) * b.gb_heat;
            mix.wind_curtail = lam * a.wind_curtail + (1 - lam) * b.wind_curtail;
            mix.load_curtail = lam * a.load_curtail + (1 - lam) * b.load_curtail;
            mix.heat_curtail = lam * a.heat_curtail + (1 - lam) * b.heat_curtail;
            CHECK(stage_cost(s, mix, p) ==
                  doctest::Approx(lam * stage_cost(s, a, p) + (1 - lam) * stage_cost(s, b, p))
                      .epsilon(1e-10));
        }
    }
    SUBCASE("idle CCGT carries no offset cost") {
        Decision d;
        d.gas_flow = 0.0;
        CHECK(p.ccgt_map.a0 < 0.0);
        CHECK(p.ccgt_electric_output(0.0) == 0.0);
        CHECK(stage_cost(s, d, p) == 0.0);
    }
}

TEST_CASE("realized state") {
    SUBCASE("zero error is the identity") {
        const Realization r = realized_state({1.5, 10.0, 60.0, 25.0}, {});
        CHECK(r.wind == 1.5);
        CHECK(r.demand_e == 10.0);
        CHECK(r.price == 60.0);
        CHECK(r.demand_q == 25.0);
    }
    SUBCASE("clamped at the physical floor") {
        const Realization r = realized_state({1.0, 10.0, 60.0, 25.0}, {-2.0, 0, -100.0, 0});
        CHECK(r.wind == 0.0);
        CHECK(r.price == 0.0);
    }
    SUBCASE("plain addition above the floor") {
        const Realization r = realized_state({1.0, 10.0, 60.0, 25.0}, {0.0, 0.7, 0, 0});
        CHECK(r.demand_e == doctest::Approx(10.7));
    }
}

TEST_CASE("transition") {
    const MicrogridParams p = default_microgrid_params();
    const ArmaParams arma = default_arma_params();
    const SystemState s = nominal_state(p, arma);
    const ForecastRow next{2.0, 11.0, 60.0, 27.0};

    SUBCASE("lags are copied") {
        Decision d;
        d.fc_power = 3.0;
        d.gb_heat = 4.0;
        d.hp_heat = 2.0;
        d.grid_power = -1.0;
        const SystemState n = transition(s, d, {}, next, p, arma);
        CHECK(n.fc_power_prev == 3.0);
        CHECK(n.gb_heat_prev == 4.0);
        CHECK(n.hp_heat_prev == 2.0);
        CHECK(n.grid_power_prev == -1.0);
    }
    SUBCASE("storage integration") {
        SystemState s2 = s;
        s2.soc = 7.5;
        Decision d;
        d.charge_power = 2.0;
        const SystemState n = transition(s2, d, {}, next, p, arma);
        CHECK(n.soc == doctest::Approx(7.95).epsilon(1e-12));
    }
    SUBCASE("zero augmented state under zero gas stays zero") {
        SystemState s2 = s;
        s2.ccgt_aug = AugmentedCcgtState::zero();
        const SystemState n = transition(s2, Decision{}, {}, next, p, arma);
        for (double v : n.ccgt_aug.x) CHECK(v == 0.0);
    }
    SUBCASE("deterministic given identical inputs") {
        Decision d;
        d.fc_power = 2.5;
        d.gas_flow = 1.4;
        d.charge_power = 1.0;
        const ExogenousSample e{0.1, -0.2, 3.0, 0.4};
        const SystemState a = transition(s, d, e, next, p, arma);
        const SystemState b = transition(s, d, e, next, p, arma);
        CHECK(a.soc == b.soc);
        CHECK(a.ccgt_power == b.ccgt_power);
        for (int i = 0; i < 7; ++i) CHECK(a.ccgt_aug.x[i] == b.ccgt_aug.x[i]);
        CHECK(a.demand_q == b.demand_q);
    }
    SUBCASE("augmented state advances one full period") {
        Decision d;
        d.gas_flow = 1.4;
        const SystemState n = transition(s, d, {}, next, p, arma);
        AugmentedCcgtState expect = s.ccgt_aug;
        for (int k = 0; k < arma.samples_per_period; ++k) expect = step(expect, 1.4, arma);
        for (int i = 0; i < 7; ++i)
            CHECK(n.ccgt_aug.x[i] == doctest::Approx(expect.x[i]).epsilon(1e-12));
        CHECK(n.ccgt_power == doctest::Approx(p.ccgt_map.a0 + p.ccgt_map.b0 * 1.4));
    }
    SUBCASE("soc stays inside the window when the decision respected it") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int rep = 0; rep < 200; ++rep) {
            SystemState s2 = s;
            s2.soc = p.storage.soc_min +
                     u(rng) * (p.storage.soc_max - p.storage.soc_min);
            Decision d;
            if (u(rng) < 0.5) {
                d.charge_flag = true;
                const double cap = std::min(
                    p.storage.charge_max,
                    (p.storage.soc_max - s2.soc) / (p.storage.eta_charge * p.period_hours));
                d.charge_power = u(rng) * std::max(0.0, cap);
            } else {
                d.discharge_flag = true;
                const double cap = std::min(
                    p.storage.discharge_max, (s2.soc - p.storage.soc_min) *
                                                 p.storage.eta_discharge / p.period_hours);
                d.discharge_power = u(rng) * std::max(0.0, cap);
            }
            const SystemState n = transition(s2, d, {}, next, p, arma);
            CHECK(n.soc >= p.storage.soc_min - 1e-9);
            CHECK(n.soc <= p.storage.soc_max + 1e-9);
        }
    }
    SUBCASE("horizon index is validated") {
        DayAheadForecast f;
        f.wind = {1, 1};
        f.demand_e = {10, 10};
        f.price = {60, 60};
        f.demand_q = {25, 25};
        CHECK_THROWS_AS(transition(s, Decision{}, {}, f, 2, p, arma), std::out_of_range);
        CHECK_NOTHROW(transition(s, Decision{}, {}, f, 1, p, arma));
    }
}

TEST_CASE("initial state") {
    const MicrogridParams p = default_microgrid_params();
    const ArmaParams arma = default_arma_params();
    const SystemState s = make_initial_state(p, arma, {2.0, 10.0, 35.0, 24.0});
    CHECK(heat_output(s.ccgt_aug, arma) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(s.soc == 7.5);
    CHECK(s.wind_available == 2.0);
    CHECK(s.price == 35.0);
    // electric output consistent with holding 20 MW of heat
    const double gas0 = 20.0 / arma.steady_state_gain();
    CHECK(s.ccgt_power == doctest::Approx(p.ccgt_map.a0 + p.ccgt_map.b0 * gas0));
    CHECK(s.ccgt_power >= p.ccgt_electric.power_min);
}

TEST_CASE("config defaults are valid and carry the table values") {
    const MicrogridParams p = default_microgrid_params();
    CHECK_NOTHROW(p.validate());
    CHECK(p.fc.power_min == 0.8);
    CHECK(p.fc.power_max == 7.0);
    CHECK(p.fc.cost_coefficient == 65.0);
    CHECK(p.ccgt_electric.power_min == 6.0);
    CHECK(p.ccgt_electric.power_max == 43.0);
    CHECK(p.ccgt_electric.cost_coefficient == 92.0);
    CHECK(p.gb.cost_coefficient == 300.0);
    CHECK(p.gb.power_min == 1.0);
    CHECK(p.gb.power_max == 15.0);
    CHECK(p.ccgt_heat.power_min == 15.0);
    CHECK(p.ccgt_heat.power_max == 50.0);
    CHECK(p.storage.soc_min == 1.5);
    CHECK(p.storage.soc_max == 15.0);
    CHECK(p.storage.soc_initial == 7.5);
    CHECK(p.storage.eta_charge == 0.9);
    CHECK(p.penalties.wind_curtailment == 200.0);
    CHECK(p.penalties.load_curtailment == 150.0);
    CHECK(p.penalties.heat_curtailment == 350.0);
    // gas bounds map the heat range through the steady gain onto [6, 43]
    const ArmaParams arma = default_arma_params();
    const double gain = arma.steady_state_gain();
    CHECK(p.ccgt_map.gas_min == doctest::Approx(15.0 / gain));
    CHECK(p.ccgt_map.gas_max == doctest::Approx(50.0 / gain));
    CHECK(p.ccgt_map.a0 + p.ccgt_map.b0 * p.ccgt_map.gas_min == doctest::Approx(6.0));
    CHECK(p.ccgt_map.a0 + p.ccgt_map.b0 * p.ccgt_map.gas_max == doctest::Approx(43.0));

    SUBCASE("invariant violations are named") {
        MicrogridParams bad = p;
        bad.storage.eta_charge = 1.5;
        CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("eta_charge"), ConfigError);
    }
}
