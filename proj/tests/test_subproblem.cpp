#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mgrid/audit.hpp"
#include "mgrid/subproblem.hpp"

using namespace mgrid;

namespace {

struct Fixture {
    MicrogridParams p = default_microgrid_params();
    ArmaParams arma = default_arma_params();
    PeriodLift lift = build_period_lift(default_arma_params());
};

SystemState nominal_state(const Fixture& f, double heat = 20.0) {
    SystemState s;
    s.fc_power_prev = 2.0;
    s.ccgt_aug = AugmentedCcgtState::steady(heat, f.arma);
    s.ccgt_power = f.p.ccgt_map.a0 + f.p.ccgt_map.b0 * (heat / f.arma.steady_state_gain());
    s.soc = f.p.storage.soc_initial;
    s.wind_available = 2.0;
    s.demand_e = 12.0;
    s.price = 60.0;
    s.gb_heat_prev = 2.0;
    s.hp_heat_prev = 1.0;
    s.demand_q = 26.0;
    s.grid_power_prev = 0.0;
    return s;
}

/// Random but operationally legal state: lagged outputs inside unit bounds,
/// heat demand covering the committed minimum production.
SystemState random_state(const Fixture& f, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    SystemState s;
    s.fc_power_prev = draw(f.p.fc.power_min, f.p.fc.power_max);
    const double heat = draw(16.0, 44.0);
    s.ccgt_aug = AugmentedCcgtState::steady(heat, f.arma);
    // small transient on top of the steady point
    for (double& v : s.ccgt_aug.x) v *= draw(0.97, 1.03);
    const double q0 = heat_output(s.ccgt_aug, f.arma);
    // electric output consistent with the gas that roughly holds this heat
    const double gas0 = q0 / f.arma.steady_state_gain();
    s.ccgt_power = std::clamp(
        f.p.ccgt_map.a0 + f.p.ccgt_map.b0 * gas0 + draw(-2.0, 2.0),
        f.p.ccgt_electric.power_min, f.p.ccgt_electric.power_max);
    s.soc = draw(f.p.storage.soc_min, f.p.storage.soc_max);
    s.wind_available = draw(0.0, 3.6);
    s.price = draw(20.0, 120.0);
    s.gb_heat_prev = draw(f.p.gb.power_min, f.p.gb.power_max);
    s.hp_heat_prev = draw(f.p.hp.power_min, f.p.hp.power_max);
    s.grid_power_prev = draw(f.p.grid.power_min, f.p.grid.power_max);
    // the gas flow cannot fall below the heat/electric down-ramps in one
    // period, which floors both the heat and the electric output
    const double dt = f.p.period_hours;
    const double base = f.lift.end_heat(s.ccgt_aug, 0.0);
    const double gas_floor = std::max(
        {f.p.ccgt_map.gas_min,
         (q0 - f.p.ccgt_heat.ramp_down_per_period(dt) - base) / f.lift.end_gas_coeff,
         (s.ccgt_power - f.p.ccgt_electric.ramp_down_per_period(dt) - f.p.ccgt_map.a0) /
             f.p.ccgt_map.b0});
    const double q_end_floor = std::max(f.p.ccgt_heat.power_min,
                                        base + f.lift.end_gas_coeff * gas_floor);
    s.demand_q = draw(f.p.gb.power_min + q_end_floor + 0.5, q0 + 14.0);
    const double elec_floor = f.p.ccgt_map.a0 + f.p.ccgt_map.b0 * gas_floor;
    const double fc_floor = std::max(f.p.fc.power_min,
                                     s.fc_power_prev - f.p.fc.ramp_down_per_period(dt));
    const double grid_floor = std::max(f.p.grid.power_min,
                                       s.grid_power_prev - f.p.grid.ramp_down_per_period(dt));
    // charging is capped by the SOC headroom; the heat pump is not counted
    // as an absorber since it needs heat-balance headroom of its own
    const double pc_eff = std::min(f.p.storage.charge_max,
                                   (f.p.storage.soc_max - s.soc) /
                                       (f.p.storage.eta_charge * dt));
    const double min_net_supply = fc_floor + elec_floor + grid_floor - pc_eff;
    s.demand_e = draw(std::max(2.0, min_net_supply + 0.5),
                      std::max(6.0, min_net_supply + 0.5) + 18.0);
    return s;
}

std::vector<double> zeros(int n) { return std::vector<double>(static_cast<size_t>(n), 0.0); }

}  // namespace

TEST_CASE("subproblem structure") {
    const Fixture f;
    const SystemState s = nominal_state(f);

    SUBCASE("variable count is continuous decisions plus segments") {
        for (int n : {1, 7, 35}) {
            const LinearProgram lp =
                build_subproblem(s, zeros(n), {false, false}, f.p, f.lift);
            CHECK(lp.num_vars() == 10 + n);
        }
    }
    SUBCASE("monotonicity precondition enforced") {
        std::vector<double> bad = {1.0, 0.5, 2.0};
        CHECK_THROWS_AS(build_subproblem(s, bad, {false, false}, f.p, f.lift),
                        std::invalid_argument);
    }
    SUBCASE("zero slopes reduce the objective to the stage cost") {
        const SubproblemResult r = solve_period(s, zeros(35), f.p, f.lift);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(r.objective == doctest::Approx(stage_cost(s, r.decision, f.p)).epsilon(1e-9));
    }
    SUBCASE("post-decision heat matches the lifted dynamics and the fill sums") {
        const SubproblemResult r = solve_period(s, zeros(35), f.p, f.lift);
        REQUIRE(r.status == LpStatus::Optimal);
        AugmentedCcgtState aug = s.ccgt_aug;
        for (int k = 0; k < f.arma.samples_per_period; ++k)
            aug = step(aug, r.decision.gas_flow, f.arma);
        CHECK(r.post_decision_heat ==
              doctest::Approx(heat_output(aug, f.arma)).epsilon(1e-9));
        double fill = 0.0;
        for (double v : r.segment_fill) fill += v;
        CHECK(f.p.ccgt_heat.power_min + fill == doctest::Approx(r.post_decision_heat));
    }
}

TEST_CASE("tiny forced instance solves by hand") {
    // grid alone serves 2 MW at 60 $/MWh: everything else is pinned at zero
    Fixture f;
    f.p.fc = {0, 0, 1, 1, RampBasis::PerHour, 65.0};
    f.p.ccgt_electric = {0, 43, 1000, 1000, RampBasis::PerHour, 0.0};
    f.p.ccgt_heat = {0, 50, 1000, 1000, RampBasis::PerMinute, 0.0};
    f.p.gb = {0, 15, 1000, 1000, RampBasis::PerMinute, 300.0};
    f.p.hp = {0, 0, 1, 1, RampBasis::PerMinute, 0.0};
    f.p.grid = {-6, 6, 1000, 1000, RampBasis::PerHour, 0.0};
    f.p.storage = {0, 0, 0, 0, 1, 1, 0};
    f.p.ccgt_map = {0.0, 10.0, 0.0, 4.3};
    f.p.ccgt_initial_heat = 0.0;
    SystemState s;
    s.price = 60.0;
    s.demand_e = 2.0;
    s.demand_q = 0.0;
    s.ccgt_aug = AugmentedCcgtState::zero();
    const SubproblemResult r = solve_period(s, zeros(4), f.p, f.lift);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.decision.grid_power == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.decision.gas_flow == doctest::Approx(0.0));
    CHECK(r.objective == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(stage_cost(s, r.decision, f.p) == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("storage flags") {
    const Fixture f;

    SUBCASE("high price at full storage discharges") {
        SystemState s = nominal_state(f);
        s.soc = f.p.storage.soc_max;
        s.price = 120.0;
        const SubproblemResult r = solve_period(s, zeros(35), f.p, f.lift);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(r.decision.discharge_flag);
        CHECK(r.decision.discharge_power > 0.5);
        CHECK(r.decision.charge_power == 0.0);
        // explicit comparison of the three flag programs
        double obj[3];
        const FlagPair flags[3] = {{false, false}, {true, false}, {false, true}};
        for (int k = 0; k < 3; ++k) {
            const auto sol = solve_lp(build_subproblem(s, zeros(35), flags[k], f.p, f.lift));
            REQUIRE(sol.status == LpStatus::Optimal);
            obj[k] = sol.objective;
        }
        CHECK(obj[2] < obj[0] - 1e-6);
        CHECK(obj[2] < obj[1] - 1e-6);
        CHECK(r.objective == doctest::Approx(obj[2]));
    }
    SUBCASE("ties settle on no storage action") {
        // price exactly zero and flat future: charging, discharging and
        // idling all cost the same only if storage is useless; force that by
        // zero-capacity storage and check flags stay down
        Fixture f0 = f;
        f0.p.storage.charge_max = 0.0;
        f0.p.storage.discharge_max = 0.0;
        const SystemState s = nominal_state(f0);
        const SubproblemResult r = solve_period(s, zeros(35), f0.p, f0.lift);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK_FALSE(r.decision.charge_flag);
        CHECK_FALSE(r.decision.discharge_flag);
    }
}

TEST_CASE("solutions satisfy every dispatch constraint") {
    const Fixture f;
    std::mt19937_64 rng(2024);
    int solved = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const SystemState s = random_state(f, rng);
        std::vector<double> slopes = zeros(35);
        // occasionally a nontrivial monotone slope profile
        if (rep % 3 == 1) {
            std::uniform_real_distribution<double> u(-40.0, 0.0);
            double v = u(rng);
            for (auto& d : slopes) {
                v += std::uniform_real_distribution<double>(0.0, 3.0)(rng);
                d = v;
            }
        }
        const SubproblemResult r = solve_period(s, slopes, f.p, f.lift);
        REQUIRE_MESSAGE(r.status == LpStatus::Optimal, "rep ", rep);
        ++solved;
        const auto violations = audit_decision(s, r.decision, f.p, f.arma, 1e-7);
        for (const auto& v : violations)
            FAIL_CHECK("rep ", rep, " violates ", v.name, " by ", v.amount);
    }
    CHECK(solved == 300);
}

TEST_CASE("objective responds monotonically to slope relaxation") {
    const Fixture f;
    std::mt19937_64 rng(7);
    const SystemState s = nominal_state(f);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> slopes(35);
        double v = -30.0 + u(rng);
        for (auto& d : slopes) {
            v += u(rng);
            d = v;
        }
        const SubproblemResult hi = solve_period(s, slopes, f.p, f.lift);
        REQUIRE(hi.status == LpStatus::Optimal);
        // lower one slope without breaking monotonicity
        std::uniform_int_distribution<int> pick(0, 34);
        const int a = pick(rng);
        const double gap = (a == 0) ? 5.0 : slopes[a] - slopes[a - 1];
        std::vector<double> relaxed = slopes;
        relaxed[a] -= u(rng) * gap / 2.0;
        const SubproblemResult lo = solve_period(s, relaxed, f.p, f.lift);
        REQUIRE(lo.status == LpStatus::Optimal);
        CHECK(lo.objective <= hi.objective + 1e-9);
    }
}

TEST_CASE("segments fill left to right under strictly increasing slopes") {
    const Fixture f;
    const SystemState s = nominal_state(f);
    std::vector<double> slopes(35);
    for (int a = 0; a < 35; ++a) slopes[static_cast<size_t>(a)] = -20.0 + 1.1 * a;
    const LinearProgram lp = build_subproblem(s, slopes, {false, false}, f.p, f.lift);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    const double width = (f.p.ccgt_heat.power_max - f.p.ccgt_heat.power_min) / 35.0;
    for (int a = 0; a + 1 < 35; ++a) {
        const double ra = sol.value(10 + a);
        const double rnext = sol.value(10 + a + 1);
        if (ra < width - 1e-7) CHECK(rnext <= 1e-7);
    }
}

TEST_CASE("multi-period program") {
    const Fixture f;
    const SystemState s0 = nominal_state(f);

    auto flat_series = [&](int H) {
        std::vector<Realization> series;
        for (int t = 0; t < H; ++t)
            series.push_back({2.0, 12.0 + 0.3 * t, 60.0, 26.0 + 0.5 * t});
        return series;
    };

    SUBCASE("H=1 reduces to the per-period subproblem") {
        const auto series = flat_series(1);
        SystemState s = s0;
        s.wind_available = series[0].wind;
        s.demand_e = series[0].demand_e;
        s.price = series[0].price;
        s.demand_q = series[0].demand_q;
        const SubproblemResult single = solve_period(s, zeros(35), f.p, f.lift);
        const MultiPeriodResult multi = solve_multi_period(
            s, 1, series, {}, f.p, f.lift, BinaryMode::BranchAndBound);
        REQUIRE(single.status == LpStatus::Optimal);
        REQUIRE(multi.status == LpStatus::Optimal);
        CHECK(multi.objective == doctest::Approx(single.objective).epsilon(1e-7));
    }
    SUBCASE("relaxation lower-bounds branch and bound") {
        const auto series = flat_series(6);
        const MultiPeriodResult relaxed =
            solve_multi_period(s0, 6, series, {}, f.p, f.lift, BinaryMode::Relaxed);
        const MultiPeriodResult integer =
            solve_multi_period(s0, 6, series, {}, f.p, f.lift, BinaryMode::BranchAndBound);
        REQUIRE(relaxed.status == LpStatus::Optimal);
        REQUIRE(integer.status == LpStatus::Optimal);
        CHECK(relaxed.objective <= integer.objective + 1e-7);
    }
    SUBCASE("branch and bound matches exhaustive flag enumeration") {
        // 4-period toy with a cheap-then-dear price swing: every one of the
        // 3^4 flag patterns solved as a pinned leaf is the oracle
        const int H = 4;
        auto series = flat_series(H);
        series[1].price = 20.0;   // cheap: charge
        series[3].price = 130.0;  // dear: discharge
        const MultiPeriodResult bb =
            solve_multi_period(s0, H, series, {}, f.p, f.lift, BinaryMode::BranchAndBound);
        REQUIRE(bb.status == LpStatus::Optimal);

        double best = kInf;
        for (int mask = 0; mask < 81; ++mask) {
            int m = mask;
            std::vector<StorageFix> flags(H);
            for (int t = 0; t < H; ++t) {
                flags[static_cast<size_t>(t)] = static_cast<StorageFix>(m % 3);
                m /= 3;
            }
            const MultiPeriodResult leaf = solve_multi_period_fixed(
                s0, H, series, {}, f.p, f.lift, flags);
            if (leaf.status == LpStatus::Optimal) best = std::min(best, leaf.objective);
        }
        REQUIRE(best < kInf);
        CHECK(bb.objective == doctest::Approx(best).epsilon(1e-7));
        // storage should actually move on this instance
        CHECK(bb.decisions[3].discharge_power > 0.1);
    }
    SUBCASE("series shorter than the horizon is rejected") {
        const auto series = flat_series(3);
        CHECK_THROWS_AS(
            solve_multi_period(s0, 5, series, {}, f.p, f.lift, BinaryMode::Relaxed),
            std::invalid_argument);
    }
    SUBCASE("terminal slopes steer the final heat upward") {
        const auto series = flat_series(4);
        std::vector<double> pull(35, -500.0);  // strong reward for stored heat
        const MultiPeriodResult base =
            solve_multi_period(s0, 4, series, {}, f.p, f.lift, BinaryMode::BranchAndBound);
        const MultiPeriodResult pulled = solve_multi_period(
            s0, 4, series, pull, f.p, f.lift, BinaryMode::BranchAndBound);
        REQUIRE(base.status == LpStatus::Optimal);
        REQUIRE(pulled.status == LpStatus::Optimal);
        CHECK(pulled.end_heat.back() >= base.end_heat.back() - 1e-7);
    }
}
