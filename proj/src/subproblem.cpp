#include "mgrid/subproblem.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <stdexcept>

namespace mgrid {

namespace {

struct Window {
    double lo = -kInf;
    double hi = kInf;

    Window clip(double l, double h) const { return {std::max(lo, l), std::min(hi, h)}; }
};

/// Bounds with an escape hatch: an empty operating window becomes a named
/// infeasible row instead of a construction failure, so callers get a
/// proper LP status.
int add_window_var(LinearProgram& lp, const std::string& name, Window w, double cost) {
    if (w.lo <= w.hi) return lp.add_variable(name, w.lo, w.hi, cost);
    const int v = lp.add_variable(name, w.lo, w.lo, cost);
    const int r = lp.add_le(name + "_window", w.hi);
    lp.set_coeff(r, v, 1.0);
    return v;
}

Window ramp_window(double prev, const UnitParams& u, double dt) {
    return Window{prev - u.ramp_down_per_period(dt), prev + u.ramp_up_per_period(dt)}
        .clip(u.power_min, u.power_max);
}

void check_slopes_monotone(std::span<const double> slopes) {
    for (size_t a = 0; a + 1 < slopes.size(); ++a)
        if (slopes[a] > slopes[a + 1] + 1e-9)
            throw std::invalid_argument("subproblem: VFA slopes must be monotone nondecreasing");
}

double dot7(const std::array<double, 7>& a, const std::array<double, 7>& b) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += a[i] * b[i];
    return s;
}

std::array<double, 7> lift_matvec(const PeriodLift& lift, const std::array<double, 7>& v) {
    std::array<double, 7> r{};
    for (int i = 0; i < 7; ++i) {
        double s = 0.0;
        for (int j = 0; j < 7; ++j) s += lift.A_delta[i][j] * v[j];
        r[i] = s;
    }
    return r;
}

double read_heat(const PeriodLift& lift, const AugmentedCcgtState& s) {
    return dot7(lift.out_row, s.x);
}

/// Steady-state heat per unit gas implied by the period map:
/// out_row (I - A_delta)^-1 B_delta.
double lift_steady_gain(const PeriodLift& lift) {
    std::array<std::array<double, 8>, 7> m{};
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) m[i][j] = (i == j ? 1.0 : 0.0) - lift.A_delta[i][j];
        m[i][7] = lift.B_delta[i];
    }
    for (int c = 0; c < 7; ++c) {
        int p = c;
        for (int i = c + 1; i < 7; ++i)
            if (std::abs(m[i][c]) > std::abs(m[p][c])) p = i;
        if (std::abs(m[p][c]) < 1e-14)
            throw std::domain_error("period lift: I - A singular, no steady gain");
        std::swap(m[p], m[c]);
        for (int i = c + 1; i < 7; ++i) {
            const double f = m[i][c] / m[c][c];
            if (f == 0.0) continue;
            for (int j = c; j < 8; ++j) m[i][j] -= f * m[c][j];
        }
    }
    std::array<double, 7> y{};
    for (int i = 6; i >= 0; --i) {
        double v = m[i][7];
        for (int j = i + 1; j < 7; ++j) v -= m[i][j] * y[j];
        y[i] = v / m[i][i];
    }
    double gain = 0.0;
    for (int i = 0; i < 7; ++i) gain += lift.out_row[i] * y[i];
    return gain;
}

// fixed variable order inside the single-period LP
enum VarIndex {
    kFc = 0,
    kGas,
    kGrid,
    kCharge,
    kDischarge,
    kWindCur,
    kLoadCur,
    kGb,
    kHp,
    kHeatCur,
    kFirstSegment
};

}  // namespace

LinearProgram build_subproblem(const SystemState& s, std::span<const double> slopes,
                               FlagPair flags, const MicrogridParams& p,
                               const PeriodLift& lift) {
    check_slopes_monotone(slopes);
    const double dt = p.period_hours;
    const int nseg = static_cast<int>(slopes.size());
    const double q_min = p.ccgt_heat.power_min;
    const double q_max = p.ccgt_heat.power_max;
    const double width = nseg > 0 ? (q_max - q_min) / nseg : 0.0;

    const double heat_base = dot7(lift.end_state_row, s.ccgt_aug.x);
    const double heat_gas = lift.end_gas_coeff;
    const double q_prev = read_heat(lift, s.ccgt_aug);

    LinearProgram lp;
    lp.objective_offset = dt * p.ccgt_electric.cost_coefficient * p.ccgt_map.a0;

    add_window_var(lp, "fc", ramp_window(s.fc_power_prev, p.fc, dt),
                   dt * p.fc.cost_coefficient);

    // the gas window folds the electric bounds, electric ramp and heat ramp;
    // the heat range itself comes through the segment link (or directly when
    // no segments are present)
    Window gas{p.ccgt_map.gas_min, p.ccgt_map.gas_max};
    gas = gas.clip((p.ccgt_electric.power_min - p.ccgt_map.a0) / p.ccgt_map.b0,
                   (p.ccgt_electric.power_max - p.ccgt_map.a0) / p.ccgt_map.b0);
    {
        const Window ew = ramp_window(s.ccgt_power, p.ccgt_electric, dt);
        gas = gas.clip((ew.lo - p.ccgt_map.a0) / p.ccgt_map.b0,
                       (ew.hi - p.ccgt_map.a0) / p.ccgt_map.b0);
        const double rq_up = p.ccgt_heat.ramp_up_per_period(dt);
        const double rq_dn = p.ccgt_heat.ramp_down_per_period(dt);
        gas = gas.clip((q_prev - rq_dn - heat_base) / heat_gas,
                       (q_prev + rq_up - heat_base) / heat_gas);
        if (nseg == 0)
            gas = gas.clip((q_min - heat_base) / heat_gas, (q_max - heat_base) / heat_gas);
    }
    add_window_var(lp, "gas", gas, dt * p.ccgt_electric.cost_coefficient * p.ccgt_map.b0);

    add_window_var(lp, "grid", ramp_window(s.grid_power_prev, p.grid, dt), dt * s.price);
    lp.add_variable("charge", 0.0, flags.charge ? p.storage.charge_max : 0.0, 0.0);
    lp.add_variable("discharge", 0.0, flags.discharge ? p.storage.discharge_max : 0.0, 0.0);
    lp.add_variable("wind_curtail", 0.0, s.wind_available, dt * p.penalties.wind_curtailment);
    lp.add_variable("load_curtail", 0.0, s.demand_e, dt * p.penalties.load_curtailment);
    add_window_var(lp, "gb", ramp_window(s.gb_heat_prev, p.gb, dt), dt * p.gb.cost_coefficient);
    add_window_var(lp, "hp", ramp_window(s.hp_heat_prev, p.hp, dt), dt * p.hp.cost_coefficient);
    lp.add_variable("heat_curtail", 0.0, s.demand_q, dt * p.penalties.heat_curtailment);
    for (int a = 0; a < nseg; ++a)
        lp.add_variable("seg" + std::to_string(a), 0.0, width, slopes[a]);

    // power balance:
    // fc + (a0 + b0 g) + grid + pd - pc + (wind - wcur) - hp/cop + lcur = demand_e
    {
        const int r = lp.add_eq("power_balance", s.demand_e - s.wind_available - p.ccgt_map.a0);
        lp.set_coeff(r, kFc, 1.0);
        lp.set_coeff(r, kGas, p.ccgt_map.b0);
        lp.set_coeff(r, kGrid, 1.0);
        lp.set_coeff(r, kDischarge, 1.0);
        lp.set_coeff(r, kCharge, -1.0);
        lp.set_coeff(r, kWindCur, -1.0);
        lp.set_coeff(r, kHp, -1.0 / p.heat_pump_cop);
        lp.set_coeff(r, kLoadCur, 1.0);
    }
    // heat balance: gb + q_ccgt + hp + qcur = demand_q
    {
        const bool avg = p.heat_balance_sample == HeatBalanceSample::PeriodAverage;
        const double b = avg ? dot7(lift.avg_state_row, s.ccgt_aug.x) : heat_base;
        const double coeff = avg ? lift.avg_gas_coeff : heat_gas;
        const int r = lp.add_eq("heat_balance", s.demand_q - b);
        lp.set_coeff(r, kGb, 1.0);
        lp.set_coeff(r, kGas, coeff);
        lp.set_coeff(r, kHp, 1.0);
        lp.set_coeff(r, kHeatCur, 1.0);
    }
    // projected SOC window
    {
        const int r = lp.add_row("soc", p.storage.soc_min - s.soc, p.storage.soc_max - s.soc);
        lp.set_coeff(r, kCharge, p.storage.eta_charge * dt);
        lp.set_coeff(r, kDischarge, -dt / p.storage.eta_discharge);
    }
    // segment link: q_min + sum r_a = heat_base + heat_gas * g
    if (nseg > 0) {
        const int r = lp.add_eq("segment_link", heat_base - q_min);
        for (int a = 0; a < nseg; ++a) lp.set_coeff(r, kFirstSegment + a, 1.0);
        lp.set_coeff(r, kGas, -heat_gas);
    }
    return lp;
}

namespace {

Decision decision_from_primal(const LpSolution& sol, FlagPair flags) {
    Decision d;
    d.fc_power = sol.value(kFc);
    d.gas_flow = sol.value(kGas);
    d.grid_power = sol.value(kGrid);
    d.charge_power = sol.value(kCharge);
    d.discharge_power = sol.value(kDischarge);
    d.charge_flag = flags.charge;
    d.discharge_flag = flags.discharge;
    d.wind_curtail = sol.value(kWindCur);
    d.load_curtail = sol.value(kLoadCur);
    d.gb_heat = sol.value(kGb);
    d.hp_heat = sol.value(kHp);
    d.heat_curtail = sol.value(kHeatCur);
    return d;
}

}  // namespace

SubproblemResult solve_period(const SystemState& s, std::span<const double> slopes,
                              const MicrogridParams& p, const PeriodLift& lift) {
    static constexpr FlagPair kFlagOrder[3] = {{false, false}, {true, false}, {false, true}};
    SubproblemResult best;
    LpStatus first_bad = LpStatus::Optimal;
    bool have_best = false;
    for (const FlagPair flags : kFlagOrder) {
        const LinearProgram lp = build_subproblem(s, slopes, flags, p, lift);
        const LpSolution sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) {
            if (first_bad == LpStatus::Optimal) first_bad = sol.status;
            continue;
        }
        if (!have_best || sol.objective < best.objective - 1e-9) {
            have_best = true;
            best.status = LpStatus::Optimal;
            best.objective = sol.objective;
            best.decision = decision_from_primal(sol, flags);
        }
    }
    if (!have_best) {
        best.status = first_bad == LpStatus::Optimal ? LpStatus::NumericalFailure : first_bad;
        return best;
    }
    best.post_decision_heat = lift.end_heat(s.ccgt_aug, best.decision.gas_flow);
    const int nseg = static_cast<int>(slopes.size());
    if (nseg > 0) {
        const double q_min = p.ccgt_heat.power_min;
        const double width = (p.ccgt_heat.power_max - q_min) / nseg;
        best.segment_fill.resize(static_cast<size_t>(nseg));
        for (int a = 0; a < nseg; ++a)
            best.segment_fill[static_cast<size_t>(a)] =
                std::clamp(best.post_decision_heat - q_min - a * width, 0.0, width);
    }
    return best;
}

namespace {

// per-period storage-flag fixing inside branch and bound
enum class FlagFix : int8_t { Free = -1, None = 0, ChargeOnly = 1, DischargeOnly = 2 };

struct PeriodVars {
    int fc = -1, gas = -1, grid = -1, pc = -1, pd = -1;
    int wcur = -1, lcur = -1, gb = -1, hp = -1, qcur = -1;
    int uc = -1, ud = -1;  // present only while the period's flags are free
};

struct MultiLp {
    LinearProgram lp;
    std::vector<PeriodVars> pv;
    std::vector<int> seg_vars;
    // heat response data kept for decision extraction
    std::vector<double> h, base;
    double gain = 0.0;
    bool is_static = false;
};

MultiLp build_multi(const SystemState& s0, int H, std::span<const Realization> series,
                    std::span<const double> terminal_slopes, const MicrogridParams& p,
                    const PeriodLift& lift, const std::vector<FlagFix>& fixing,
                    HeatModel heat_model) {
    const double dt = p.period_hours;
    const double q_min = p.ccgt_heat.power_min;
    const double q_max = p.ccgt_heat.power_max;
    const double rq_up = p.ccgt_heat.ramp_up_per_period(dt);
    const double rq_dn = p.ccgt_heat.ramp_down_per_period(dt);
    const bool avg_balance = p.heat_balance_sample == HeatBalanceSample::PeriodAverage;

    MultiLp mb;
    mb.is_static = heat_model == HeatModel::StaticGain;
    mb.h.assign(static_cast<size_t>(H), 0.0);
    mb.base.assign(static_cast<size_t>(H), 0.0);
    // hb/hbase drive the heat balance; h/base always describe the end sample
    std::vector<double> hb(static_cast<size_t>(H), 0.0);
    std::vector<double> hbase(static_cast<size_t>(H), 0.0);
    const double q_prev0 = read_heat(lift, s0.ccgt_aug);

    if (mb.is_static) {
        mb.gain = lift_steady_gain(lift);
        mb.h[0] = mb.gain;
        hb[0] = mb.gain;
    } else {
        // end heat of period t: base[t] + sum_{j<=t} h[t-j] gas_j
        // period-average: hbase[t] + hb[0] gas_t + sum_{j<t} hb[t-j] gas_j
        std::array<double, 7> w = lift.B_delta;  // A^k B as k advances
        for (int k = 0; k < H; ++k) {
            mb.h[static_cast<size_t>(k)] = dot7(lift.out_row, w);
            if (k + 1 < H) hb[static_cast<size_t>(k + 1)] = dot7(lift.avg_state_row, w);
            w = lift_matvec(lift, w);
        }
        hb[0] = lift.avg_gas_coeff;
        // the impulse response decays geometrically; drop the far tail so
        // rows stay well scaled (the truncated mass is below the audit
        // tolerance for any admissible gas)
        for (double& v : mb.h)
            if (std::abs(v) < 1e-8) v = 0.0;
        for (double& v : hb)
            if (std::abs(v) < 1e-8) v = 0.0;
        std::array<double, 7> sx = s0.ccgt_aug.x;  // A^t x0 as t advances
        for (int t = 0; t < H; ++t) {
            mb.base[static_cast<size_t>(t)] = dot7(lift.end_state_row, sx);
            hbase[static_cast<size_t>(t)] = dot7(lift.avg_state_row, sx);
            sx = lift_matvec(lift, sx);
        }
        if (!avg_balance) {
            hb = mb.h;
            hbase = mb.base;
        }
    }

    LinearProgram& lp = mb.lp;
    lp.objective_offset = dt * p.ccgt_electric.cost_coefficient * p.ccgt_map.a0 * H;
    mb.pv.resize(static_cast<size_t>(H));

    const double cc_gas = dt * p.ccgt_electric.cost_coefficient * p.ccgt_map.b0;
    for (int t = 0; t < H; ++t) {
        PeriodVars& v = mb.pv[static_cast<size_t>(t)];
        const std::string ts = std::to_string(t);
        const Realization& ex = series[static_cast<size_t>(t)];

        const Window fcw = (t == 0) ? ramp_window(s0.fc_power_prev, p.fc, dt)
                                    : Window{p.fc.power_min, p.fc.power_max};
        v.fc = add_window_var(lp, "fc_" + ts, fcw, dt * p.fc.cost_coefficient);

        Window gas{p.ccgt_map.gas_min, p.ccgt_map.gas_max};
        gas = gas.clip((p.ccgt_electric.power_min - p.ccgt_map.a0) / p.ccgt_map.b0,
                       (p.ccgt_electric.power_max - p.ccgt_map.a0) / p.ccgt_map.b0);
        if (mb.is_static) gas = gas.clip(q_min / mb.gain, q_max / mb.gain);
        if (t == 0) {
            const Window ew = ramp_window(s0.ccgt_power, p.ccgt_electric, dt);
            gas = gas.clip((ew.lo - p.ccgt_map.a0) / p.ccgt_map.b0,
                           (ew.hi - p.ccgt_map.a0) / p.ccgt_map.b0);
            if (mb.is_static) {
                gas = gas.clip((q_prev0 - rq_dn) / mb.gain, (q_prev0 + rq_up) / mb.gain);
            } else {
                gas = gas.clip((q_prev0 - rq_dn - mb.base[0]) / mb.h[0],
                               (q_prev0 + rq_up - mb.base[0]) / mb.h[0]);
                gas = gas.clip((q_min - mb.base[0]) / mb.h[0], (q_max - mb.base[0]) / mb.h[0]);
            }
        }
        v.gas = add_window_var(lp, "gas_" + ts, gas, cc_gas);

        const Window gw = (t == 0) ? ramp_window(s0.grid_power_prev, p.grid, dt)
                                   : Window{p.grid.power_min, p.grid.power_max};
        v.grid = add_window_var(lp, "grid_" + ts, gw, dt * ex.price);

        const FlagFix fix = fixing[static_cast<size_t>(t)];
        const bool allow_c = fix == FlagFix::Free || fix == FlagFix::ChargeOnly;
        const bool allow_d = fix == FlagFix::Free || fix == FlagFix::DischargeOnly;
        v.pc = lp.add_variable("charge_" + ts, 0.0, allow_c ? p.storage.charge_max : 0.0, 0.0);
        v.pd = lp.add_variable("discharge_" + ts, 0.0,
                               allow_d ? p.storage.discharge_max : 0.0, 0.0);
        v.wcur = lp.add_variable("wind_curtail_" + ts, 0.0, ex.wind,
                                 dt * p.penalties.wind_curtailment);
        v.lcur = lp.add_variable("load_curtail_" + ts, 0.0, ex.demand_e,
                                 dt * p.penalties.load_curtailment);
        const Window gbw = (t == 0) ? ramp_window(s0.gb_heat_prev, p.gb, dt)
                                    : Window{p.gb.power_min, p.gb.power_max};
        v.gb = add_window_var(lp, "gb_" + ts, gbw, dt * p.gb.cost_coefficient);
        const Window hpw = (t == 0) ? ramp_window(s0.hp_heat_prev, p.hp, dt)
                                    : Window{p.hp.power_min, p.hp.power_max};
        v.hp = add_window_var(lp, "hp_" + ts, hpw, dt * p.hp.cost_coefficient);
        v.qcur = lp.add_variable("heat_curtail_" + ts, 0.0, ex.demand_q,
                                 dt * p.penalties.heat_curtailment);
        if (fix == FlagFix::Free) {
            v.uc = lp.add_variable("uc_" + ts, 0.0, 1.0, 0.0);
            v.ud = lp.add_variable("ud_" + ts, 0.0, 1.0, 0.0);
        }
    }
    const int nseg = static_cast<int>(terminal_slopes.size());
    const double width = nseg > 0 ? (q_max - q_min) / nseg : 0.0;
    for (int a = 0; a < nseg; ++a)
        mb.seg_vars.push_back(
            lp.add_variable("seg" + std::to_string(a), 0.0, width, terminal_slopes[a]));

    for (int t = 0; t < H; ++t) {
        const PeriodVars& v = mb.pv[static_cast<size_t>(t)];
        const std::string ts = std::to_string(t);
        const Realization& ex = series[static_cast<size_t>(t)];

        {
            const int r =
                lp.add_eq("power_balance_" + ts, ex.demand_e - ex.wind - p.ccgt_map.a0);
            lp.set_coeff(r, v.fc, 1.0);
            lp.set_coeff(r, v.gas, p.ccgt_map.b0);
            lp.set_coeff(r, v.grid, 1.0);
            lp.set_coeff(r, v.pd, 1.0);
            lp.set_coeff(r, v.pc, -1.0);
            lp.set_coeff(r, v.wcur, -1.0);
            lp.set_coeff(r, v.hp, -1.0 / p.heat_pump_cop);
            lp.set_coeff(r, v.lcur, 1.0);
        }
        {
            const int r = lp.add_eq("heat_balance_" + ts,
                                    ex.demand_q - (mb.is_static ? 0.0 : hbase[static_cast<size_t>(t)]));
            lp.set_coeff(r, v.gb, 1.0);
            lp.set_coeff(r, v.hp, 1.0);
            lp.set_coeff(r, v.qcur, 1.0);
            if (mb.is_static) {
                lp.set_coeff(r, v.gas, mb.gain);
            } else {
                for (int j = 0; j <= t; ++j)
                    lp.set_coeff(r, mb.pv[static_cast<size_t>(j)].gas,
                                 hb[static_cast<size_t>(t - j)]);
            }
        }
        {
            const int r = lp.add_row("soc_" + ts, p.storage.soc_min - s0.soc,
                                     p.storage.soc_max - s0.soc);
            for (int j = 0; j <= t; ++j) {
                lp.set_coeff(r, mb.pv[static_cast<size_t>(j)].pc, p.storage.eta_charge * dt);
                lp.set_coeff(r, mb.pv[static_cast<size_t>(j)].pd,
                             -dt / p.storage.eta_discharge);
            }
        }
        if (v.uc >= 0) {
            int r = lp.add_le("charge_gate_" + ts, 0.0);
            lp.set_coeff(r, v.pc, 1.0);
            lp.set_coeff(r, v.uc, -p.storage.charge_max);
            r = lp.add_le("discharge_gate_" + ts, 0.0);
            lp.set_coeff(r, v.pd, 1.0);
            lp.set_coeff(r, v.ud, -p.storage.discharge_max);
            r = lp.add_le("flag_sum_" + ts, 1.0);
            lp.set_coeff(r, v.uc, 1.0);
            lp.set_coeff(r, v.ud, 1.0);
        }
        if (t >= 1) {
            const PeriodVars& u = mb.pv[static_cast<size_t>(t - 1)];
            auto ramp_row = [&](const char* tag, int var_t, int var_p, double scale,
                                const UnitParams& unit) {
                const int r = lp.add_row(std::string(tag) + "_" + ts,
                                         -unit.ramp_down_per_period(dt),
                                         unit.ramp_up_per_period(dt));
                lp.set_coeff(r, var_t, scale);
                lp.set_coeff(r, var_p, -scale);
            };
            ramp_row("fc_ramp", v.fc, u.fc, 1.0, p.fc);
            ramp_row("ccgt_e_ramp", v.gas, u.gas, p.ccgt_map.b0, p.ccgt_electric);
            ramp_row("grid_ramp", v.grid, u.grid, 1.0, p.grid);
            ramp_row("gb_ramp", v.gb, u.gb, 1.0, p.gb);
            ramp_row("hp_ramp", v.hp, u.hp, 1.0, p.hp);
            if (mb.is_static) {
                const int r = lp.add_row("heat_ramp_" + ts, -rq_dn, rq_up);
                lp.set_coeff(r, v.gas, mb.gain);
                lp.set_coeff(r, u.gas, -mb.gain);
            } else {
                // end heat difference: coefficients h[t-j] - h[t-1-j]
                const double b = mb.base[static_cast<size_t>(t)] -
                                 mb.base[static_cast<size_t>(t - 1)];
                const int r = lp.add_row("heat_ramp_" + ts, -rq_dn - b, rq_up - b);
                for (int j = 0; j <= t; ++j) {
                    const double c = mb.h[static_cast<size_t>(t - j)] -
                                     (j <= t - 1 ? mb.h[static_cast<size_t>(t - 1 - j)] : 0.0);
                    if (c != 0.0) lp.set_coeff(r, mb.pv[static_cast<size_t>(j)].gas, c);
                }
                // end-of-period heat envelope
                const double hb0 = mb.base[static_cast<size_t>(t)];
                const int rb = lp.add_row("heat_bound_" + ts, q_min - hb0, q_max - hb0);
                for (int j = 0; j <= t; ++j)
                    lp.set_coeff(rb, mb.pv[static_cast<size_t>(j)].gas,
                                 mb.h[static_cast<size_t>(t - j)]);
            }
        }
    }
    if (nseg > 0) {
        // q_min + sum r_a = end heat of the final period
        const int T = H - 1;
        const double b = mb.is_static ? 0.0 : mb.base[static_cast<size_t>(T)];
        const int r = lp.add_eq("segment_link", b - q_min);
        for (int a = 0; a < nseg; ++a) lp.set_coeff(r, mb.seg_vars[static_cast<size_t>(a)], 1.0);
        if (mb.is_static) {
            lp.set_coeff(r, mb.pv[static_cast<size_t>(T)].gas, -mb.gain);
        } else {
            for (int j = 0; j <= T; ++j)
                lp.set_coeff(r, mb.pv[static_cast<size_t>(j)].gas,
                             -mb.h[static_cast<size_t>(T - j)]);
        }
    }
    return mb;
}

struct MultiSolve {
    LpSolution sol;
    std::vector<Decision> decisions;
    std::vector<double> end_heat;
};

MultiSolve solve_multi_node(const SystemState& s0, int H, std::span<const Realization> series,
                            std::span<const double> terminal_slopes, const MicrogridParams& p,
                            const PeriodLift& lift, const std::vector<FlagFix>& fixing,
                            HeatModel heat_model) {
    const MultiLp mb = build_multi(s0, H, series, terminal_slopes, p, lift, fixing, heat_model);
    MultiSolve ms;
    ms.sol = solve_lp(mb.lp);
    if (ms.sol.status != LpStatus::Optimal) return ms;
    ms.decisions.resize(static_cast<size_t>(H));
    ms.end_heat.resize(static_cast<size_t>(H));
    for (int t = 0; t < H; ++t) {
        const PeriodVars& v = mb.pv[static_cast<size_t>(t)];
        Decision& d = ms.decisions[static_cast<size_t>(t)];
        d.fc_power = ms.sol.value(v.fc);
        d.gas_flow = ms.sol.value(v.gas);
        d.grid_power = ms.sol.value(v.grid);
        d.charge_power = ms.sol.value(v.pc);
        d.discharge_power = ms.sol.value(v.pd);
        d.wind_curtail = ms.sol.value(v.wcur);
        d.load_curtail = ms.sol.value(v.lcur);
        d.gb_heat = ms.sol.value(v.gb);
        d.hp_heat = ms.sol.value(v.hp);
        d.heat_curtail = ms.sol.value(v.qcur);
        d.charge_flag = d.charge_power > 1e-9;
        d.discharge_flag = d.discharge_power > 1e-9;
        if (mb.is_static) {
            ms.end_heat[static_cast<size_t>(t)] = mb.gain * d.gas_flow;
        } else {
            double q = mb.base[static_cast<size_t>(t)];
            for (int j = 0; j <= t; ++j)
                q += mb.h[static_cast<size_t>(t - j)] *
                     ms.decisions[static_cast<size_t>(j)].gas_flow;
            ms.end_heat[static_cast<size_t>(t)] = q;
        }
    }
    return ms;
}

}  // namespace

MultiPeriodResult solve_multi_period_fixed(const SystemState& initial_state, int horizon,
                                           std::span<const Realization> series,
                                           std::span<const double> terminal_slopes,
                                           const MicrogridParams& params,
                                           const PeriodLift& lift,
                                           std::span<const StorageFix> flags,
                                           HeatModel heat_model) {
    if (horizon < 1) throw std::invalid_argument("solve_multi_period: horizon must be >= 1");
    if (static_cast<int>(series.size()) < horizon)
        throw std::invalid_argument("solve_multi_period: series shorter than horizon");
    if (static_cast<int>(flags.size()) != horizon)
        throw std::invalid_argument("solve_multi_period: flag pattern length mismatch");
    std::vector<FlagFix> fixing(static_cast<size_t>(horizon));
    for (int t = 0; t < horizon; ++t)
        fixing[static_cast<size_t>(t)] = static_cast<FlagFix>(flags[static_cast<size_t>(t)]);
    MultiSolve ms = solve_multi_node(initial_state, horizon, series, terminal_slopes, params,
                                     lift, fixing, heat_model);
    MultiPeriodResult out;
    out.status = ms.sol.status;
    out.infeasible_row = ms.sol.infeasible_row;
    out.nodes_explored = 1;
    if (ms.sol.status == LpStatus::Optimal) {
        out.decisions = std::move(ms.decisions);
        out.end_heat = std::move(ms.end_heat);
        out.objective = ms.sol.objective;
        for (int t = 0; t < horizon; ++t) {
            Decision& d = out.decisions[static_cast<size_t>(t)];
            d.charge_flag = flags[static_cast<size_t>(t)] == StorageFix::ChargeOnly;
            d.discharge_flag = flags[static_cast<size_t>(t)] == StorageFix::DischargeOnly;
        }
    }
    return out;
}

MultiPeriodResult solve_multi_period(const SystemState& initial_state, int horizon,
                                     std::span<const Realization> series,
                                     std::span<const double> terminal_slopes,
                                     const MicrogridParams& params, const PeriodLift& lift,
                                     BinaryMode binary_mode, HeatModel heat_model) {
    if (horizon < 1) throw std::invalid_argument("solve_multi_period: horizon must be >= 1");
    if (static_cast<int>(series.size()) < horizon)
        throw std::invalid_argument("solve_multi_period: series shorter than horizon");

    MultiPeriodResult out;
    std::vector<FlagFix> root(static_cast<size_t>(horizon), FlagFix::Free);

    if (binary_mode == BinaryMode::Relaxed) {
        MultiSolve ms = solve_multi_node(initial_state, horizon, series, terminal_slopes,
                                         params, lift, root, heat_model);
        out.status = ms.sol.status;
        out.infeasible_row = ms.sol.infeasible_row;
        out.nodes_explored = 1;
        if (ms.sol.status == LpStatus::Optimal) {
            out.decisions = std::move(ms.decisions);
            out.end_heat = std::move(ms.end_heat);
            out.objective = ms.sol.objective;
        }
        return out;
    }

    // depth-first search over per-period flag fixings with LP bounding
    constexpr double kFlowTol = 1e-7;
    constexpr int kNodeLimit = 600;
    double best_obj = kInf;
    double root_bound = -kInf;
    bool have_best = false;
    int nodes = 0;

    auto node_solve = [&](const std::vector<FlagFix>& fixing) {
        ++nodes;
        MultiSolve ms = solve_multi_node(initial_state, horizon, series, terminal_slopes,
                                         params, lift, fixing, heat_model);
        if (std::getenv("MG_BB_DEBUG"))
            std::fprintf(stderr, "bb node %d status %s obj %.2f best %.2f\n", nodes,
                         to_string(ms.sol.status), ms.sol.objective, best_obj);
        return ms;
    };
    auto cycling_period = [&](const std::vector<Decision>& ds, const std::vector<FlagFix>& fx) {
        int worst = -1;
        double amount = kFlowTol;
        for (int t = 0; t < horizon; ++t) {
            if (fx[static_cast<size_t>(t)] != FlagFix::Free) continue;
            const double both = std::min(ds[static_cast<size_t>(t)].charge_power,
                                         ds[static_cast<size_t>(t)].discharge_power);
            if (both > amount) {
                amount = both;
                worst = t;
            }
        }
        return worst;
    };
    auto accept_incumbent = [&](const std::vector<FlagFix>& pinned) {
        MultiSolve exact = node_solve(pinned);
        if (exact.sol.status != LpStatus::Optimal) return;
        if (have_best && exact.sol.objective >= best_obj - 1e-9) return;
        have_best = true;
        best_obj = exact.sol.objective;
        out.decisions = std::move(exact.decisions);
        out.end_heat = std::move(exact.end_heat);
        for (int t = 0; t < horizon; ++t) {
            Decision& d = out.decisions[static_cast<size_t>(t)];
            d.charge_flag = pinned[static_cast<size_t>(t)] == FlagFix::ChargeOnly;
            d.discharge_flag = pinned[static_cast<size_t>(t)] == FlagFix::DischargeOnly;
        }
    };
    // pin every free period to the side its relaxed flows point at
    auto pin_all = [&](const std::vector<FlagFix>& fixing, const std::vector<Decision>& ds) {
        std::vector<FlagFix> pinned = fixing;
        for (int t = 0; t < horizon; ++t) {
            if (pinned[static_cast<size_t>(t)] != FlagFix::Free) continue;
            const Decision& d = ds[static_cast<size_t>(t)];
            if (d.charge_power > kFlowTol && d.discharge_power > kFlowTol)
                pinned[static_cast<size_t>(t)] =
                    d.charge_power >= d.discharge_power ? FlagFix::ChargeOnly
                                                        : FlagFix::DischargeOnly;
            else if (d.charge_power > kFlowTol)
                pinned[static_cast<size_t>(t)] = FlagFix::ChargeOnly;
            else if (d.discharge_power > kFlowTol)
                pinned[static_cast<size_t>(t)] = FlagFix::DischargeOnly;
            else
                pinned[static_cast<size_t>(t)] = FlagFix::None;
        }
        return pinned;
    };

    // root relaxation plus a rounding dive for a strong starting incumbent
    {
        MultiSolve root_ms = node_solve(root);
        if (root_ms.sol.status == LpStatus::Infeasible) {
            out.status = LpStatus::Infeasible;
            out.infeasible_row = root_ms.sol.infeasible_row;
            out.nodes_explored = nodes;
            return out;
        }
        if (root_ms.sol.status != LpStatus::Optimal) {
            out.status = root_ms.sol.status;
            out.nodes_explored = nodes;
            return out;
        }
        root_bound = root_ms.sol.objective;
        std::vector<FlagFix> dive = root;
        std::vector<Decision> point = root_ms.decisions;
        for (int round = 0; round < 6; ++round) {
            bool any = false;
            for (int t = 0; t < horizon; ++t) {
                if (dive[static_cast<size_t>(t)] != FlagFix::Free) continue;
                const Decision& d = point[static_cast<size_t>(t)];
                if (d.charge_power > kFlowTol && d.discharge_power > kFlowTol) {
                    any = true;
                    const double hi = std::max(d.charge_power, d.discharge_power);
                    const double lo = std::min(d.charge_power, d.discharge_power);
                    dive[static_cast<size_t>(t)] =
                        (lo < 0.25 * hi)
                            ? (d.charge_power >= d.discharge_power ? FlagFix::ChargeOnly
                                                                   : FlagFix::DischargeOnly)
                            : FlagFix::None;
                }
            }
            if (!any) break;
            MultiSolve ms = node_solve(dive);
            if (ms.sol.status != LpStatus::Optimal) break;
            point = std::move(ms.decisions);
        }
        accept_incumbent(pin_all(dive, point));
    }

    std::vector<std::vector<FlagFix>> stack{root};
    while (!stack.empty()) {
        if (nodes >= kNodeLimit) {
            // out of node budget: return the incumbent with its proven gap
            out.nodes_explored = nodes;
            if (have_best) {
                out.status = LpStatus::Optimal;
                out.objective = best_obj;
                out.bound_gap = best_obj - root_bound;
            } else {
                out.status = LpStatus::IterationLimit;
            }
            return out;
        }
        const std::vector<FlagFix> fixing = std::move(stack.back());
        stack.pop_back();
        MultiSolve ms = node_solve(fixing);
        if (ms.sol.status == LpStatus::Infeasible) continue;
        if (ms.sol.status != LpStatus::Optimal) {
            out.status = ms.sol.status;
            out.nodes_explored = nodes;
            return out;
        }
        const double gap = std::max(1e-6, 1e-5 * std::abs(best_obj));
        if (have_best && ms.sol.objective >= best_obj - gap) continue;

        const int branch_t = cycling_period(ms.decisions, fixing);
        if (branch_t < 0) {
            accept_incumbent(pin_all(fixing, ms.decisions));
            continue;
        }
        // complementarity dichotomy: every integer point has one storage
        // side off, and either child still admits idling, so two children
        // cover the period exactly; the dominant side is explored first
        const Decision& bd = ms.decisions[static_cast<size_t>(branch_t)];
        const FlagFix dominant = bd.charge_power >= bd.discharge_power
                                     ? FlagFix::ChargeOnly
                                     : FlagFix::DischargeOnly;
        const FlagFix other = dominant == FlagFix::ChargeOnly ? FlagFix::DischargeOnly
                                                              : FlagFix::ChargeOnly;
        for (const FlagFix fix : {other, dominant}) {
            std::vector<FlagFix> child = fixing;
            child[static_cast<size_t>(branch_t)] = fix;
            stack.push_back(std::move(child));
        }
    }
    out.nodes_explored = nodes;
    if (have_best) {
        out.status = LpStatus::Optimal;
        out.objective = best_obj;
        out.bound_gap = std::max(1e-6, 1e-5 * std::abs(best_obj));
    } else {
        out.status = LpStatus::Infeasible;
    }
    return out;
}

}  // namespace mgrid
