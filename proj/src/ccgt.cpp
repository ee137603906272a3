#include "mgrid/ccgt.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace mgrid {

namespace {

using Mat7 = std::array<std::array<double, 7>, 7>;
using Vec7 = std::array<double, 7>;

Mat7 companion_matrix(const ArmaParams& p) {
    Mat7 m{};
    for (int i = 0; i < 6; ++i) m[i][i + 1] = 1.0;
    // bottom row [0 0 a4 a3 a2 a1]
    m[6][3] = p.a[3];
    m[6][4] = p.a[2];
    m[6][5] = p.a[1];
    m[6][6] = p.a[0];
    return m;
}

Mat7 matmul(const Mat7& x, const Mat7& y) {
    Mat7 r{};
    for (int i = 0; i < 7; ++i)
        for (int k = 0; k < 7; ++k) {
            const double v = x[i][k];
            if (v == 0.0) continue;
            for (int j = 0; j < 7; ++j) r[i][j] += v * y[k][j];
        }
    return r;
}

Vec7 matvec(const Mat7& m, const Vec7& v) {
    Vec7 r{};
    for (int i = 0; i < 7; ++i) {
        double s = 0.0;
        for (int j = 0; j < 7; ++j) s += m[i][j] * v[j];
        r[i] = s;
    }
    return r;
}

Vec7 rowmat(const Vec7& row, const Mat7& m) {
    Vec7 r{};
    for (int j = 0; j < 7; ++j) {
        double s = 0.0;
        for (int i = 0; i < 7; ++i) s += row[i] * m[i][j];
        r[j] = s;
    }
    return r;
}

double dot(const Vec7& x, const Vec7& y) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += x[i] * y[i];
    return s;
}

double frobenius(const Mat7& m) {
    double s = 0.0;
    for (const auto& row : m)
        for (double v : row) s += v * v;
    return std::sqrt(s);
}

Vec7 output_row(const ArmaParams& p) {
    return {p.b[3], p.b[2], p.b[1], p.b[0], 0.0, 0.0, 0.0};
}

}  // namespace

double ArmaParams::steady_state_gain() const {
    const double denom = 1.0 - a_sum();
    if (denom == 0.0) throw std::domain_error("arma: 1 - sum(a) is zero, no steady-state gain");
    return b_sum() / denom;
}

void ArmaParams::validate(double period_hours) const {
    if (sample_interval_s <= 0.0)
        throw std::invalid_argument("arma.sample_interval_s must be positive");
    if (samples_per_period <= 0)
        throw std::invalid_argument("arma.samples_per_period must be positive");
    const double period_s = period_hours * 3600.0;
    if (std::abs(samples_per_period * sample_interval_s - period_s) > 1e-6)
        throw std::invalid_argument(
            "arma: samples_per_period * sample_interval_s does not equal the period length");
    const double rho = companion_spectral_radius(*this);
    if (!(rho < 1.0))
        throw std::invalid_argument("arma: companion matrix unstable, spectral radius " +
                                    std::to_string(rho));
}

AugmentedCcgtState AugmentedCcgtState::steady(double heat, const ArmaParams& params) {
    const double bs = params.b_sum();
    if (bs == 0.0) throw std::domain_error("arma: sum(b) is zero, steady state undefined");
    AugmentedCcgtState s;
    s.x.fill(heat / bs);
    return s;
}

double arma_reference(const std::array<double, 4>& heat_history,
                      const std::array<double, 7>& gas_history,
                      const ArmaParams& params) {
    double q = 0.0;
    for (int m = 1; m <= 4; ++m) {
        q += params.a[m - 1] * heat_history[m - 1];
        q += params.b[m - 1] * gas_history[m + 3 - 1];  // lag m+3
    }
    return q;
}

std::vector<double> arma_simulate(const std::vector<double>& gas, const ArmaParams& params) {
    // out[k] is the heat after consuming gas[0..k], matching the convention
    // of the augmented-state simulation (read-out after each step).
    std::array<double, 4> qh{};   // qh[m-1] = Q(k-m)
    std::array<double, 7> gh{};   // gh[j-1] = g(k-j)
    std::vector<double> out;
    out.reserve(gas.size());
    for (double g : gas) {
        for (int j = 6; j >= 1; --j) gh[j] = gh[j - 1];
        gh[0] = g;
        const double q = arma_reference(qh, gh, params);
        out.push_back(q);
        for (int m = 3; m >= 1; --m) qh[m] = qh[m - 1];
        qh[0] = q;
    }
    return out;
}

AugmentedCcgtState step(const AugmentedCcgtState& state, double gas, const ArmaParams& params) {
    AugmentedCcgtState next;
    for (int i = 0; i < 6; ++i) next.x[i] = state.x[i + 1];
    next.x[6] = params.a[3] * state.x[3] + params.a[2] * state.x[4] +
                params.a[1] * state.x[5] + params.a[0] * state.x[6] + gas;
    return next;
}

double heat_output(const AugmentedCcgtState& state, const ArmaParams& params) {
    return params.b[3] * state.x[0] + params.b[2] * state.x[1] +
           params.b[1] * state.x[2] + params.b[0] * state.x[3];
}

AugmentedCcgtState PeriodLift::apply(const AugmentedCcgtState& s, double gas) const {
    AugmentedCcgtState r;
    for (int i = 0; i < 7; ++i) {
        double v = B_delta[i] * gas;
        for (int j = 0; j < 7; ++j) v += A_delta[i][j] * s.x[j];
        r.x[i] = v;
    }
    return r;
}

double PeriodLift::end_heat(const AugmentedCcgtState& s, double gas) const {
    return dot(end_state_row, s.x) + end_gas_coeff * gas;
}

double PeriodLift::avg_heat(const AugmentedCcgtState& s, double gas) const {
    return dot(avg_state_row, s.x) + avg_gas_coeff * gas;
}

PeriodLift build_period_lift(const ArmaParams& params) {
    const Mat7 A = companion_matrix(params);
    const Vec7 B = {0, 0, 0, 0, 0, 0, 1};
    const Vec7 C = output_row(params);

    PeriodLift lift;
    lift.steps = params.samples_per_period;
    lift.out_row = C;

    // A_delta = A^n, B_delta = sum_{i<n} A^i B, accumulated step by step.
    Mat7 Apow{};
    for (int i = 0; i < 7; ++i) Apow[i][i] = 1.0;  // A^0
    Vec7 Bacc{};                                   // injections so far
    Vec7 avg_row{};
    double avg_gas = 0.0;
    for (int k = 0; k < lift.steps; ++k) {
        // advance one step: x_{k+1} = A x_k + B g
        Bacc = matvec(A, Bacc);
        for (int i = 0; i < 7; ++i) Bacc[i] += B[i];
        Apow = matmul(A, Apow);
        // accumulate the heat read-out after step k+1
        const Vec7 crow = rowmat(C, Apow);
        for (int i = 0; i < 7; ++i) avg_row[i] += crow[i];
        avg_gas += dot(C, Bacc);
    }
    lift.A_delta = Apow;
    lift.B_delta = Bacc;
    lift.end_state_row = rowmat(C, Apow);
    lift.end_gas_coeff = dot(C, Bacc);
    const double inv = 1.0 / static_cast<double>(lift.steps);
    for (int i = 0; i < 7; ++i) lift.avg_state_row[i] = avg_row[i] * inv;
    lift.avg_gas_coeff = avg_gas * inv;
    return lift;
}

std::vector<double> intra_period_trace(const AugmentedCcgtState& state, double gas,
                                       const ArmaParams& params) {
    std::vector<double> trace;
    trace.reserve(params.samples_per_period);
    AugmentedCcgtState s = state;
    for (int k = 0; k < params.samples_per_period; ++k) {
        s = step(s, gas, params);
        trace.push_back(heat_output(s, params));
    }
    return trace;
}

AugmentedCcgtState shift_output(const AugmentedCcgtState& state, double delta_heat,
                                const ArmaParams& params) {
    const double bs = params.b_sum();
    if (bs == 0.0) throw std::domain_error("arma: sum(b) is zero, output shift undefined");
    AugmentedCcgtState r = state;
    const double d = delta_heat / bs;
    for (double& v : r.x) v += d;
    return r;
}

double companion_spectral_radius(const ArmaParams& params) {
    // rho(A) ~= (||A^p||_F)^(1/p) for large p; repeated squaring with
    // normalization keeps the entries in range for unstable inputs too.
    Mat7 m = companion_matrix(params);
    double log_scale = 0.0;
    long p = 1;
    for (int it = 0; it < 12; ++it) {
        const double n = frobenius(m);
        if (n == 0.0) return 0.0;
        for (auto& row : m)
            for (double& v : row) v /= n;
        log_scale = 2.0 * (log_scale + std::log(n));
        m = matmul(m, m);
        p *= 2;
    }
    const double n = frobenius(m);
    if (n == 0.0) return 0.0;
    return std::exp((log_scale + std::log(n)) / static_cast<double>(p));
}

}  // namespace mgrid
