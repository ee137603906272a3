#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mgrid {

/// Identified heat-side model of the CCGT plant: a fourth-order difference
/// equation on a 50-second sampling grid, 18 samples per dispatch period.
/// Gas input lags the heat response by 4..7 samples.
struct ArmaParams {
    std::array<double, 4> a{};  // AR coefficients a1..a4
    std::array<double, 4> b{};  // MA coefficients b1..b4, MW heat per unit gas
    double sample_interval_s = 50.0;
    int samples_per_period = 18;

    double a_sum() const { return a[0] + a[1] + a[2] + a[3]; }
    double b_sum() const { return b[0] + b[1] + b[2] + b[3]; }

    /// Heat output reached under a constant unit gas input, b_sum/(1-a_sum).
    double steady_state_gain() const;

    /// Checks the sampling grid tiles the period and the companion matrix is
    /// stable. Throws std::invalid_argument with the offending field.
    void validate(double period_hours) const;
};

/// Companion-form state of the heat dynamics. x[0..6] hold delayed values of
/// the auxiliary input sequence; heat output is a linear read-out of x[0..3].
struct AugmentedCcgtState {
    std::array<double, 7> x{};

    static AugmentedCcgtState zero() { return {}; }

    /// Fixed point of the dynamics whose read-out equals `heat` when the
    /// matching constant gas input is held.
    static AugmentedCcgtState steady(double heat, const ArmaParams& params);
};

/// One-period condensation of the single-step dynamics under gas held
/// constant over the period:
///   x_end = A_delta x_start + B_delta g, heat(x) = out_row . x
/// A_delta is the 18th power of the single-step matrix; B_delta accumulates
/// the 18 injections. avg_* rows give the period-average heat, used when the
/// heat balance is configured on the period mean instead of the end sample.
struct PeriodLift {
    std::array<std::array<double, 7>, 7> A_delta{};
    std::array<double, 7> B_delta{};
    std::array<double, 7> out_row{};
    std::array<double, 7> end_state_row{};  // out_row * A_delta
    double end_gas_coeff = 0.0;             // out_row . B_delta
    std::array<double, 7> avg_state_row{};
    double avg_gas_coeff = 0.0;
    int steps = 18;

    AugmentedCcgtState apply(const AugmentedCcgtState& s, double gas) const;
    double end_heat(const AugmentedCcgtState& s, double gas) const;
    double avg_heat(const AugmentedCcgtState& s, double gas) const;
};

/// Direct recursion of the identified difference equation; the reference
/// oracle the augmented-state simulation is checked against.
/// heat_history[m-1] = Q(k-m) for m = 1..4; gas_history[j-1] = g(k-j) for
/// j = 1..7 (only lags 4..7 enter the recursion).
double arma_reference(const std::array<double, 4>& heat_history,
                      const std::array<double, 7>& gas_history,
                      const ArmaParams& params);

/// Runs the direct recursion from all-zero histories over a gas sequence,
/// returning the heat output at every sample.
std::vector<double> arma_simulate(const std::vector<double>& gas,
                                  const ArmaParams& params);

/// Single 50-second step of the companion form.
AugmentedCcgtState step(const AugmentedCcgtState& state, double gas,
                        const ArmaParams& params);

/// Heat output read-out, b4 x1 + b3 x2 + b2 x3 + b1 x4.
double heat_output(const AugmentedCcgtState& state, const ArmaParams& params);

/// Composes the 18 single steps into the per-period affine map.
PeriodLift build_period_lift(const ArmaParams& params);

/// Heat output after each of the 18 sub-samples with gas held constant.
std::vector<double> intra_period_trace(const AugmentedCcgtState& state,
                                       double gas, const ArmaParams& params);

/// Uniform component shift that moves the heat read-out by exactly
/// delta_heat. Throws std::domain_error when b_sum is zero.
AugmentedCcgtState shift_output(const AugmentedCcgtState& state,
                                double delta_heat, const ArmaParams& params);

/// Estimate of the spectral radius of the 7x7 companion matrix, via
/// normalized repeated squaring.
double companion_spectral_radius(const ArmaParams& params);

}  // namespace mgrid
