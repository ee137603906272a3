#pragma once

#include <string>
#include <vector>

#include "mgrid/params.hpp"

namespace mgrid {

/// Generalized harmonic stepsize, alpha = a_h / (a_h + n - 1) for the nth
/// update of a slope. The first update copies the observation.
struct StepsizeRule {
    double a_h = 20.0;

    double alpha(int n) const { return a_h / (a_h + n - 1); }
};

/// Convex piecewise-linear value functions over the CCGT post-decision heat,
/// one row per period except the last. Slopes are $ per MW of heat and stay
/// monotone nondecreasing through the SPAR projection.
struct PiecewiseLinearVfa {
    double q_min = 0.0;
    double q_max = 0.0;
    int segment_count = 0;
    std::vector<std::vector<double>> slopes;  // [period][segment]

    static PiecewiseLinearVfa zeros(int periods, double q_min, double q_max,
                                    int segment_count);

    int periods() const { return static_cast<int>(slopes.size()); }
    double width() const { return (q_max - q_min) / segment_count; }

    /// Segment holding q; clamps q into the heat range first.
    int segment_of(double q) const;

    /// Left-to-right fill of the segments at q, weighted by the slopes.
    /// Throws std::out_of_range when q lies outside [q_min, q_max].
    double evaluate(int period, double q) const;

    bool rows_monotone(double tol = 0.0) const;

    std::string to_json() const;
    static PiecewiseLinearVfa from_json(const std::string& text);
    void save(const std::string& path) const;
    static PiecewiseLinearVfa load(const std::string& path);
};

/// Restores monotonicity around a single updated index by pooling the
/// violating neighborhood to its mean (pool-adjacent-violators confined to
/// the side the update disturbed).
void spar_project(std::vector<double>& slopes, int updated_index);

/// Harmonic smoothing of one segment's slope followed by the SPAR
/// projection. n is the 1-based training iteration.
void update_slope(PiecewiseLinearVfa& vfa, int period, int segment, double observation,
                  int n, const StepsizeRule& rule);

}  // namespace mgrid
