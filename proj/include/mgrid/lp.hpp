#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mgrid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(LpStatus status);

/// Dense-ish linear program over bounded variables. Rows are ranges
/// lo <= a.x <= hi; a plain sense (<=, =, >=) is a range with one side open.
/// Variables and rows carry names for diagnostics and the text dump.
struct LinearProgram {
    struct Row {
        std::string name;
        double lo = -kInf;
        double hi = kInf;
        std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
    };

    std::vector<std::string> var_names;
    std::vector<double> obj;
    std::vector<double> lb;
    std::vector<double> ub;
    std::vector<Row> rows;
    double objective_offset = 0.0;

    int add_variable(std::string name, double lower, double upper, double cost = 0.0);
    int add_row(std::string name, double lo, double hi);
    int add_le(std::string name, double rhs) { return add_row(std::move(name), -kInf, rhs); }
    int add_ge(std::string name, double rhs) { return add_row(std::move(name), rhs, kInf); }
    int add_eq(std::string name, double rhs) { return add_row(std::move(name), rhs, rhs); }
    void set_coeff(int row, int var, double value);
    void add_obj(int var, double cost) { obj[var] += cost; }

    int num_vars() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    /// Line-oriented text dump for cross-checking against external solvers;
    /// format documented in the README.
    void write_text(std::ostream& os) const;
};

struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    double objective = 0.0;
    std::vector<double> primal;
    int iterations = 0;
    std::string infeasible_row;  // most violated row when infeasible

    double value(int var) const { return primal[static_cast<size_t>(var)]; }
};

/// Solves the LP with a two-phase bounded-variable simplex on a dense
/// tableau. Pivoting is deterministic: Dantzig pricing with lowest-index tie
/// breaks, falling back to Bland's rule after a run of degenerate pivots.
/// Basic values are re-solved through a dense LU of the final basis before
/// the feasibility check, so reported solutions satisfy all rows and bounds
/// within 1e-7 or the status says otherwise. Never throws on numerical
/// trouble; the status reports it.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace mgrid
