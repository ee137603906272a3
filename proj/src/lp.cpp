#include "mgrid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

namespace mgrid {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
        case LpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

int LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
    if (lower > upper)
        throw std::invalid_argument("lp: variable '" + name + "' has lower bound above upper");
    var_names.push_back(std::move(name));
    lb.push_back(lower);
    ub.push_back(upper);
    obj.push_back(cost);
    return num_vars() - 1;
}

int LinearProgram::add_row(std::string name, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("lp: row '" + name + "' has lo above hi");
    rows.push_back(Row{std::move(name), lo, hi, {}});
    return num_rows() - 1;
}

void LinearProgram::set_coeff(int row, int var, double value) {
    if (row < 0 || row >= num_rows() || var < 0 || var >= num_vars())
        throw std::out_of_range("lp: coefficient index out of range");
    if (value != 0.0) rows[static_cast<size_t>(row)].coeffs.emplace_back(var, value);
}

namespace {

void write_bound(std::ostream& os, double v) {
    if (v == kInf) os << "inf";
    else if (v == -kInf) os << "-inf";
    else os << v;
}

}  // namespace

void LinearProgram::write_text(std::ostream& os) const {
    os.precision(17);
    os << "lp 1\n";
    os << "minimize offset " << objective_offset << "\n";
    for (int j = 0; j < num_vars(); ++j) {
        os << "var " << j << " " << var_names[j] << " ";
        write_bound(os, lb[j]);
        os << " ";
        write_bound(os, ub[j]);
        os << " " << obj[j] << "\n";
    }
    for (int i = 0; i < num_rows(); ++i) {
        const Row& r = rows[static_cast<size_t>(i)];
        os << "row " << i << " " << r.name << " ";
        write_bound(os, r.lo);
        os << " ";
        write_bound(os, r.hi);
        os << " " << r.coeffs.size();
        for (const auto& [v, c] : r.coeffs) os << " " << v << " " << c;
        os << "\n";
    }
}

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateTheta = 1e-11;
constexpr double kRatioTieTol = 1e-10;
constexpr int kBlandTrigger = 200;

enum NonbasicStatus : int8_t { kAtLower = -1, kFreeAtZero = 0, kAtUpper = 1, kBasic = 2 };

/// Two-phase bounded-variable simplex on a dense tableau over
/// [structural | slack | artificial] columns. Row i is a.x + s_i = 0 with
/// s_i in [-hi_i, -lo_i]; artificials are added only for rows whose slack
/// start value is out of range.
class Simplex {
public:
    explicit Simplex(const LinearProgram& lp) : lp_(lp) {}
    LpSolution run();

private:
    const LinearProgram& lp_;

    int m_ = 0;
    int n_ = 0;
    int ncols_ = 0;
    int stride_ = 0;
    int first_artificial_ = 0;
    std::vector<double> tab_;
    std::vector<double> zrow_;
    std::vector<double> xb_;
    std::vector<double> collo_, colhi_;
    std::vector<int8_t> status_;
    std::vector<int> basis_;
    std::vector<double> cost_;
    std::vector<int> art_row_;      // artificial -> tableau row it patches
    std::vector<double> art_sign_;  // its +-1 coefficient there
    int iterations_ = 0;
    int degenerate_run_ = 0;
    bool bland_ = false;

    double* row(int i) { return tab_.data() + static_cast<size_t>(i) * stride_; }
    const double* row(int i) const { return tab_.data() + static_cast<size_t>(i) * stride_; }

    double nonbasic_value(int j) const {
        switch (status_[static_cast<size_t>(j)]) {
            case kAtLower: return collo_[static_cast<size_t>(j)];
            case kAtUpper: return colhi_[static_cast<size_t>(j)];
            default: return 0.0;
        }
    }

    void build();
    void rebuild_zrow();
    int price() const;
    LpStatus iterate(bool phase1, int max_iters);
    void pivot(int r, int jenter, double theta, int dir);
    void drive_out_artificials();
    void polish_basics();
    LpSolution extract();
    std::string most_violated_row() const;
};

void Simplex::build() {
    m_ = lp_.num_rows();
    n_ = lp_.num_vars();
    stride_ = n_ + 2 * m_;  // worst case: one artificial per row
    ncols_ = n_ + m_;
    tab_.assign(static_cast<size_t>(m_) * stride_, 0.0);
    collo_.assign(static_cast<size_t>(stride_), 0.0);
    colhi_.assign(static_cast<size_t>(stride_), 0.0);
    status_.assign(static_cast<size_t>(stride_), kAtLower);
    cost_.assign(static_cast<size_t>(stride_), 0.0);
    basis_.assign(static_cast<size_t>(m_), -1);
    xb_.assign(static_cast<size_t>(m_), 0.0);

    for (int j = 0; j < n_; ++j) {
        collo_[static_cast<size_t>(j)] = lp_.lb[static_cast<size_t>(j)];
        colhi_[static_cast<size_t>(j)] = lp_.ub[static_cast<size_t>(j)];
        if (lp_.lb[static_cast<size_t>(j)] > -kInf) status_[static_cast<size_t>(j)] = kAtLower;
        else if (lp_.ub[static_cast<size_t>(j)] < kInf) status_[static_cast<size_t>(j)] = kAtUpper;
        else status_[static_cast<size_t>(j)] = kFreeAtZero;
    }
    for (int i = 0; i < m_; ++i) {
        const auto& r = lp_.rows[static_cast<size_t>(i)];
        double* tr = row(i);
        for (const auto& [v, c] : r.coeffs) tr[v] += c;
        const int js = n_ + i;
        tr[js] = 1.0;
        collo_[static_cast<size_t>(js)] = (r.hi == kInf) ? -kInf : -r.hi;
        colhi_[static_cast<size_t>(js)] = (r.lo == -kInf) ? kInf : -r.lo;
    }

    first_artificial_ = ncols_;
    for (int i = 0; i < m_; ++i) {
        double s = 0.0;
        const double* tr = row(i);
        for (int j = 0; j < n_; ++j)
            if (tr[j] != 0.0) s -= tr[j] * nonbasic_value(j);
        const int js = n_ + i;
        const double slo = collo_[static_cast<size_t>(js)];
        const double shi = colhi_[static_cast<size_t>(js)];
        if (s >= slo && s <= shi) {
            basis_[static_cast<size_t>(i)] = js;
            status_[static_cast<size_t>(js)] = kBasic;
            xb_[static_cast<size_t>(i)] = s;
        } else {
            const double sv = std::clamp(s, slo, shi);
            status_[static_cast<size_t>(js)] = (sv == shi) ? kAtUpper : kAtLower;
            const int ja = ncols_++;
            const double resid = s - sv;
            const double sign = (resid >= 0.0) ? 1.0 : -1.0;
            // the tableau stores B^-1 A: scale the row so the basic
            // artificial column reads +1
            if (sign < 0.0) {
                double* tr2 = row(i);
                for (int j = 0; j < ja; ++j) tr2[j] = -tr2[j];
            }
            row(i)[ja] = 1.0;
            collo_[static_cast<size_t>(ja)] = 0.0;
            colhi_[static_cast<size_t>(ja)] = kInf;
            basis_[static_cast<size_t>(i)] = ja;
            status_[static_cast<size_t>(ja)] = kBasic;
            xb_[static_cast<size_t>(i)] = std::abs(resid);
            art_row_.push_back(i);
            art_sign_.push_back(sign);
        }
    }
}

void Simplex::rebuild_zrow() {
    zrow_.assign(static_cast<size_t>(stride_), 0.0);
    for (int j = 0; j < ncols_; ++j) zrow_[static_cast<size_t>(j)] = cost_[static_cast<size_t>(j)];
    for (int i = 0; i < m_; ++i) {
        const double cb = cost_[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
        if (cb == 0.0) continue;
        const double* tr = row(i);
        for (int j = 0; j < ncols_; ++j) zrow_[static_cast<size_t>(j)] -= cb * tr[j];
    }
    for (int i = 0; i < m_; ++i) zrow_[static_cast<size_t>(basis_[static_cast<size_t>(i)])] = 0.0;
}

int Simplex::price() const {
    int best = -1;
    double best_score = kCostTol;
    for (int j = 0; j < ncols_; ++j) {
        const auto st = status_[static_cast<size_t>(j)];
        if (st == kBasic) continue;
        if (collo_[static_cast<size_t>(j)] == colhi_[static_cast<size_t>(j)]) continue;
        const double z = zrow_[static_cast<size_t>(j)];
        double score = 0.0;
        if ((st == kAtLower || st == kFreeAtZero) && z < -kCostTol) score = -z;
        if ((st == kAtUpper || st == kFreeAtZero) && z > kCostTol) score = std::max(score, z);
        if (score <= 0.0) continue;
        if (bland_) return j;
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    return best;
}

void Simplex::pivot(int r, int jenter, double theta, int dir) {
    const int jleave = basis_[static_cast<size_t>(r)];
    const double enter_val = nonbasic_value(jenter) + dir * theta;
    const double pivot_val = row(r)[jenter];
    for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        const double a = row(i)[jenter];
        if (a != 0.0) xb_[static_cast<size_t>(i)] -= dir * theta * a;
    }

    const double leave_rate = -dir * pivot_val;
    if (collo_[static_cast<size_t>(jleave)] == -kInf && colhi_[static_cast<size_t>(jleave)] == kInf)
        status_[static_cast<size_t>(jleave)] = kFreeAtZero;
    else
        status_[static_cast<size_t>(jleave)] = (leave_rate < 0.0) ? kAtLower : kAtUpper;

    double* pr = row(r);
    const double inv = 1.0 / pivot_val;
    for (int j = 0; j < ncols_; ++j) pr[j] *= inv;
    pr[jenter] = 1.0;
    for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* ri = row(i);
        const double f = ri[jenter];
        if (f == 0.0) continue;
        for (int j = 0; j < ncols_; ++j) ri[j] -= f * pr[j];
        ri[jenter] = 0.0;
    }
    const double zf = zrow_[static_cast<size_t>(jenter)];
    if (zf != 0.0) {
        for (int j = 0; j < ncols_; ++j) zrow_[static_cast<size_t>(j)] -= zf * pr[j];
        zrow_[static_cast<size_t>(jenter)] = 0.0;
    }

    basis_[static_cast<size_t>(r)] = jenter;
    status_[static_cast<size_t>(jenter)] = kBasic;
    xb_[static_cast<size_t>(r)] = enter_val;
}

LpStatus Simplex::iterate(bool phase1, int max_iters) {
    while (true) {
        if (iterations_ >= max_iters) return LpStatus::IterationLimit;
        const int jenter = price();
        if (jenter < 0) return LpStatus::Optimal;
        ++iterations_;

        const auto st = status_[static_cast<size_t>(jenter)];
        const double z = zrow_[static_cast<size_t>(jenter)];
        int dir;
        if (st == kAtLower) dir = +1;
        else if (st == kAtUpper) dir = -1;
        else dir = (z < 0.0) ? +1 : -1;

        double theta = kInf;
        if (collo_[static_cast<size_t>(jenter)] > -kInf && colhi_[static_cast<size_t>(jenter)] < kInf)
            theta = colhi_[static_cast<size_t>(jenter)] - collo_[static_cast<size_t>(jenter)];
        int leave_row = -1;
        double leave_pivot = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double a = row(i)[jenter];
            if (std::abs(a) < kPivotTol) continue;
            const double rate = -dir * a;
            const int jb = basis_[static_cast<size_t>(i)];
            double limit = kInf;
            if (rate < 0.0) {
                const double lo = collo_[static_cast<size_t>(jb)];
                if (lo > -kInf) limit = (xb_[static_cast<size_t>(i)] - lo) / (-rate);
            } else {
                const double hi = colhi_[static_cast<size_t>(jb)];
                if (hi < kInf) limit = (hi - xb_[static_cast<size_t>(i)]) / rate;
            }
            if (limit == kInf) continue;
            if (limit < 0.0) limit = 0.0;
            if (limit < theta - kRatioTieTol) {
                theta = limit;
                leave_row = i;
                leave_pivot = a;
            } else if (limit <= theta + kRatioTieTol && leave_row >= 0) {
                const bool better =
                    bland_ ? basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(leave_row)]
                           : std::abs(a) > std::abs(leave_pivot);
                if (better) {
                    theta = std::min(theta, limit);
                    leave_row = i;
                    leave_pivot = a;
                }
            }
        }

        if (theta == kInf) {
            if (std::getenv("MG_LP_DEBUG"))
                std::fprintf(stderr, "lp: theta=inf phase1=%d iter=%d jenter=%d\n", (int)phase1,
                             iterations_, jenter);
            return phase1 ? LpStatus::NumericalFailure : LpStatus::Unbounded;
        }

        if (theta < kDegenerateTheta) {
            if (++degenerate_run_ > kBlandTrigger) bland_ = true;
        } else {
            degenerate_run_ = 0;
            bland_ = false;
        }

        if (leave_row < 0) {
            for (int i = 0; i < m_; ++i) {
                const double a = row(i)[jenter];
                if (a != 0.0) xb_[static_cast<size_t>(i)] -= dir * theta * a;
            }
            status_[static_cast<size_t>(jenter)] = (dir > 0) ? kAtUpper : kAtLower;
            continue;
        }
        pivot(leave_row, jenter, theta, dir);
    }
}

void Simplex::drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
        const int jb = basis_[static_cast<size_t>(i)];
        if (jb < first_artificial_) continue;
        const double* tr = row(i);
        int jbest = -1;
        double abest = 1e-8;
        for (int j = 0; j < first_artificial_; ++j) {
            if (status_[static_cast<size_t>(j)] == kBasic) continue;
            if (std::abs(tr[j]) > abest) {
                abest = std::abs(tr[j]);
                jbest = j;
            }
        }
        if (jbest >= 0) pivot(i, jbest, 0.0, +1);
        // otherwise the row is redundant; the artificial stays basic at zero
        // behind [0,0] bounds and a (numerically) zero row.
    }
}

void Simplex::polish_basics() {
    // Re-solve B xb = -N v_N with a dense LU over the original column data,
    // stripping drift accumulated by the tableau updates.
    std::vector<double> B(static_cast<size_t>(m_) * m_, 0.0);
    std::vector<double> rhs(static_cast<size_t>(m_), 0.0);
    std::vector<int> pos(static_cast<size_t>(ncols_), -1);
    for (int k = 0; k < m_; ++k) pos[static_cast<size_t>(basis_[static_cast<size_t>(k)])] = k;
    auto bcell = [&](int i, int k) -> double& { return B[static_cast<size_t>(i) * m_ + k]; };

    for (int i = 0; i < m_; ++i) {
        const auto& r = lp_.rows[static_cast<size_t>(i)];
        for (const auto& [v, c] : r.coeffs) {
            const int k = pos[static_cast<size_t>(v)];
            if (k >= 0) bcell(i, k) += c;
            else rhs[static_cast<size_t>(i)] -= c * nonbasic_value(v);
        }
        const int js = n_ + i;
        const int ks = pos[static_cast<size_t>(js)];
        if (ks >= 0) bcell(i, ks) += 1.0;
        else rhs[static_cast<size_t>(i)] -= nonbasic_value(js);
    }
    for (size_t ai = 0; ai < art_row_.size(); ++ai) {
        const int ja = first_artificial_ + static_cast<int>(ai);
        const int k = pos[static_cast<size_t>(ja)];
        if (k >= 0) bcell(art_row_[ai], k) += art_sign_[ai];
        // nonbasic artificials are locked at zero: no rhs term
    }

    std::vector<int> piv(static_cast<size_t>(m_));
    for (int c = 0; c < m_; ++c) {
        int p = c;
        double pv = std::abs(bcell(c, c));
        for (int i = c + 1; i < m_; ++i)
            if (std::abs(bcell(i, c)) > pv) {
                pv = std::abs(bcell(i, c));
                p = i;
            }
        if (pv < 1e-12) return;  // basis numerically singular: keep tableau values
        if (p != c) {
            for (int j = 0; j < m_; ++j) std::swap(bcell(p, j), bcell(c, j));
            std::swap(rhs[static_cast<size_t>(p)], rhs[static_cast<size_t>(c)]);
        }
        const double invp = 1.0 / bcell(c, c);
        for (int i = c + 1; i < m_; ++i) {
            const double f = bcell(i, c) * invp;
            if (f == 0.0) continue;
            bcell(i, c) = 0.0;
            for (int j = c + 1; j < m_; ++j) bcell(i, j) -= f * bcell(c, j);
            rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(c)];
        }
        piv[static_cast<size_t>(c)] = p;
    }
    for (int i = m_ - 1; i >= 0; --i) {
        double v = rhs[static_cast<size_t>(i)];
        for (int j = i + 1; j < m_; ++j) v -= bcell(i, j) * rhs[static_cast<size_t>(j)];
        rhs[static_cast<size_t>(i)] = v / bcell(i, i);
    }
    for (int k = 0; k < m_; ++k) xb_[static_cast<size_t>(k)] = rhs[static_cast<size_t>(k)];
}

std::string Simplex::most_violated_row() const {
    int worst = -1;
    double worst_amount = 0.0;
    for (int i = 0; i < m_; ++i) {
        const int jb = basis_[static_cast<size_t>(i)];
        if (jb >= first_artificial_ && xb_[static_cast<size_t>(i)] > worst_amount) {
            worst_amount = xb_[static_cast<size_t>(i)];
            worst = i;
        }
    }
    if (worst < 0) return {};
    return lp_.rows[static_cast<size_t>(worst)].name;
}

LpSolution Simplex::extract() {
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.iterations = iterations_;

    sol.primal.assign(static_cast<size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j)
        if (status_[static_cast<size_t>(j)] != kBasic)
            sol.primal[static_cast<size_t>(j)] = nonbasic_value(j);
    for (int i = 0; i < m_; ++i) {
        const int jb = basis_[static_cast<size_t>(i)];
        if (jb < n_) sol.primal[static_cast<size_t>(jb)] = xb_[static_cast<size_t>(i)];
    }

    constexpr double ftol = 1e-7;
    for (int j = 0; j < n_; ++j) {
        const double v = sol.primal[static_cast<size_t>(j)];
        if (v < lp_.lb[static_cast<size_t>(j)] - ftol || v > lp_.ub[static_cast<size_t>(j)] + ftol) {
            if (std::getenv("MG_LP_DEBUG"))
                std::fprintf(stderr, "lp: bound violation var %d (%s) v=%.12g lb=%.12g ub=%.12g\n",
                             j, lp_.var_names[static_cast<size_t>(j)].c_str(), v,
                             lp_.lb[static_cast<size_t>(j)], lp_.ub[static_cast<size_t>(j)]);
            sol.status = LpStatus::NumericalFailure;
            return sol;
        }
    }
    for (const auto& r : lp_.rows) {
        double act = 0.0;
        double scale = 1.0;
        for (const auto& [v, c] : r.coeffs) {
            act += c * sol.primal[static_cast<size_t>(v)];
            scale = std::max(scale, std::abs(c * sol.primal[static_cast<size_t>(v)]));
        }
        if (act < r.lo - ftol * scale || act > r.hi + ftol * scale) {
            if (std::getenv("MG_LP_DEBUG"))
                std::fprintf(stderr, "lp: row violation %s act=%.12g lo=%.12g hi=%.12g\n",
                             r.name.c_str(), act, r.lo, r.hi);
            sol.status = LpStatus::NumericalFailure;
            return sol;
        }
    }

    double objective = lp_.objective_offset;
    for (int j = 0; j < n_; ++j)
        objective += lp_.obj[static_cast<size_t>(j)] * sol.primal[static_cast<size_t>(j)];
    sol.objective = objective;
    return sol;
}

LpSolution Simplex::run() {
    build();
    const int max_iters = 20 * (m_ + ncols_) + 2000;

    if (first_artificial_ < ncols_) {
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (int j = first_artificial_; j < ncols_; ++j) cost_[static_cast<size_t>(j)] = 1.0;
        double artificial_mass = kInf;
        // the maintained cost row drifts over long runs; a claimed optimum
        // with leftover infeasibility gets a fresh pricing pass before the
        // verdict stands
        for (int round = 0; round < 4; ++round) {
            rebuild_zrow();
            const LpStatus st = iterate(true, max_iters);
            if (st != LpStatus::Optimal) {
                LpSolution sol;
                sol.status = (st == LpStatus::Unbounded) ? LpStatus::NumericalFailure : st;
                sol.iterations = iterations_;
                return sol;
            }
            const double prev_mass = artificial_mass;
            artificial_mass = 0.0;
            for (int i = 0; i < m_; ++i)
                if (basis_[static_cast<size_t>(i)] >= first_artificial_)
                    artificial_mass += std::abs(xb_[static_cast<size_t>(i)]);
            if (artificial_mass <= 1e-7 || artificial_mass >= prev_mass - 1e-12) break;
        }
        if (artificial_mass > 1e-7) {
            LpSolution sol;
            sol.status = LpStatus::Infeasible;
            sol.iterations = iterations_;
            sol.infeasible_row = most_violated_row();
            return sol;
        }
        for (int j = first_artificial_; j < ncols_; ++j) {
            collo_[static_cast<size_t>(j)] = 0.0;
            colhi_[static_cast<size_t>(j)] = 0.0;
            if (status_[static_cast<size_t>(j)] != kBasic) status_[static_cast<size_t>(j)] = kAtLower;
        }
        drive_out_artificials();
    }

    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < n_; ++j) cost_[static_cast<size_t>(j)] = lp_.obj[static_cast<size_t>(j)];
    degenerate_run_ = 0;
    bland_ = false;
    for (int round = 0; round < 3; ++round) {
        rebuild_zrow();
        const int before = iterations_;
        const LpStatus st = iterate(false, max_iters);
        if (st != LpStatus::Optimal) {
            LpSolution sol;
            sol.status = st;
            sol.iterations = iterations_;
            return sol;
        }
        if (round > 0 && iterations_ == before) break;  // fresh pricing agrees
    }
    polish_basics();
    return extract();
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    if (lp.num_rows() == 0) {
        LpSolution sol;
        sol.primal.assign(static_cast<size_t>(lp.num_vars()), 0.0);
        double objective = lp.objective_offset;
        for (int j = 0; j < lp.num_vars(); ++j) {
            const double c = lp.obj[static_cast<size_t>(j)];
            double v;
            if (c > 0.0) v = lp.lb[static_cast<size_t>(j)];
            else if (c < 0.0) v = lp.ub[static_cast<size_t>(j)];
            else if (std::isfinite(lp.lb[static_cast<size_t>(j)])) v = lp.lb[static_cast<size_t>(j)];
            else if (std::isfinite(lp.ub[static_cast<size_t>(j)])) v = lp.ub[static_cast<size_t>(j)];
            else v = 0.0;
            if (!std::isfinite(v)) {
                sol.status = LpStatus::Unbounded;
                return sol;
            }
            sol.primal[static_cast<size_t>(j)] = v;
            objective += c * v;
        }
        sol.status = LpStatus::Optimal;
        sol.objective = objective;
        return sol;
    }
    Simplex solver(lp);
    return solver.run();
}

}  // namespace mgrid
