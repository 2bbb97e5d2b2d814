#pragma once

// Dense bounded-variable primal simplex.
//
// Problems are given in general form
//
//     minimize    cost' x
//     subject to  row_lower <= rows * x <= row_upper
//                 lower     <=   x      <= upper
//
// with +-infinity allowed in any bound; an equality row has
// row_lower == row_upper. Internally each row gets an activity variable
// s = rows * x carrying the row bounds, so the working system is
// [rows  -I] (x, s) = 0 plus one artificial per row for phase 1.
//
// The optimal row duals are the sensitivities of the optimal value to the
// active row bound, which is what the dispatch model uses as prices.

#include "gridprice/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace gridprice {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

struct LpProblem {
    Eigen::VectorXd cost;
    Eigen::MatrixXd rows;
    Eigen::VectorXd row_lower;
    Eigen::VectorXd row_upper;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    /// All-zero problem with equality rows `= 0` and variables in [0, inf).
    static LpProblem zeros(Eigen::Index num_rows, Eigen::Index num_vars) {
        LpProblem p;
        p.cost = Eigen::VectorXd::Zero(num_vars);
        p.rows = Eigen::MatrixXd::Zero(num_rows, num_vars);
        p.row_lower = Eigen::VectorXd::Zero(num_rows);
        p.row_upper = Eigen::VectorXd::Zero(num_rows);
        p.lower = Eigen::VectorXd::Zero(num_vars);
        p.upper = Eigen::VectorXd::Constant(num_vars, kInf);
        return p;
    }

    Eigen::Index num_rows() const noexcept { return rows.rows(); }
    Eigen::Index num_vars() const noexcept { return rows.cols(); }

    void check() const {
        const auto m = rows.rows(), n = rows.cols();
        if (cost.size() != n || lower.size() != n || upper.size() != n || row_lower.size() != m || row_upper.size() != m)
            throw UsageError("LpProblem: inconsistent dimensions");
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || !std::isfinite(cost[j]))
                throw UsageError("LpProblem: bad variable bounds or cost");
        for (Eigen::Index i = 0; i < m; ++i)
            if (std::isnan(row_lower[i]) || std::isnan(row_upper[i]) || row_lower[i] > row_upper[i])
                throw UsageError("LpProblem: bad row bounds");
        if (!rows.allFinite()) throw UsageError("LpProblem: non-finite constraint matrix");
    }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd primal;         // x
    Eigen::VectorXd duals;          // one multiplier per row
    Eigen::VectorXd reduced_costs;  // cost - rows' * duals
    double objective = std::numeric_limits<double>::quiet_NaN();

    /// Phase-1 optimum when Infeasible (> 0), together with its row multipliers.
    double infeasibility = 0.0;
    Eigen::VectorXd farkas;
    /// Improving direction of x when Unbounded.
    Eigen::VectorXd ray;

    int iterations = 0;
    bool used_bland = false;
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    int degenerate_limit = 50;
    /// Forces Bland's rule from the first pivot.
    bool bland_only = false;
    int max_iterations = 0;  // 0 = automatic
};

/// Row multiplier vector of an optimal solution.
inline const Eigen::VectorXd& dual_vector(const LpSolution& s) {
    if (s.status != LpStatus::Optimal) throw UsageError("dual_vector: solution is not optimal");
    return s.duals;
}

/// Objective of the bounded dual evaluated at (duals, cost - rows' duals).
///
/// A positive multiplier prices the lower side of its row or bound and a
/// negative one the upper side. Multipliers of magnitude below `tol` whose
/// priced side is infinite are treated as zero.
inline double dual_objective(const LpProblem& p, const Eigen::VectorXd& duals, double tol = 1e-9) {
    const Eigen::VectorXd reduced = p.cost - p.rows.transpose() * duals;
    double obj = 0.0;
    auto term = [tol](double mult, double lo, double hi) {
        if (mult > 0.0) return std::isfinite(lo) ? mult * lo : (mult <= tol ? 0.0 : -kInf);
        if (mult < 0.0) return std::isfinite(hi) ? mult * hi : (-mult <= tol ? 0.0 : -kInf);
        return 0.0;
    };
    for (Eigen::Index i = 0; i < duals.size(); ++i) obj += term(duals[i], p.row_lower[i], p.row_upper[i]);
    for (Eigen::Index j = 0; j < reduced.size(); ++j) obj += term(reduced[j], p.lower[j], p.upper[j]);
    return obj;
}

/// Residuals certifying an optimal primal/dual pair.
struct LpCertificate {
    double primal_residual = 0.0;   // max bound or row violation
    double dual_residual = 0.0;     // max multiplier of the wrong sign for its finite side
    double duality_gap = 0.0;       // |primal objective - dual objective|
    double complementarity = 0.0;   // max |multiplier * distance to the priced side|
};

inline LpCertificate certify(const LpProblem& p, const LpSolution& s) {
    LpCertificate c;
    if (s.status != LpStatus::Optimal) throw UsageError("certify: solution is not optimal");
    const Eigen::VectorXd act = p.rows * s.primal;
    const Eigen::VectorXd reduced = p.cost - p.rows.transpose() * s.duals;

    auto check = [&c](double value, double lo, double hi, double mult) {
        c.primal_residual = std::max({c.primal_residual, lo - value, value - hi});
        if (mult > 0.0) {
            if (!std::isfinite(lo)) c.dual_residual = std::max(c.dual_residual, mult);
            else c.complementarity = std::max(c.complementarity, std::abs(mult * (value - lo)));
        } else if (mult < 0.0) {
            if (!std::isfinite(hi)) c.dual_residual = std::max(c.dual_residual, -mult);
            else c.complementarity = std::max(c.complementarity, std::abs(mult * (hi - value)));
        }
    };
    for (Eigen::Index i = 0; i < act.size(); ++i) check(act[i], p.row_lower[i], p.row_upper[i], s.duals[i]);
    for (Eigen::Index j = 0; j < s.primal.size(); ++j) check(s.primal[j], p.lower[j], p.upper[j], reduced[j]);

    c.duality_gap = std::abs(p.cost.dot(s.primal) - dual_objective(p, s.duals));
    return c;
}

namespace detail {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free };

class BoundedSimplex {
public:
    BoundedSimplex(const LpProblem& p, const SimplexOptions& opt) : p_(p), opt_(opt) {
        m_ = p.num_rows();
        n_ = p.num_vars();
        total_ = n_ + 2 * m_;
        cols_ = Eigen::MatrixXd::Zero(m_, total_);
        cols_.leftCols(n_) = p.rows;
        cols_.middleCols(n_, m_) = -Eigen::MatrixXd::Identity(m_, m_);
        lo_.resize(total_);
        hi_.resize(total_);
        x_ = Eigen::VectorXd::Zero(total_);
        state_.assign(static_cast<std::size_t>(total_), VarState::AtLower);
        basis_.resize(static_cast<std::size_t>(m_));

        bound_scale_ = 1.0;
        auto track = [this](double v) {
            if (std::isfinite(v)) bound_scale_ = std::max(bound_scale_, std::abs(v));
        };
        for (Eigen::Index j = 0; j < n_; ++j) {
            lo_[j] = p.lower[j];
            hi_[j] = p.upper[j];
            track(lo_[j]);
            track(hi_[j]);
            place_at_bound(j);
        }
        const Eigen::VectorXd act = p.rows * x_.head(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index s = n_ + i, a = n_ + m_ + i;
            lo_[s] = p.row_lower[i];
            hi_[s] = p.row_upper[i];
            track(lo_[s]);
            track(hi_[s]);
            lo_[a] = 0.0;
            hi_[a] = kInf;
            if (act[i] >= lo_[s] && act[i] <= hi_[s] && lo_[s] < hi_[s]) {
                // activity already inside its range: start with s basic
                x_[s] = act[i];
                state_[idx(s)] = VarState::Basic;
                basis_[idx(i)] = s;
                cols_(i, a) = 1.0;
                x_[a] = 0.0;
                state_[idx(a)] = VarState::AtLower;
                continue;
            }
            if (act[i] < lo_[s]) set_nonbasic(s, VarState::AtLower, lo_[s]);
            else if (act[i] > hi_[s]) set_nonbasic(s, VarState::AtUpper, hi_[s]);
            else set_nonbasic(s, VarState::AtLower, lo_[s]);  // fixed row, act == value
            const double r = x_[s] - act[i];
            cols_(i, a) = r >= 0.0 ? 1.0 : -1.0;
            x_[a] = std::abs(r);
            state_[idx(a)] = VarState::Basic;
            basis_[idx(i)] = a;
        }
        bland_ = opt_.bland_only;
        max_iter_ = opt_.max_iterations > 0 ? opt_.max_iterations : 5000 + 200 * static_cast<int>(total_);
    }

    LpSolution solve() {
        LpSolution out;
        const Eigen::Index n_art_begin = n_ + m_;

        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total_);
        phase1.tail(m_).setOnes();
        run_phase(phase1, /*phase_one=*/true);
        double infeas = 0.0;
        for (Eigen::Index a = n_art_begin; a < total_; ++a) infeas += std::max(0.0, x_[a]);
        if (infeas > opt_.feasibility_tol * (1.0 + bound_scale_)) {
            out.status = LpStatus::Infeasible;
            out.infeasibility = infeas;
            out.farkas = y_;
            out.primal = x_.head(n_);
            finish(out);
            return out;
        }

        for (Eigen::Index a = n_art_begin; a < total_; ++a) {
            hi_[a] = 0.0;
            if (state_[idx(a)] != VarState::Basic) set_nonbasic(a, VarState::AtLower, 0.0);
        }
        Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total_);
        phase2.head(n_) = p_.cost;
        const bool unbounded = !run_phase(phase2, /*phase_one=*/false);

        out.primal = x_.head(n_);
        if (unbounded) {
            out.status = LpStatus::Unbounded;
            out.ray = ray_;
            finish(out);
            return out;
        }
        out.status = LpStatus::Optimal;
        out.duals = y_;
        out.reduced_costs = p_.cost - p_.rows.transpose() * y_;
        out.objective = p_.cost.dot(out.primal);
        finish(out);
        return out;
    }

private:
    static std::size_t idx(Eigen::Index i) { return static_cast<std::size_t>(i); }

    void place_at_bound(Eigen::Index j) {
        if (std::isfinite(lo_[j])) set_nonbasic(j, VarState::AtLower, lo_[j]);
        else if (std::isfinite(hi_[j])) set_nonbasic(j, VarState::AtUpper, hi_[j]);
        else set_nonbasic(j, VarState::Free, 0.0);
    }

    void set_nonbasic(Eigen::Index j, VarState st, double value) {
        state_[idx(j)] = st;
        x_[j] = value;
    }

    void finish(LpSolution& out) const {
        out.iterations = iterations_;
        out.used_bland = bland_;
    }

    // Recomputes basic values and duals from the current basis.
    void refactor(const Eigen::VectorXd& cost) {
        if (m_ == 0) {
            y_.resize(0);
            return;
        }
        Eigen::MatrixXd b(m_, m_);
        Eigen::VectorXd cb(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            b.col(i) = cols_.col(basis_[idx(i)]);
            cb[i] = cost[basis_[idx(i)]];
        }
        lu_.compute(b);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (Eigen::Index j = 0; j < total_; ++j)
            if (state_[idx(j)] != VarState::Basic && x_[j] != 0.0) rhs.noalias() -= cols_.col(j) * x_[j];
        const Eigen::VectorXd xb = lu_.solve(rhs);
        for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[idx(i)]] = xb[i];
        y_ = lu_.transpose().solve(cb);
    }

    // Returns false when phase 2 detects an unbounded direction.
    bool run_phase(const Eigen::VectorXd& cost, bool phase_one) {
        int degenerate_run = 0;
        while (true) {
            if (++iterations_ > max_iter_) throw InternalError("simplex: iteration limit exceeded");
            refactor(cost);

            // pricing
            Eigen::Index enter = -1;
            double enter_dir = 0.0, best = 0.0;
            for (Eigen::Index j = 0; j < total_; ++j) {
                const VarState st = state_[idx(j)];
                if (st == VarState::Basic || lo_[j] == hi_[j]) continue;
                const double d = cost[j] - (m_ > 0 ? cols_.col(j).dot(y_) : 0.0);
                double dir = 0.0;
                if (st == VarState::AtLower && d < -opt_.optimality_tol) dir = 1.0;
                else if (st == VarState::AtUpper && d > opt_.optimality_tol) dir = -1.0;
                else if (st == VarState::Free && std::abs(d) > opt_.optimality_tol) dir = d < 0.0 ? 1.0 : -1.0;
                if (dir == 0.0) continue;
                if (bland_) {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    enter_dir = dir;
                }
            }
            if (enter < 0) return true;

            Eigen::VectorXd alpha = m_ > 0 ? Eigen::VectorXd(lu_.solve(cols_.col(enter))) : Eigen::VectorXd();

            // ratio test; basic i moves by -dir * alpha_i per unit step
            double t_best = kInf;
            Eigen::Index leave_pos = -1;
            VarState leave_to = VarState::AtLower;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double delta = -enter_dir * alpha[i];
                if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
                const Eigen::Index var = basis_[idx(i)];
                double t;
                VarState to;
                if (delta < 0.0 && std::isfinite(lo_[var])) {
                    t = std::max(0.0, (x_[var] - lo_[var]) / -delta);
                    to = VarState::AtLower;
                } else if (delta > 0.0 && std::isfinite(hi_[var])) {
                    t = std::max(0.0, (hi_[var] - x_[var]) / delta);
                    to = VarState::AtUpper;
                } else {
                    continue;
                }
                const double tie = 1e-12 * (1.0 + t);
                bool take = false;
                if (t < t_best - tie) take = true;
                else if (t <= t_best + tie && leave_pos >= 0) {
                    if (bland_) take = var < basis_[idx(leave_pos)];
                    else take = std::abs(alpha[i]) > std::abs(alpha[leave_pos]);
                }
                if (take) {
                    t_best = t;
                    leave_pos = i;
                    leave_to = to;
                }
            }
            const double flip = hi_[enter] - lo_[enter];
            const bool bound_flip = std::isfinite(flip) && flip <= t_best;
            if (!bound_flip && leave_pos < 0) {
                if (phase_one) throw InternalError("simplex: phase 1 reported unbounded");
                ray_ = Eigen::VectorXd::Zero(n_);
                if (enter < n_) ray_[enter] = enter_dir;
                for (Eigen::Index i = 0; i < m_; ++i)
                    if (basis_[idx(i)] < n_) ray_[basis_[idx(i)]] = -enter_dir * alpha[i];
                return false;
            }

            const double t = bound_flip ? flip : t_best;
            degenerate_run = t <= 1e-12 ? degenerate_run + 1 : 0;
            if (degenerate_run > opt_.degenerate_limit) bland_ = true;

            if (bound_flip) {
                const bool to_upper = enter_dir > 0.0;
                set_nonbasic(enter, to_upper ? VarState::AtUpper : VarState::AtLower, to_upper ? hi_[enter] : lo_[enter]);
                continue;
            }
            const Eigen::Index leaving = basis_[idx(leave_pos)];
            x_[enter] += enter_dir * t;
            set_nonbasic(leaving, leave_to, leave_to == VarState::AtLower ? lo_[leaving] : hi_[leaving]);
            state_[idx(enter)] = VarState::Basic;
            basis_[idx(leave_pos)] = enter;
        }
    }

    const LpProblem& p_;
    SimplexOptions opt_;
    Eigen::Index m_ = 0, n_ = 0, total_ = 0;
    Eigen::MatrixXd cols_;
    Eigen::VectorXd lo_, hi_, x_, y_, ray_;
    std::vector<VarState> state_;
    std::vector<Eigen::Index> basis_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double bound_scale_ = 1.0;
    bool bland_ = false;
    int iterations_ = 0;
    int max_iter_ = 0;
};

}  // namespace detail

/// Solves a bounded-variable LP with a two-phase primal simplex.
///
/// Pricing is Dantzig's rule until `degenerate_limit` consecutive degenerate
/// pivots, then Bland's rule for the rest of the solve, which guarantees
/// termination. The result is a deterministic function of the problem.
inline LpSolution solve_lp(const LpProblem& problem, const SimplexOptions& options = {}) {
    problem.check();
    detail::BoundedSimplex simplex(problem, options);
    return simplex.solve();
}

}  // namespace gridprice
