#pragma once

// Explicit Euler integration of the price inclusion
//
//     dp/dt  in  dJ(x*(p)) - p
//
// where x*(p) is the users' best response. Each step observes the users'
// demand, prices it through the dispatch model, and moves p a fraction
// alpha toward the returned locational marginal prices.

#include "gridprice/dcopf.hpp"
#include "gridprice/errors.hpp"
#include "gridprice/profile.hpp"
#include "gridprice/users.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridprice {

struct RunConfig {
    double step_size = 0.05;
    int max_iters = 20000;
    double residual_tol = 1e-6;  // infinity norm of lambda - p
    std::uint64_t rng_seed = 0;
    std::optional<double> voll;
    int record_every = 1;
    // chattering guard
    int chatter_window = 500;
    int max_halvings = 6;

    void check() const {
        if (!(step_size > 0.0) || !std::isfinite(step_size)) throw UsageError("RunConfig: step size must be positive");
        if (max_iters < 1) throw UsageError("RunConfig: max_iters must be at least 1");
        if (!(residual_tol > 0.0)) throw UsageError("RunConfig: residual_tol must be positive");
        if (record_every < 1) throw UsageError("RunConfig: record_every must be at least 1");
    }
};

enum class RunStatus { Converged, MaxIters, Error };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxIters: return "max_iters";
        case RunStatus::Error: return "error";
    }
    return "?";
}

struct StepRecord {
    std::size_t k = 0;
    PriceProfile p;
    DemandProfile x;
    PriceProfile lambda;
    double J = 0.0;
    double C = 0.0;
    double residual = 0.0;
    double step_size = 0.0;
};

struct Trajectory {
    std::vector<StepRecord> records;
    RunStatus status = RunStatus::MaxIters;
    std::size_t iterations = 0;  // evaluations of the dispatch model
    std::string error;
    int halvings = 0;
    // counted over every step, not just recorded ones
    std::size_t cost_increases = 0;
    std::size_t transitions = 0;

    const StepRecord& terminal() const {
        if (records.empty()) throw UsageError("Trajectory: no records");
        return records.back();
    }
};

/// p + alpha (lambda - p)
inline PriceProfile euler_update(const PriceProfile& p, const PriceProfile& lambda, double alpha) {
    if (p.size() != lambda.size()) throw UsageError("euler_update: length mismatch");
    return PriceProfile(Eigen::VectorXd(p.values + alpha * (lambda.values - p.values)));
}

/// Evaluates the system at p without moving it.
template <Disutility D>
StepRecord observe(const DispatchModel& model, const UserSet<D>& users, const PriceProfile& p) {
    if (!p.all_finite()) throw UsageError("observe: non-finite price");
    StepRecord r;
    r.p = p;
    r.x = best_response_profile(users, p);
    const DispatchResult d = model.evaluate(r.x);
    r.lambda = d.lmp;
    r.J = d.value;
    r.C = users.total_disutility(r.x) + d.value;
    r.residual = (r.lambda.values - p.values).cwiseAbs().maxCoeff();
    return r;
}

struct StepOutcome {
    PriceProfile next;
    StepRecord record;
};

/// One Euler step of the price dynamic. Throws UnservableDemand when the
/// best response at p cannot be dispatched.
template <Disutility D>
StepOutcome step(const DispatchModel& model, const UserSet<D>& users, const PriceProfile& p, double alpha) {
    StepOutcome out;
    out.record = observe(model, users, p);
    out.record.step_size = alpha;
    out.next = euler_update(p, out.record.lambda, alpha);
    return out;
}

/// Iterates `step` until the fixed-point residual drops to `residual_tol`.
///
/// When the residual stays above tolerance for `chatter_window` steps
/// without C going down, alpha is halved (at most `max_halvings` times).
/// Unservable demand ends the run with status Error; the records keep the
/// last valid state.
template <Disutility D>
Trajectory run(const DispatchModel& model, const UserSet<D>& users, const PriceProfile& p0, const RunConfig& cfg) {
    cfg.check();
    users.check(p0.size());
    if (!p0.all_finite()) throw UsageError("run: non-finite initial price");

    Trajectory traj;
    double alpha = cfg.step_size;
    PriceProfile p = p0;
    std::optional<StepRecord> pending;  // last unrecorded state
    std::size_t window_start = 0;
    double window_cost = 0.0;
    double prev_cost = 0.0;

    for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.max_iters); ++k) {
        StepOutcome s;
        try {
            s = step(model, users, p, alpha);
        } catch (const UnservableDemand& e) {
            traj.status = RunStatus::Error;
            traj.error = e.what();
            if (pending) traj.records.push_back(std::move(*pending));
            return traj;
        }
        s.record.k = k;
        ++traj.iterations;
        if (k > 0) {
            ++traj.transitions;
            if (s.record.C > prev_cost + 1e-9) ++traj.cost_increases;
        }
        prev_cost = s.record.C;

        if (s.record.residual <= cfg.residual_tol) {
            traj.status = RunStatus::Converged;
            traj.records.push_back(std::move(s.record));
            return traj;
        }

        if (k == 0) {
            window_start = 0;
            window_cost = s.record.C;
        } else if (k - window_start >= static_cast<std::size_t>(cfg.chatter_window)) {
            if (s.record.C >= window_cost - 1e-12 && traj.halvings < cfg.max_halvings) {
                alpha *= 0.5;
                ++traj.halvings;
            }
            window_start = k;
            window_cost = s.record.C;
        }

        if (k % static_cast<std::size_t>(cfg.record_every) == 0) {
            traj.records.push_back(s.record);
            pending.reset();
        } else {
            pending = s.record;
        }
        p = std::move(s.next);
    }
    traj.status = RunStatus::MaxIters;
    if (pending) traj.records.push_back(std::move(*pending));
    return traj;
}

template <Disutility D>
Trajectory run(const GridCase& grid, const PtdfMatrix& ptdf, const UserSet<D>& users, const PriceProfile& p0,
               const RunConfig& cfg) {
    return run(DispatchModel(grid, ptdf, DispatchOptions{cfg.voll}), users, p0, cfg);
}

/// V_k = C_k - C_ref, with C_ref the terminal cost of a converged run and the
/// smallest recorded cost otherwise.
inline std::vector<double> lyapunov_series(const Trajectory& traj) {
    if (traj.records.empty()) return {};
    double ref = traj.records.back().C;
    if (traj.status != RunStatus::Converged)
        for (const auto& r : traj.records) ref = std::min(ref, r.C);
    std::vector<double> v;
    v.reserve(traj.records.size());
    for (const auto& r : traj.records) v.push_back(r.C - ref);
    return v;
}

/// Number of groups after sorting and chaining values closer than `tol`.
inline std::size_t count_clusters(const Eigen::VectorXd& values, double tol = 1e-4) {
    if (values.size() == 0) return 0;
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    std::size_t n = 1;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] - v[i - 1] > tol) ++n;
    return n;
}

}  // namespace gridprice
