#pragma once

// Independent certificates that a demand profile minimizes the planner cost
//
//     C(x) = sum_i f_i(x_i) + J(x).
//
// grid_search only ever looks at optimal LP values, never at duals, so it
// does not share the price machinery it is used to check.

#include "gridprice/dcopf.hpp"
#include "gridprice/errors.hpp"
#include "gridprice/profile.hpp"
#include "gridprice/users.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace gridprice {

enum class PlannerMethod { GridSearch, JointLp };

inline const char* to_string(PlannerMethod m) { return m == PlannerMethod::GridSearch ? "grid" : "kkt"; }

struct PlannerSolution {
    DemandProfile x;
    double cost = 0.0;
    PlannerMethod method = PlannerMethod::GridSearch;
    std::size_t evaluations = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct GridSearchOptions {
    /// Lattices with at most this many points are enumerated in full.
    std::size_t exhaustive_limit = 200000;
    /// Larger lattices are searched coarse to fine: the next level rescans
    /// +-window of the current strides around the incumbent at a tenth of
    /// the stride. C is convex, so a small margin is enough.
    long window = 2;
    long coarse_points = 64;
};

/// C(x), or +infinity when x cannot be dispatched.
template <Disutility D>
double planner_cost(const DispatchModel& model, const UserSet<D>& users, const DemandProfile& x) {
    try {
        return users.total_disutility(x) + model.evaluate(x).value;
    } catch (const UnservableDemand&) {
        return std::numeric_limits<double>::infinity();
    }
}

namespace detail {

// Enumerates lattice indices lo[i] + m * stride <= hi[i] in lexicographic order.
template <class Fn>
void for_each_lattice_point(const std::vector<long>& lo, const std::vector<long>& hi, long stride, Fn&& fn) {
    std::vector<long> k = lo;
    const std::size_t n = lo.size();
    while (true) {
        fn(k);
        std::size_t d = n;
        while (d > 0) {
            --d;
            if (k[d] + stride <= hi[d]) {
                k[d] += stride;
                break;
            }
            k[d] = lo[d];
            if (d == 0) return;
        }
        if (n == 0) return;
    }
}

}  // namespace detail

/// Minimizes C over the lattice box.lo + k * pitch inside `box` (n <= 3).
///
/// Unservable lattice points score +infinity. Equal minima resolve to the
/// lexicographically smallest lattice point.
template <Disutility D>
PlannerSolution grid_search(const DispatchModel& model, const UserSet<D>& users, std::span<const Interval> box,
                            double pitch, const GridSearchOptions& opt = {}) {
    const std::size_t n = users.size();
    if (n > 3) throw UsageError("grid_search: at most 3 users supported");
    if (box.size() != n) throw UsageError("grid_search: box dimension does not match users");
    if (!(pitch > 0.0)) throw UsageError("grid_search: pitch must be positive");

    std::vector<long> top(n);
    double total = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(box[i].lo <= box[i].hi)) throw UsageError("grid_search: empty interval");
        top[i] = static_cast<long>(std::floor((box[i].hi - box[i].lo) / pitch + 1e-9));
        total *= static_cast<double>(top[i] + 1);
    }

    PlannerSolution best;
    best.method = PlannerMethod::GridSearch;
    best.cost = std::numeric_limits<double>::infinity();
    std::vector<long> best_k;
    DemandProfile x(n);

    auto scan = [&](const std::vector<long>& lo, const std::vector<long>& hi, long stride) {
        std::vector<long> level_best;
        double level_cost = std::numeric_limits<double>::infinity();
        detail::for_each_lattice_point(lo, hi, stride, [&](const std::vector<long>& k) {
            for (std::size_t i = 0; i < n; ++i) x[i] = box[i].lo + static_cast<double>(k[i]) * pitch;
            const double c = planner_cost(model, users, x);
            ++best.evaluations;
            if (c < level_cost) {
                level_cost = c;
                level_best = k;
            }
        });
        if (!std::isfinite(level_cost)) throw Error("grid_search: no servable grid point");
        best.cost = level_cost;
        best_k = level_best;
    };

    std::vector<long> lo(n, 0), hi = top;
    if (total <= static_cast<double>(opt.exhaustive_limit)) {
        scan(lo, hi, 1);
    } else {
        long stride = 1;
        const long widest = *std::max_element(top.begin(), top.end());
        while (widest / stride + 1 > opt.coarse_points) stride *= 10;
        while (true) {
            scan(lo, hi, stride);
            if (stride == 1) break;
            for (std::size_t i = 0; i < n; ++i) {
                lo[i] = std::max(0L, best_k[i] - opt.window * stride);
                hi[i] = std::min(top[i], best_k[i] + opt.window * stride);
            }
            stride /= 10;
        }
    }

    best.x = DemandProfile(n);
    for (std::size_t i = 0; i < n; ++i) best.x[i] = box[i].lo + static_cast<double>(best_k[i]) * pitch;
    return best;
}

struct CoordinateProbe {
    std::size_t coordinate = 0;
    double step = 0.0;    // signed
    double delta = 0.0;   // C(x + step e_i) - C(x)
    bool passed = false;
};

struct KktReport {
    double residual = 0.0;          // ||lambda + grad f(x)||_inf
    PriceProfile lambda;
    double cost = 0.0;              // C(x)
    std::vector<CoordinateProbe> probes;

    bool probes_pass() const {
        return std::all_of(probes.begin(), probes.end(), [](const CoordinateProbe& p) { return p.passed; });
    }
};

/// First-order optimality report for x: the residual of 0 in grad f + dJ
/// using the dispatch duals, plus +-h coordinate probes of C that stay
/// meaningful at kinks of J.
template <Disutility D>
KktReport joint_lp_kkt_check(const DispatchModel& model, const UserSet<D>& users, const DemandProfile& x,
                             double h = 1e-4, double probe_tol = 1e-6) {
    users.check(x.size());
    const DispatchResult d = model.evaluate(x);
    KktReport r;
    r.lambda = d.lmp;
    r.cost = users.total_disutility(x) + d.value;
    r.residual = (d.lmp.values + users.gradient(x).values).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (double s : {-h, h}) {
            DemandProfile y = x;
            y[i] += s;
            const double c = planner_cost(model, users, y);
            r.probes.push_back({i, s, c - r.cost, c >= r.cost - probe_tol});
        }
    }
    return r;
}

}  // namespace gridprice
