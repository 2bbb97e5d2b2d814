#pragma once

// System cost J(x) as the value function of a DC optimal power flow.
//
//     J(x) = min_g  c' g
//            s.t.   sum(g) = sum(x)                       (balance)
//                   -F_l <= PTDF_l (G g - d(x)) <= F_l    (each limited line)
//                   0 <= g <= pmax
//
// d(x) is the nodal demand assembled from user demands and G maps generators
// to buses. J is convex and piecewise linear in x, and the LP row duals give
// one element of its subdifferential:
//
//     lambda_i = y_balance + sum_l y_l * PTDF(l, bus_i)

#include "gridprice/errors.hpp"
#include "gridprice/grid_model.hpp"
#include "gridprice/lp.hpp"
#include "gridprice/profile.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace gridprice {

struct DispatchOptions {
    /// When set, a fictitious generator with this cost ($/MWh) sits at every
    /// bus so any demand is servable.
    std::optional<double> voll;
};

inline constexpr double kDefaultVoll = 1000.0;

struct BindingConstraint {
    enum class Kind { LineUpper, LineLower, GeneratorMax };
    Kind kind;
    std::size_t index;

    friend bool operator==(const BindingConstraint&, const BindingConstraint&) = default;
};

struct DispatchResult {
    double value = 0.0;                    // J, $/h
    Eigen::VectorXd generation;            // MW per generator
    Eigen::VectorXd shed;                  // MW of fictitious generation per bus (empty without voll)
    Eigen::VectorXd flows;                 // MW per line
    PriceProfile lmp;                      // $/MWh per user, an element of dJ(x)
    double energy_price = 0.0;             // dual of the balance row
    Eigen::VectorXd line_duals;            // dual per line (0 for unlimited lines)
    std::vector<BindingConstraint> binding;
};

/// Reusable dispatch LP for a fixed case; only the row bounds depend on x.
class DispatchModel {
public:
    DispatchModel(const GridCase& grid, PtdfMatrix ptdf, DispatchOptions options = {})
        : grid_(grid), ptdf_(std::move(ptdf)), options_(options) {
        if (ptdf_.num_buses() != static_cast<Eigen::Index>(grid.num_buses) ||
            ptdf_.num_lines() != static_cast<Eigen::Index>(grid.lines.size()))
            throw UsageError("DispatchModel: PTDF does not match the case");
        for (const auto& g : grid.generators)
            if (!(g.cost >= 0.0)) throw InvalidCase("DispatchModel: generator costs must be nonnegative");
        build();
    }

    explicit DispatchModel(const GridCase& grid, DispatchOptions options = {})
        : DispatchModel(grid, build_ptdf(grid), options) {}

    const GridCase& grid() const noexcept { return grid_; }
    const PtdfMatrix& ptdf() const noexcept { return ptdf_; }
    const DispatchOptions& options() const noexcept { return options_; }
    std::size_t num_users() const noexcept { return grid_.users.size(); }

    DispatchResult evaluate(const DemandProfile& x) const {
        if (x.size() != grid_.users.size()) throw UsageError("evaluate_cost: demand length does not match users");
        if (!x.all_finite()) throw UsageError("evaluate_cost: non-finite demand");

        const Eigen::VectorXd d = bus_demand(grid_, x.values);
        LpProblem lp = lp_;
        lp.row_lower[0] = lp.row_upper[0] = d.sum();
        for (std::size_t k = 0; k < limited_.size(); ++k) {
            const auto l = limited_[k];
            const double shift = ptdf_.factors.row(static_cast<Eigen::Index>(l)).dot(d);
            const double limit = *grid_.lines[l].limit;
            lp.row_lower[static_cast<Eigen::Index>(k) + 1] = shift - limit;
            lp.row_upper[static_cast<Eigen::Index>(k) + 1] = shift + limit;
        }

        const LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) throw UnservableDemand(sol.infeasibility);
        if (sol.status == LpStatus::Unbounded) throw InternalError("evaluate_cost: dispatch LP unbounded");

        DispatchResult r;
        const auto ng = static_cast<Eigen::Index>(grid_.generators.size());
        r.value = sol.objective;
        r.generation = sol.primal.head(ng);
        if (options_.voll) r.shed = sol.primal.tail(static_cast<Eigen::Index>(grid_.num_buses));

        Eigen::VectorXd injection = -d;
        for (Eigen::Index g = 0; g < ng; ++g) injection[static_cast<Eigen::Index>(grid_.generators[static_cast<std::size_t>(g)].bus)] += r.generation[g];
        if (options_.voll) injection += r.shed;
        r.flows = ptdf_.flows(injection);

        r.energy_price = sol.duals[0];
        r.line_duals = Eigen::VectorXd::Zero(ptdf_.num_lines());
        for (std::size_t k = 0; k < limited_.size(); ++k)
            r.line_duals[static_cast<Eigen::Index>(limited_[k])] = sol.duals[static_cast<Eigen::Index>(k) + 1];
        Eigen::VectorXd bus_price = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid_.num_buses), r.energy_price);
        bus_price.noalias() += ptdf_.factors.transpose() * r.line_duals;
        r.lmp = PriceProfile(grid_.users.size());
        for (std::size_t u = 0; u < grid_.users.size(); ++u) r.lmp[u] = bus_price[static_cast<Eigen::Index>(grid_.users[u].bus)];

        constexpr double kBindTol = 1e-7;
        for (std::size_t l = 0; l < grid_.lines.size(); ++l) {
            const auto& lim = grid_.lines[l].limit;
            if (!lim) continue;
            const double f = r.flows[static_cast<Eigen::Index>(l)];
            if (f >= *lim - kBindTol) r.binding.push_back({BindingConstraint::Kind::LineUpper, l});
            else if (f <= -*lim + kBindTol) r.binding.push_back({BindingConstraint::Kind::LineLower, l});
        }
        for (std::size_t g = 0; g < grid_.generators.size(); ++g) {
            const auto& pmax = grid_.generators[g].pmax;
            if (pmax && r.generation[static_cast<Eigen::Index>(g)] >= *pmax - kBindTol)
                r.binding.push_back({BindingConstraint::Kind::GeneratorMax, g});
        }
        return r;
    }

    /// J(y) >= J(x) + lambda(x) . (y - x) - tol
    bool subgradient_check(const DemandProfile& x, const DemandProfile& y, double tol = 1e-6) const {
        const DispatchResult at_x = evaluate(x);
        const DispatchResult at_y = evaluate(y);
        return at_y.value >= at_x.value + at_x.lmp.values.dot(y.values - x.values) - tol;
    }

private:
    void build() {
        const auto ng = static_cast<Eigen::Index>(grid_.generators.size());
        const auto nshed = options_.voll ? static_cast<Eigen::Index>(grid_.num_buses) : 0;
        for (std::size_t l = 0; l < grid_.lines.size(); ++l)
            if (grid_.lines[l].limit) limited_.push_back(l);

        const auto rows = 1 + static_cast<Eigen::Index>(limited_.size());
        lp_ = LpProblem::zeros(rows, ng + nshed);
        for (Eigen::Index g = 0; g < ng; ++g) {
            const auto& gen = grid_.generators[static_cast<std::size_t>(g)];
            lp_.cost[g] = gen.cost;
            lp_.upper[g] = gen.pmax ? *gen.pmax : kInf;
            lp_.rows(0, g) = 1.0;
            for (std::size_t k = 0; k < limited_.size(); ++k)
                lp_.rows(static_cast<Eigen::Index>(k) + 1, g) = ptdf_.factors(static_cast<Eigen::Index>(limited_[k]), static_cast<Eigen::Index>(gen.bus));
        }
        for (Eigen::Index b = 0; b < nshed; ++b) {
            lp_.cost[ng + b] = *options_.voll;
            lp_.rows(0, ng + b) = 1.0;
            for (std::size_t k = 0; k < limited_.size(); ++k)
                lp_.rows(static_cast<Eigen::Index>(k) + 1, ng + b) = ptdf_.factors(static_cast<Eigen::Index>(limited_[k]), b);
        }
    }

    GridCase grid_;
    PtdfMatrix ptdf_;
    DispatchOptions options_;
    std::vector<std::size_t> limited_;
    LpProblem lp_;
};

inline DispatchResult evaluate_cost(const GridCase& grid, const PtdfMatrix& ptdf, const DemandProfile& x,
                                    const DispatchOptions& options = {}) {
    return DispatchModel(grid, ptdf, options).evaluate(x);
}

inline bool subgradient_check(const GridCase& grid, const PtdfMatrix& ptdf, const DemandProfile& x,
                              const DemandProfile& y, const DispatchOptions& options = {}) {
    return DispatchModel(grid, ptdf, options).subgradient_check(x, y);
}

}  // namespace gridprice
