#pragma once

#include "gridprice/errors.hpp"
#include "gridprice/grid_model.hpp"
#include "gridprice/profile.hpp"

#include <concepts>
#include <cstddef>
#include <vector>

namespace gridprice {

/// A strictly convex, twice differentiable disutility f(x).
///
/// `inverse_gradient(g)` returns the unique x with f'(x) = g; it exists
/// because f' is strictly increasing.
template <class D>
concept Disutility = requires(const D& f, double x) {
    { f.value(x) } -> std::convertible_to<double>;
    { f.gradient(x) } -> std::convertible_to<double>;
    { f.inverse_gradient(x) } -> std::convertible_to<double>;
    { f.curvature(x) } -> std::convertible_to<double>;
};

/// f(x) = a (x - xbar)^2 with a > 0.
struct QuadraticDisutility {
    double xbar = 0.0;
    double a = 1.0;

    double value(double x) const { return a * (x - xbar) * (x - xbar); }
    double gradient(double x) const { return 2.0 * a * (x - xbar); }
    double inverse_gradient(double g) const { return xbar + g / (2.0 * a); }
    double curvature(double) const { return 2.0 * a; }
};

static_assert(Disutility<QuadraticDisutility>);

template <Disutility D>
double grad_disutility(const D& f, double x) {
    return f.gradient(x);
}

/// Unique minimizer of f(x) + p x, i.e. the x with f'(x) = -p.
template <Disutility D>
double best_response(const D& f, double price) {
    return f.inverse_gradient(-price);
}

/// d best_response / dp = -1 / f''(x*(p)).
template <Disutility D>
double best_response_slope(const D& f, double price) {
    return -1.0 / f.curvature(best_response(f, price));
}

/// Ordered disutilities aligned with DemandProfile / PriceProfile indexing.
template <Disutility D>
class UserSet {
public:
    UserSet() = default;
    explicit UserSet(std::vector<D> users) : users_(std::move(users)) {
        if (users_.empty()) throw UsageError("UserSet: at least one user required");
    }

    std::size_t size() const noexcept { return users_.size(); }
    const D& operator[](std::size_t i) const { return users_[i]; }
    auto begin() const { return users_.begin(); }
    auto end() const { return users_.end(); }

    /// Sum of f_i(x_i).
    double total_disutility(const DemandProfile& x) const {
        check(x.size());
        double s = 0.0;
        for (std::size_t i = 0; i < users_.size(); ++i) s += users_[i].value(x[i]);
        return s;
    }

    /// (f_i'(x_i))_i as a price-like vector.
    PriceProfile gradient(const DemandProfile& x) const {
        check(x.size());
        PriceProfile g(users_.size());
        for (std::size_t i = 0; i < users_.size(); ++i) g[i] = users_[i].gradient(x[i]);
        return g;
    }

    void check(std::size_t n) const {
        if (n != users_.size()) throw UsageError("profile length does not match the user set");
    }

private:
    std::vector<D> users_;
};

template <Disutility D>
DemandProfile best_response_profile(const UserSet<D>& users, const PriceProfile& p) {
    users.check(p.size());
    DemandProfile x(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) x[i] = best_response(users[i], p[i]);
    return x;
}

/// Quadratic users in case order.
inline UserSet<QuadraticDisutility> users_from_case(const GridCase& c) {
    std::vector<QuadraticDisutility> out;
    out.reserve(c.users.size());
    for (const auto& u : c.users) out.push_back({u.xbar, u.a});
    return UserSet<QuadraticDisutility>(std::move(out));
}

}  // namespace gridprice
