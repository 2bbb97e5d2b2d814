#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>

namespace gridprice {

/// Per-user vector with a unit tag, so demands and prices cannot be mixed up.
template <class Tag>
struct Profile {
    Eigen::VectorXd values;

    Profile() = default;
    explicit Profile(Eigen::VectorXd v) : values(std::move(v)) {}
    explicit Profile(std::size_t n, double fill = 0.0)
        : values(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), fill)) {}
    Profile(std::initializer_list<double> init) : values(static_cast<Eigen::Index>(init.size())) {
        Eigen::Index i = 0;
        for (double v : init) values[i++] = v;
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    double& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
    double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }

    bool all_finite() const { return values.allFinite(); }

    friend bool operator==(const Profile& a, const Profile& b) {
        return a.values.size() == b.values.size() && a.values == b.values;
    }
};

struct DemandTag {};
struct PriceTag {};

/// MW per user.
using DemandProfile = Profile<DemandTag>;
/// $/MWh per user. Also used for locational marginal prices.
using PriceProfile = Profile<PriceTag>;

}  // namespace gridprice
