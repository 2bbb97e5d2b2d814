#pragma once

#include "gridprice/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace gridprice {

using BusId = std::size_t;

struct Line {
    BusId from = 0;
    BusId to = 0;
    double susceptance = 1.0;           // per unit, base 1
    std::optional<double> limit;        // MW, nullopt = unbounded

    bool operator==(const Line&) const = default;
};

struct Generator {
    BusId bus = 0;
    double cost = 0.0;                  // $/MWh
    std::optional<double> pmax;         // MW, nullopt = unbounded

    bool operator==(const Generator&) const = default;
};

/// One price-taking user with quadratic disutility a (x - xbar)^2.
struct UserSpec {
    BusId bus = 0;
    double xbar = 0.0;                  // MW
    double a = 1.0;                     // $/MW^2h

    bool operator==(const UserSpec&) const = default;
};

/// Static network description. Buses are 0..num_buses-1.
struct GridCase {
    std::size_t num_buses = 0;
    BusId slack_bus = 0;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<UserSpec> users;

    bool operator==(const GridCase&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return ok(); }
};

namespace detail {

inline bool line_graph_connected(const GridCase& c) {
    if (c.num_buses == 0) return false;
    std::vector<std::vector<BusId>> adj(c.num_buses);
    for (const auto& l : c.lines) {
        if (l.from >= c.num_buses || l.to >= c.num_buses) continue;
        adj[l.from].push_back(l.to);
        adj[l.to].push_back(l.from);
    }
    std::vector<bool> seen(c.num_buses, false);
    std::queue<BusId> frontier;
    frontier.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        BusId b = frontier.front();
        frontier.pop();
        for (BusId n : adj[b]) {
            if (!seen[n]) {
                seen[n] = true;
                ++reached;
                frontier.push(n);
            }
        }
    }
    return reached == c.num_buses;
}

}  // namespace detail

/// Checks every structural rule on a case and collects all violations.
inline ValidationReport validate_case(const GridCase& c) {
    ValidationReport r;
    auto add = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

    if (c.num_buses == 0) add("case has no buses");
    if (c.slack_bus >= c.num_buses) add("slack bus " + std::to_string(c.slack_bus) + " out of range");

    for (std::size_t i = 0; i < c.lines.size(); ++i) {
        const auto& l = c.lines[i];
        const std::string tag = "line " + std::to_string(i) + ": ";
        if (l.from >= c.num_buses || l.to >= c.num_buses) add(tag + "bad bus index");
        if (l.from == l.to) add(tag + "endpoints must be distinct");
        if (!std::isfinite(l.susceptance) || l.susceptance <= 0.0) add(tag + "nonpositive susceptance");
        if (l.limit && (!std::isfinite(*l.limit) || *l.limit < 0.0)) add(tag + "negative flow limit");
    }
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
        const auto& gen = c.generators[g];
        const std::string tag = "generator " + std::to_string(g) + ": ";
        if (gen.bus >= c.num_buses) add(tag + "bad bus index");
        if (!std::isfinite(gen.cost)) add(tag + "non-finite cost");
        else if (gen.cost < 0.0) add(tag + "negative cost");
        if (gen.pmax && (!std::isfinite(*gen.pmax) || *gen.pmax < 0.0)) add(tag + "negative pmax");
    }
    if (c.users.empty()) add("case has no users");
    for (std::size_t u = 0; u < c.users.size(); ++u) {
        const auto& user = c.users[u];
        const std::string tag = "user " + std::to_string(u) + ": ";
        if (user.bus >= c.num_buses) add(tag + "bad bus index");
        if (!std::isfinite(user.xbar)) add(tag + "non-finite xbar");
        if (!std::isfinite(user.a) || user.a <= 0.0) add(tag + "curvature a must be positive");
    }
    if (c.num_buses > 0 && !detail::line_graph_connected(c)) add("disconnected");
    return r;
}

/// Dense L x B power transfer distribution factors; flows = ptdf * injections.
struct PtdfMatrix {
    Eigen::MatrixXd factors;
    BusId slack_bus = 0;

    Eigen::Index num_lines() const noexcept { return factors.rows(); }
    Eigen::Index num_buses() const noexcept { return factors.cols(); }

    /// Line flows (MW, oriented from -> to) for a net nodal injection vector.
    Eigen::VectorXd flows(const Eigen::VectorXd& injection) const { return factors * injection; }
};

/// Builds the PTDF of a lossless DC network with a single slack bus.
///
/// Solves the reduced susceptance system (slack row and column removed) and
/// maps bus angles to line flows b_l (theta_from - theta_to). The slack column
/// is identically zero. Throws IllConditionedNetwork when the reduced matrix
/// is singular, which is also how a disconnected graph shows up.
inline PtdfMatrix build_ptdf(const GridCase& c) {
    const auto nb = static_cast<Eigen::Index>(c.num_buses);
    const auto nl = static_cast<Eigen::Index>(c.lines.size());
    if (nb == 0 || c.slack_bus >= c.num_buses) throw InvalidCase("build_ptdf: invalid bus set or slack");
    for (const auto& l : c.lines)
        if (l.from >= c.num_buses || l.to >= c.num_buses || l.from == l.to || !(l.susceptance > 0.0))
            throw InvalidCase("build_ptdf: invalid line");

    PtdfMatrix out;
    out.slack_bus = c.slack_bus;
    out.factors = Eigen::MatrixXd::Zero(nl, nb);
    if (nb == 1) return out;

    // reduced index: bus b -> b if b < slack, b - 1 if b > slack
    const auto slack = static_cast<Eigen::Index>(c.slack_bus);
    auto reduced = [slack](BusId b) { return static_cast<Eigen::Index>(b) - (static_cast<Eigen::Index>(b) > slack ? 1 : 0); };

    Eigen::MatrixXd bred = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
    for (const auto& l : c.lines) {
        const bool f_in = l.from != c.slack_bus, t_in = l.to != c.slack_bus;
        const auto f = reduced(l.from), t = reduced(l.to);
        if (f_in) bred(f, f) += l.susceptance;
        if (t_in) bred(t, t) += l.susceptance;
        if (f_in && t_in) {
            bred(f, t) -= l.susceptance;
            bred(t, f) -= l.susceptance;
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(bred);
    const double scale = bred.cwiseAbs().maxCoeff();
    lu.setThreshold(1e-12);
    if (scale <= 0.0 || !lu.isInvertible() || lu.rcond() < 1e-12) throw IllConditionedNetwork();
    const Eigen::MatrixXd xred = lu.inverse();  // reactance matrix, (nb-1) x (nb-1)

    for (Eigen::Index li = 0; li < nl; ++li) {
        const auto& l = c.lines[static_cast<std::size_t>(li)];
        for (Eigen::Index b = 0; b < nb; ++b) {
            if (b == slack) continue;
            const auto rb = reduced(static_cast<BusId>(b));
            const double theta_f = l.from == c.slack_bus ? 0.0 : xred(reduced(l.from), rb);
            const double theta_t = l.to == c.slack_bus ? 0.0 : xred(reduced(l.to), rb);
            out.factors(li, b) = l.susceptance * (theta_f - theta_t);
        }
    }
    return out;
}

/// Net nodal demand (MW per bus) from a per-user demand vector.
inline Eigen::VectorXd bus_demand(const GridCase& c, const Eigen::VectorXd& user_demand) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.num_buses));
    for (std::size_t u = 0; u < c.users.size(); ++u) d[static_cast<Eigen::Index>(c.users[u].bus)] += user_demand[static_cast<Eigen::Index>(u)];
    return d;
}

}  // namespace gridprice
