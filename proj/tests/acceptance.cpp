// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from independent checks (vertex
// enumeration, finite differences, lattice search), never from the code
// under test.

#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace gridprice;
using gridprice::testing::case_path;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Market {
    GridCase grid;
    DispatchModel model;
    UserSet<QuadraticDisutility> users;

    explicit Market(GridCase g) : grid(std::move(g)), model(grid), users(users_from_case(grid)) {}
};

Outcome lp_core() {
    const auto t0 = Clock::now();
    RngStream rng(1, Stream::Test);
    double worst_gap = 0.0, worst_vertex = 0.0;
    int enumerated = 0, not_optimal = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.next() % 8);
        const auto m = static_cast<Eigen::Index>(1 + rng.next() % 8);
        const LpProblem p = gridprice::testing::random_bounded_lp(rng, n, m);
        const LpSolution s = solve_lp(p);
        if (s.status != LpStatus::Optimal) {
            ++not_optimal;
            continue;
        }
        worst_gap = std::max(worst_gap, std::abs(s.objective - dual_objective(p, dual_vector(s))));
        if (n <= 6) {
            ++enumerated;
            worst_vertex = std::max(worst_vertex, std::abs(s.objective - gridprice::testing::vertex_enumeration_optimum(p)));
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = not_optimal == 0 && worst_gap <= 1e-8 && worst_vertex <= 1e-8 && secs < 5.0;
    o.detail = fmt("100 LPs, max |primal-dual| %.2e, max |primal-vertex| %.2e over %d enumerated, %.2f s",
                   worst_gap, worst_vertex, enumerated, secs);
    return o;
}

Outcome subgradient_validity() {
    const auto t0 = Clock::now();
    Market m(load_case(case_path("ieee14.json")));
    RngStream rng(2, Stream::Test);
    auto draw = [&] {
        DemandProfile x(m.users.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(0.0, 20.0);
        return x;
    };
    double worst = kInf;
    for (int trial = 0; trial < 1000; ++trial) {
        const DemandProfile x = draw(), y = draw();
        const DispatchResult rx = m.model.evaluate(x);
        const double slack = m.model.evaluate(y).value - rx.value - rx.lmp.values.dot(y.values - x.values);
        worst = std::min(worst, slack);
    }
    const double secs = seconds_since(t0);
    return {worst >= -1e-6 && secs < 30.0,
            fmt("1000 pairs, min J(y)-J(x)-lambda(x).(y-x) = %.3e, %.2f s", worst, secs)};
}

Outcome best_response_law() {
    RngStream rng(3, Stream::Test);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double worst_stationarity = 0.0, worst_slope = 0.0;
    bool monotone = true;
    for (int trial = 0; trial < 10000; ++trial) {
        const double p = rng.uniform(-50.0, 50.0);
        const QuadraticDisutility f{rng.uniform(-20.0, 20.0), rng.uniform(0.1, 10.0)};
        const double x = best_response(f, p);
        // stationarity in ulps of the price it balances
        const double scale = eps * std::max({std::abs(p), std::abs(f.xbar) * f.a, 1.0});
        worst_stationarity = std::max(worst_stationarity, std::abs(2.0 * f.a * (x - f.xbar) + p) / scale);
        const double h = 1e-3;
        const double fd = (best_response(f, p + h) - best_response(f, p - h)) / (2.0 * h);
        worst_slope = std::max(worst_slope, std::abs(fd + 1.0 / (2.0 * f.a)));
        if (trial % 100 == 0) {
            double prev = kInf;
            for (int k = 0; k <= 200; ++k) {
                const double xk = best_response(f, -50.0 + 0.5 * k);
                monotone = monotone && xk < prev;
                prev = xk;
            }
        }
    }
    return {worst_stationarity <= 8.0 && worst_slope <= 1e-8 && monotone,
            fmt("1e4 triples, max |f'(x*)+p| %.1f ulp, max slope error %.2e, monotone %s", worst_stationarity,
                worst_slope, monotone ? "yes" : "no")};
}

Outcome equilibrium_alignment() {
    Market m(load_case(case_path("ieee14.json")));
    const auto t0 = Clock::now();
    const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, 1), RunConfig{});
    const double secs = seconds_since(t0);
    if (t.status != RunStatus::Converged) return {false, std::string("run ended ") + to_string(t.status)};
    const double residual = (t.terminal().lambda.values - t.terminal().p.values).cwiseAbs().maxCoeff();
    const KktReport k = joint_lp_kkt_check(m.model, m.users, t.terminal().x);
    return {residual <= 1e-4 && k.probes_pass() && secs < 10.0,
            fmt("|lambda-p| %.2e after %zu steps, %zu/%zu probes pass, %.3f s", residual, t.iterations,
                static_cast<std::size_t>(std::count_if(k.probes.begin(), k.probes.end(),
                                                       [](const CoordinateProbe& p) { return p.passed; })),
                k.probes.size(), secs)};
}

Outcome oracle_equivalence() {
    Outcome o;
    for (const char* name : {"one_bus.json", "two_bus.json"}) {
        Market m(load_case(case_path(name)));
        const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, 1), RunConfig{});
        std::vector<Interval> box;
        for (const auto& u : m.grid.users) box.push_back({u.xbar - 12.0, u.xbar + 12.0});
        const PlannerSolution g = grid_search(m.model, m.users, box, 1e-3);
        const double dx = (t.terminal().x.values - g.x.values).cwiseAbs().maxCoeff();
        const double dc = std::abs(t.terminal().C - g.cost);
        o.pass = o.pass && t.status == RunStatus::Converged && dx <= 2e-3 && dc <= 1e-3;
        o.detail += fmt("%s |dx| %.1e |dC| %.1e; ", name, dx, dc);
    }
    // c = 10, a = 1, xbar = 8: p* = c and x* = xbar - c / 2
    Market single(gridprice::testing::single_bus_case(10.0, 8.0));
    const Trajectory t = run(single.model, single.users, PriceProfile{5.0}, RunConfig{});
    const double dp = std::abs(t.terminal().p[0] - 10.0), dx = std::abs(t.terminal().x[0] - 3.0);
    o.pass = o.pass && dp <= 1e-6 && dx <= 1e-6;
    o.detail += fmt("analytic |dp| %.1e |dx| %.1e", dp, dx);
    return o;
}

Outcome uniqueness() {
    Market m(load_case(case_path("ieee14.json")));
    std::vector<Eigen::VectorXd> ends;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, seed), RunConfig{});
        if (t.status != RunStatus::Converged) return {false, fmt("seed %llu did not converge", (unsigned long long)seed)};
        Eigen::VectorXd v(2 * m.users.size());
        v << t.terminal().p.values, t.terminal().x.values;
        ends.push_back(v);
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < ends.size(); ++i)
        for (std::size_t j = i + 1; j < ends.size(); ++j)
            spread = std::max(spread, (ends[i] - ends[j]).cwiseAbs().maxCoeff());
    return {spread <= 1e-3, fmt("10 seeds, max pairwise |(p,x)_i-(p,x)_j| %.2e", spread)};
}

Outcome lyapunov_descent() {
    Outcome o;
    std::size_t runs = 0, steps = 0, increases = 0;
    double worst_rate = 0.0;
    for (const char* name : {"one_bus.json", "two_bus.json", "three_bus.json", "ieee14.json"}) {
        Market m(load_case(case_path(name)));
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, seed), RunConfig{});
            if (t.status != RunStatus::Converged) {
                o.pass = false;
                o.detail += fmt("%s seed %llu did not converge; ", name, (unsigned long long)seed);
                continue;
            }
            ++runs;
            std::size_t up = 0;
            for (std::size_t k = 0; k + 1 < t.records.size(); ++k) up += t.records[k + 1].C > t.records[k].C + 1e-9;
            const auto v = lyapunov_series(t);
            o.pass = o.pass && v.back() == 0.0;
            const std::size_t n = std::max<std::size_t>(t.records.size() - 1, 1);
            worst_rate = std::max(worst_rate, static_cast<double>(up) / static_cast<double>(n));
            steps += n;
            increases += up;
        }
    }
    o.pass = o.pass && worst_rate < 0.01;
    o.detail += fmt("%zu converged runs, %zu of %zu steps increase C, worst run rate %.3f%%", runs, increases, steps,
                    100.0 * worst_rate);
    return o;
}

Outcome congested_convergence() {
    Market m(load_case(case_path("ieee14.json")));
    RunConfig cfg;
    cfg.max_iters = 20000;
    const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, 1), cfg);
    if (t.status != RunStatus::Converged) return {false, std::string("run ended ") + to_string(t.status)};
    const DispatchResult d = m.model.evaluate(t.terminal().x);
    const auto congested = std::count_if(d.binding.begin(), d.binding.end(), [](const BindingConstraint& b) {
        return b.kind != BindingConstraint::Kind::GeneratorMax;
    });
    const std::size_t clusters = count_clusters(t.terminal().lambda.values, 1e-4);
    return {congested > 0 && clusters <= 5,
            fmt("converged in %zu steps, %zu LMP clusters, %ld congested lines", t.iterations, clusters,
                static_cast<long>(congested))};
}

Outcome determinism() {
    auto once = [] {
        Market m(load_case(case_path("ieee14.json")));
        const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, 7), RunConfig{});
        return trajectory_csv(t, m.users.size());
    };
    const std::string a = once(), b = once();
    return {!a.empty() && a == b, fmt("%zu bytes, identical %s", a.size(), a == b ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"lp-core-correctness", lp_core},
        {"subgradient-validity", subgradient_validity},
        {"best-response-law", best_response_law},
        {"equilibrium-alignment", equilibrium_alignment},
        {"oracle-equivalence", oracle_equivalence},
        {"uniqueness", uniqueness},
        {"lyapunov-descent", lyapunov_descent},
        {"ieee14-congested-convergence", congested_convergence},
        {"determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
