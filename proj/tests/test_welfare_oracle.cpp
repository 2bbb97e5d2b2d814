#include "test_support.hpp"

#include <gtest/gtest.h>

#include <array>

using namespace gridprice;
using gridprice::testing::case_path;
using gridprice::testing::single_bus_case;

namespace {

struct Market {
    GridCase grid;
    DispatchModel model;
    UserSet<QuadraticDisutility> users;

    explicit Market(GridCase g) : grid(std::move(g)), model(grid), users(users_from_case(grid)) {}
};

}  // namespace

TEST(GridSearch, SingleBusAnalyticOptimum) {
    // C(x) = (x - 8)^2 + 10 x is minimized at x = 3 with C = 25 + 30
    Market m(single_bus_case(10.0, 8.0));
    const std::array<Interval, 1> box{{{-2.0, 10.0}}};
    const PlannerSolution s = grid_search(m.model, m.users, box, 1e-3);
    EXPECT_NEAR(s.x[0], 3.0, 1e-9);
    EXPECT_NEAR(s.cost, 55.0, 1e-9);
    EXPECT_EQ(s.method, PlannerMethod::GridSearch);
}

TEST(GridSearch, TwoBusMatchesDynamics) {
    Market m(load_case(case_path("two_bus.json")));
    const Trajectory t = run(m.model, m.users, PriceProfile{10.0, 10.0}, RunConfig{});
    ASSERT_EQ(t.status, RunStatus::Converged);

    const std::array<Interval, 2> box{{{-2.0, 12.0}, {-1.0, 10.0}}};
    const PlannerSolution s = grid_search(m.model, m.users, box, 1e-3);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(s.x[i], t.terminal().x[i], 2e-3);
    EXPECT_NEAR(s.cost, t.terminal().C, 1e-3);
}

TEST(GridSearch, ShiftedLatticeFindsTheSameMinimizer) {
    Market m(load_case(case_path("two_bus.json")));
    const std::array<Interval, 2> a{{{0.0, 10.0}, {0.0, 10.0}}};
    const std::array<Interval, 2> b{{{0.0005, 10.0}, {0.0005, 10.0}}};
    const PlannerSolution sa = grid_search(m.model, m.users, a, 1e-3);
    const PlannerSolution sb = grid_search(m.model, m.users, b, 1e-3);
    EXPECT_LE((sa.x.values - sb.x.values).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(GridSearch, NoLatticeNeighbourIsBetter) {
    Market m(load_case(case_path("three_bus.json")));
    const double pitch = 1e-3;
    const std::array<Interval, 3> box{{{0.0, 12.0}, {0.0, 12.0}, {0.0, 12.0}}};
    const PlannerSolution s = grid_search(m.model, m.users, box, pitch);
    for (std::size_t i = 0; i < 3; ++i) {
        for (double step : {-pitch, pitch}) {
            DemandProfile y = s.x;
            y[i] += step;
            EXPECT_GE(planner_cost(m.model, m.users, y), s.cost - 1e-12) << "coordinate " << i;
        }
    }
}

TEST(GridSearch, MultilevelAgreesWithExhaustive) {
    Market m(load_case(case_path("two_bus.json")));
    const std::array<Interval, 2> box{{{3.0, 7.0}, {2.0, 6.0}}};
    GridSearchOptions full;
    full.exhaustive_limit = 1000000;
    GridSearchOptions coarse;
    coarse.exhaustive_limit = 0;
    const PlannerSolution a = grid_search(m.model, m.users, box, 1e-2, full);
    const PlannerSolution b = grid_search(m.model, m.users, box, 1e-2, coarse);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_LT(b.evaluations, a.evaluations);
}

TEST(GridSearch, DegenerateBoxIsItsOwnMinimizer) {
    Market m(single_bus_case(10.0, 8.0));
    const std::array<Interval, 1> box{{{4.0, 4.0}}};
    const PlannerSolution s = grid_search(m.model, m.users, box, 1e-3);
    EXPECT_EQ(s.x[0], 4.0);
    EXPECT_DOUBLE_EQ(s.cost, 16.0 + 40.0);
    EXPECT_EQ(s.evaluations, 1u);
}

TEST(GridSearch, UnservablePointsAreSkipped) {
    // Without the bus 1 generator, x1 may not exceed the 1 MW import limit.
    GridCase c = load_case(case_path("two_bus.json"));
    c.generators.pop_back();
    Market m(c);
    const std::array<Interval, 2> box{{{0.0, 8.0}, {0.0, 8.0}}};
    const PlannerSolution s = grid_search(m.model, m.users, box, 1e-2);
    EXPECT_LE(s.x[1], 1.0 + 1e-12);
    EXPECT_TRUE(std::isfinite(s.cost));

    const std::array<Interval, 2> hopeless{{{0.0, 1.0}, {2.0, 3.0}}};
    EXPECT_THROW(grid_search(m.model, m.users, hopeless, 1e-1), Error);
}

TEST(GridSearch, RejectsBadArguments) {
    Market m(load_case(case_path("ieee14.json")));
    std::vector<Interval> box(14, Interval{0.0, 1.0});
    EXPECT_THROW(grid_search(m.model, m.users, box, 1e-3), UsageError);

    Market one(single_bus_case(10.0, 8.0));
    const std::array<Interval, 1> b{{{0.0, 1.0}}};
    EXPECT_THROW(grid_search(one.model, one.users, b, 0.0), UsageError);
    const std::array<Interval, 1> empty{{{1.0, 0.0}}};
    EXPECT_THROW(grid_search(one.model, one.users, empty, 1e-3), UsageError);
}

TEST(JointLpKkt, Ieee14TerminalPointPasses) {
    Market m(load_case(case_path("ieee14.json")));
    const Trajectory t = run(m.model, m.users, random_prices(m.users.size(), 5.0, 15.0, 5), RunConfig{});
    ASSERT_EQ(t.status, RunStatus::Converged);
    const KktReport r = joint_lp_kkt_check(m.model, m.users, t.terminal().x);
    EXPECT_LE(r.residual, 1e-4);
    EXPECT_EQ(r.probes.size(), 28u);
    EXPECT_TRUE(r.probes_pass());
}

TEST(JointLpKkt, TargetDemandIsNotOptimal) {
    // At x = xbar the disutility gradient vanishes, so the residual is the
    // energy price and shrinking demand lowers C.
    Market m(single_bus_case(10.0, 8.0));
    const KktReport r = joint_lp_kkt_check(m.model, m.users, DemandProfile{8.0});
    EXPECT_NEAR(r.residual, 10.0, 1e-12);
    EXPECT_FALSE(r.probes_pass());
    EXPECT_FALSE(r.probes[0].passed);
    EXPECT_TRUE(r.probes[1].passed);
}

TEST(JointLpKkt, ProbesCertifyKinkOptimum) {
    // Optimum x = 4 sits where the cheap unit runs out: dJ(4) = [5, 10]
    // contains -f'(4) = 8 but neither vertex dual equals it.
    GridCase c = single_bus_case(5.0, 8.0);
    c.generators[0].pmax = 4.0;
    c.generators.push_back({0, 10.0, std::nullopt});
    Market m(c);
    const KktReport r = joint_lp_kkt_check(m.model, m.users, DemandProfile{4.0});
    EXPECT_GE(r.residual, 2.0 - 1e-12);
    EXPECT_TRUE(r.probes_pass());
    EXPECT_NEAR(r.probes[0].delta, 3e-4 + 1e-8, 1e-12);
    EXPECT_NEAR(r.probes[1].delta, 2e-4 + 1e-8, 1e-12);
}
