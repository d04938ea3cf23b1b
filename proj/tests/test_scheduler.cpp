#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "fixtures.hpp"
#include "mrta/motion_planner.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace mrta;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SchedulingProblem problem(std::vector<double> d) {
    auto p = SchedulingProblem::with_tasks(d.size());
    p.durations = std::move(d);
    return p;
}

// Start times on a 0.5 s grid that satisfy every constraint, minimizing the makespan.
double grid_search(const SchedulingProblem& p, double horizon) {
    const std::size_t n = p.num_tasks();
    const auto steps = static_cast<std::size_t>(horizon / 0.5) + 1;
    std::vector<double> s(n, 0.0);
    double best = kInf;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            double c = 0.0;
            for (std::size_t k = 0; k < n; ++k) c = std::max(c, s[k] + p.durations[k]);
            if (oracle::satisfies(p, s, c)) best = std::min(best, c);
            return;
        }
        for (std::size_t k = 0; k < steps; ++k) {
            s[i] = 0.5 * static_cast<double>(k);
            rec(i + 1);
        }
    };
    rec(0);
    return best;
}

struct TableTravel final : TravelTimeProvider {
    std::map<std::tuple<std::size_t, Point, Point>, double> table;
    double fallback = 1.0;
    std::optional<double> travel_time(std::size_t robot, Point from, Point to) override {
        if (from == to) return 0.0;
        const auto it = table.find({robot, from, to});
        return it == table.end() ? fallback : it->second;
    }
};

}  // namespace

TEST_CASE("stn solve examples") {
    SUBCASE("single task") {
        const auto s = stn_solve(problem({5}), {});
        REQUIRE(s);
        CHECK(s->start_times[0] == 0.0);
        CHECK(s->makespan == 5.0);
    }
    SUBCASE("precedence with travel") {
        auto p = problem({2, 3});
        p.precedence = {{0, 1}};
        p.set_x(0, 1, 1);
        const auto s = stn_solve(p, {});
        REQUIRE(s);
        CHECK(s->start_times == std::vector<double>{0, 3});
        CHECK(s->makespan == 6.0);
        CHECK(grid_search(p, 8) == doctest::Approx(6.0));
    }
    SUBCASE("cyclic orientations are infeasible") {
        auto p = problem({1, 1});
        p.precedence = {{0, 1}};
        p.mutex_reduced = {{0, 1}};
        const Ordering back[] = {Ordering::SecondBeforeFirst};
        CHECK_FALSE(stn_solve(p, back));
    }
    SUBCASE("wrong number of orderings") {
        auto p = problem({1, 1});
        p.mutex_reduced = {{0, 1}};
        CHECK_THROWS_AS(stn_solve(p, std::vector<Ordering>{}), Error);
    }
    SUBCASE("unreachable transition") {
        auto p = problem({1});
        p.initial_arrival[0] = kInf;
        CHECK_FALSE(stn_solve(p, {}));
    }
}

TEST_CASE("solve schedule examples") {
    SUBCASE("no mutex pairs matches the stn") {
        auto p = problem({2, 3, 1});
        p.precedence = {{0, 2}};
        p.set_x(0, 2, 4);
        CHECK(solve_schedule(p)->makespan == stn_solve(p, {})->makespan);
    }
    SUBCASE("two mutex tasks in either order") {
        auto p = problem({4, 1});
        p.mutex_reduced = {{0, 1}};
        CHECK(solve_schedule(p)->makespan == doctest::Approx(5.0));
        CHECK(oracle::brute_force_makespan(p).value() == doctest::Approx(5.0));
    }
    SUBCASE("asymmetric travel picks the cheap order") {
        auto p = problem({2, 2});
        p.mutex_reduced = {{0, 1}};
        p.set_x(0, 1, 0);
        p.set_x(1, 0, 10);
        const auto s = solve_schedule(p);
        REQUIRE(s);
        CHECK(s->makespan == doctest::Approx(4.0));
        CHECK(s->orderings == std::vector<Ordering>{Ordering::FirstBeforeSecond});
        CHECK(grid_search(p, 6) == doctest::Approx(4.0));
    }
}

TEST_CASE("makespan and analytic bounds") {
    CHECK(makespan(std::vector<double>{}, std::vector<double>{}) == 0.0);
    CHECK(makespan(std::vector<double>{0, 3}, std::vector<double>{2, 3}) == 6.0);
    CHECK(makespan(std::vector<double>{0, 0}, std::vector<double>{5, 1}) == 5.0);

    auto d = fixture::DomainBuilder({"a"}).robot("r", {1}, {0, 0}, 1.0).build();
    CHECK(schedule_upper_bound(d, 10.0) == 0.0);
    d = fixture::DomainBuilder({"a"})
            .robot("r", {1}, {0, 0}, 1.0)
            .task("x", 3, {0}, {1, 1})
            .task("y", 4, {0}, {2, 2})
            .build();
    CHECK(schedule_upper_bound(d, 10.0) == doctest::Approx(47.0));
    d.world.robot_speeds["r"] = 2.0;
    CHECK(schedule_upper_bound(d, 10.0) == doctest::Approx(27.0));
    // Without a roadmap the path bound is the perimeter times the task count.
    CHECK(schedule_upper_bound(d, std::nullopt) == doctest::Approx(2.0 * 2 * (80.0 * 2) / 2.0 + 7));
    CHECK(schedule_lower_bound(d) == 4.0);

    auto empty = fixture::DomainBuilder({"a"}).task("x", 3, {0}, {1, 1}).build();
    CHECK_THROWS_AS(schedule_upper_bound(empty, 1.0), Error);
    CHECK(schedule_lower_bound(fixture::DomainBuilder({"a"}).build()) == 0.0);
    auto three = fixture::DomainBuilder({"a"})
                     .task("x", 3, {0}, {1, 1})
                     .task("y", 7, {0}, {1, 1})
                     .task("z", 2, {0}, {1, 1})
                     .build();
    CHECK(schedule_lower_bound(three) == 7.0);
}

TEST_CASE("building the scheduling problem") {
    auto d = fixture::DomainBuilder({"a"})
                 .robot("r0", {1}, {0, 0})
                 .robot("r1", {1}, {10, 0})
                 .task("x", 2, {1}, {3, 4})
                 .task("y", 2, {1}, {6, 8}, Point{6, 0})
                 .task("z", 2, {1}, {0, 5})
                 .build();
    EuclideanTravel travel(d, nullptr);

    SUBCASE("empty allocation") {
        d.network.mutex_edges = {{0, 1}, {1, 2}};
        d.network.precedence_edges = {{0, 1}};
        const auto p = build_scheduling_problem(d, Allocation(3, 2), travel);
        CHECK(p.mutex_reduced == std::vector<TaskPair>{{1, 2}});
        CHECK(p.initial_arrival == std::vector<double>{0, 0, 0});
    }
    SUBCASE("a shared robot induces a mutex") {
        const auto p = build_scheduling_problem(d, fixture::allocation({{1, 0}, {1, 0}, {0, 0}}), travel);
        CHECK(p.mutex_reduced == std::vector<TaskPair>{{0, 1}});
        CHECK(p.initial_arrival[0] == doctest::Approx(5.0));
        CHECK(p.x(0, 1) == doctest::Approx(distance({3, 4}, {6, 8})));
        CHECK(p.x(1, 0) == doctest::Approx(distance({6, 0}, {3, 4})));
        // Brute force: both tasks on one robot can never overlap in the optimum.
        const auto s = solve_schedule(p);
        REQUIRE(s);
        const bool apart = s->start_times[1] >= s->start_times[0] + 2 - 1e-9 ||
                           s->start_times[0] >= s->start_times[1] + 2 - 1e-9;
        CHECK(apart);
    }
    SUBCASE("mutex also ordered by precedence is dropped, transitively too") {
        d.network.mutex_edges = {{0, 2}};
        d.network.precedence_edges = {{0, 1}, {1, 2}};
        const auto p = build_scheduling_problem(d, Allocation(3, 2), travel);
        CHECK(p.mutex_reduced.empty());
    }
    SUBCASE("arrival is the slowest assigned robot") {
        d.world.robot_speeds["r1"] = 0.5;
        const auto p = build_scheduling_problem(d, fixture::allocation({{1, 1}, {0, 0}, {0, 0}}), travel);
        CHECK(p.initial_arrival[0] == doctest::Approx(distance({10, 0}, {3, 4}) / 0.5));
    }
    SUBCASE("transition is the max over shared robots") {
        TableTravel table;
        table.table[{0, Point{3, 4}, Point{6, 8}}] = 2.0;
        table.table[{1, Point{3, 4}, Point{6, 8}}] = 7.0;
        const auto p = build_scheduling_problem(d, fixture::allocation({{1, 1}, {1, 1}, {0, 0}}), table);
        CHECK(p.x(0, 1) == 7.0);
    }
}

TEST_CASE("branch and bound equals brute force on random instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = fixture::random_scheduling_problem(rng, 7, 6);
        const auto got = solve_schedule(p);
        const auto want = oracle::brute_force_makespan(p);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        CHECK(got->makespan == doctest::Approx(*want).epsilon(1e-12));
        CHECK(oracle::satisfies(p, got->start_times, got->makespan));
        CHECK(schedule_violations(p, *got).empty());
    }
}

TEST_CASE("relaxation never exceeds the optimum") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = fixture::random_scheduling_problem(rng, 6, 5);
        const auto opt = solve_schedule(p);
        if (!opt) continue;
        std::vector<Ordering> partial(p.mutex_reduced.size(), Ordering::Undecided);
        for (std::size_t k = 0; k < partial.size(); ++k)
            if (rng() % 2) partial[k] = opt->orderings[k];
        const auto relaxed = stn_solve(p, partial);
        REQUIRE(relaxed);
        CHECK(relaxed->makespan <= opt->makespan + 1e-9);
    }
}

TEST_CASE("adding constraints never shortens the optimum") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = fixture::random_scheduling_problem(rng, 6, 4);
        const auto before = solve_schedule(p);
        if (!before) continue;
        auto q = p;
        const auto i = rng() % p.num_tasks();
        q.durations[i] += 3.0;
        const auto j = rng() % p.num_tasks();
        q.set_x(i, j, q.x(i, j) + 2.0);
        const auto after = solve_schedule(q);
        REQUIRE(after);
        CHECK(after->makespan >= before->makespan - 1e-9);
    }
}

TEST_CASE("zero durations and zero travel allow simultaneous starts") {
    auto p = problem({0, 0, 0});
    p.mutex_reduced = {{0, 1}, {1, 2}, {0, 2}};
    const auto s = solve_schedule(p);
    REQUIRE(s);
    CHECK(s->makespan == 0.0);
}

TEST_CASE("violations are reported") {
    auto p = problem({2, 3});
    p.precedence = {{0, 1}};
    Schedule bad{{0, 1}, 4, {}};
    CHECK_FALSE(schedule_violations(p, bad).empty());
}
