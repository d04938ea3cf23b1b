#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "mrta/harness.hpp"

using namespace mrta;

TEST_CASE("time optimality bound") {
    CHECK(time_optimality_bound(0.0, 10, 50) == 0.0);
    CHECK(time_optimality_bound(0.25, 10, 50) == doctest::Approx(40.0 / 3.0));
    CHECK(time_optimality_bound(1.0 / 3.0, 10, 50) == doctest::Approx(20.0));
    CHECK_THROWS_WITH_AS(time_optimality_bound(0.5, 10, 50), doctest::Contains("loses significance"), Error);
    CHECK_THROWS_AS(time_optimality_bound(0.7, 10, 50), Error);
    CHECK_THROWS_AS(time_optimality_bound(-0.1, 10, 50), Error);
}

TEST_CASE("post-hoc bound") {
    CHECK(posthoc_bound(0.25, 10, 50, 0.0) == 0.0);
    CHECK(posthoc_bound(0.25, 10, 50, 1.0) == time_optimality_bound(0.25, 10, 50));
    CHECK(posthoc_bound(0.25, 10, 50, 0.5) == doctest::Approx(20.0 / 3.0));
    CHECK_THROWS_AS(posthoc_bound(0.25, 10, 50, 1.5), Error);
    for (double a = 0.0; a < 0.5; a += 0.05)
        for (double m = 0.0; m <= 1.0; m += 0.1) CHECK(posthoc_bound(a, 3, 80, m) <= time_optimality_bound(a, 3, 80));
}

TEST_CASE("brute-force optimum") {
    SUBCASE("nothing required and no tasks") {
        auto d = fixture::DomainBuilder({"t"}).robot("r", {1}, {1, 1}).build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(brute_force_optimal_makespan(d, planner) == 0.0);
        CHECK(brute_force_min_assignments(d, planner) == std::size_t{0});
    }
    SUBCASE("one robot, one task at its start") {
        auto d = fixture::DomainBuilder({"t"}).robot("r", {1}, {4, 4}).task("a", 5, {1}, {4, 4}).build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(brute_force_optimal_makespan(d, planner) == doctest::Approx(5.0));
        CHECK(brute_force_min_assignments(d, planner) == std::size_t{1});
    }
    SUBCASE("two robots run two tasks in parallel") {
        auto d = fixture::DomainBuilder({"t"})
                     .robot("r0", {1}, {4, 4})
                     .robot("r1", {1}, {8, 8})
                     .task("a", 4, {1}, {4, 4})
                     .task("b", 4, {1}, {8, 8})
                     .build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(brute_force_optimal_makespan(d, planner) == doctest::Approx(4.0));
    }
    SUBCASE("two weak robots are both needed") {
        auto d = fixture::DomainBuilder({"t"})
                     .robot("r0", {1}, {4, 4})
                     .robot("r1", {1}, {8, 8})
                     .task("a", 4, {2}, {4, 4})
                     .build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(brute_force_min_assignments(d, planner) == std::size_t{2});
    }
    SUBCASE("a strong robot alone suffices") {
        auto d = fixture::DomainBuilder({"t"}).robot("r0", {5}, {4, 4}).task("a", 4, {1}, {4, 4}).build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(brute_force_min_assignments(d, planner) == std::size_t{1});
    }
    SUBCASE("no valid allocation") {
        auto d = fixture::DomainBuilder({"t"}).robot("r0", {1}, {4, 4}).task("a", 4, {3}, {4, 4}).build();
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK(std::isinf(brute_force_optimal_makespan(d, planner)));
        CHECK_FALSE(brute_force_min_assignments(d, planner));
    }
    SUBCASE("size guard") {
        GeneratorParams gp;
        gp.robots = 4;
        gp.tasks = 4;
        const auto d = generate_problem(1, gp);
        auto planner = make_planner(d, {30, 8, 50, 0});
        CHECK_THROWS_AS(brute_force_optimal_makespan(d, planner), Error);
        CHECK_THROWS_AS(brute_force_min_assignments(d, planner), Error);
    }
}

TEST_CASE("greedy descent ties") {
    // A robot covering half of each trait ties with nothing; the two specialists tie.
    auto tied = fixture::DomainBuilder({"a", "b"})
                    .robot("A", {2, 0}, {1, 1})
                    .robot("B", {0, 2}, {2, 1})
                    .task("x", 1, {2, 2}, {5, 5})
                    .build();
    CHECK_FALSE(unique_apr_descent(tied));
    auto unique = fixture::DomainBuilder({"a", "b"})
                      .robot("A", {2, 0}, {1, 1})
                      .robot("B", {0, 3}, {2, 1})
                      .task("x", 1, {2, 3}, {5, 5})
                      .build();
    CHECK(unique_apr_descent(unique));
}

TEST_CASE("validating the bound") {
    SUBCASE("a single valid allocation has no gap") {
        auto d = fixture::DomainBuilder({"t"})
                     .robot("r0", {1}, {2, 2})
                     .robot("r1", {1}, {9, 3})
                     .task("a", 4, {2}, {6, 6})
                     .build();
        auto planner = make_planner(d, {60, 8, 50, 0});
        for (const double alpha : {0.0, 0.2, 0.45}) {
            const auto v = validate_bound(d, alpha, planner);
            CHECK(v.report.gap() == doctest::Approx(0.0));
            CHECK(v.report.respects_apriori());
            CHECK(v.report.respects_posthoc());
        }
    }
    SUBCASE("alpha zero finds the optimum on generated problems") {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            GeneratorParams gp;
            gp.robots = 3;
            gp.tasks = 3;
            const auto d = generate_problem(seed, gp);
            auto planner = make_planner(d, {80, 8, 50, seed});
            const auto v = validate_bound(d, 0.0, planner);
            CHECK(v.report.normalized_gap == doctest::Approx(0.0).epsilon(1e-9));
            CHECK(v.report.apriori_bound == 0.0);
            CHECK(v.report.posthoc_bound <= v.report.apriori_bound);
        }
    }
}

TEST_CASE("bound csv row") {
    BoundReport r;
    r.alpha = 0.25;
    r.optimal_makespan = 10;
    r.achieved_makespan = 12;
    r.lb = 5;
    r.ub = 45;
    r.apriori_bound = 40.0 / 3.0;
    r.posthoc_bound = 20.0 / 3.0;
    r.min_open_apr = 0.5;
    r.normalized_gap = 0.05;
    std::ostringstream out;
    write_bound_row(out, r);
    CHECK(out.str().rfind("0.25,10,12,5,45,", 0) == 0);
    CHECK(std::string(kBoundCsvHeader) == "alpha,optimal,achieved,lb,ub,bound_eq6,bound_eq14,min_open_apr,gap_normalized");
}
