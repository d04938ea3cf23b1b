#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "mrta/allocation_search.hpp"
#include "mrta/analysis.hpp"
#include "mrta/generator.hpp"
#include "mrta/harness.hpp"
#include "oracles.hpp"

using namespace mrta;
using fixture::allocation;
using fixture::desired;
using fixture::team;

namespace {

struct Bench {
    ProblemDomain domain;
    MotionPlanner planner;
    SearchCounters counters;
    SearchOptions options;

    explicit Bench(ProblemDomain d, double alpha = 0.5)
        : domain(std::move(d)), planner(make_planner(domain, {60, 8, 50, 0})) {
        options.alpha = alpha;
    }
    SearchContext ctx() { return {domain, planner, options, counters}; }
};

ProblemDomain two_robot_domain() {
    return fixture::DomainBuilder({"lift"})
        .robot("r0", {1}, {1, 1})
        .robot("r1", {1}, {2, 1})
        .task("carry", 4, {2}, {10, 10})
        .build();
}

}  // namespace

TEST_CASE("apr") {
    CHECK(apr(Allocation(2, 2), team({{1, 0}, {0, 2}}), desired({{2, 0}, {0, 3}})) == 1.0);
    CHECK(apr(allocation({{1, 1}}), team({{1, 0}, {1, 2}}), desired({{2, 2}})) == 0.0);
    CHECK(apr(allocation({{1, 0}, {0, 1}}), team({{1, 0}, {0, 2}}), desired({{2, 0}, {0, 3}})) ==
          doctest::Approx(0.4));
    CHECK(apr(Allocation(1, 1), team({{1}}), desired({{0}})) == 0.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 3);
    for (int i = 0; i < 200; ++i) {
        const auto q = team({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}});
        const auto y = desired({{u(rng), u(rng)}, {u(rng), u(rng)}});
        Allocation a(2, 3);
        for (std::size_t m = 0; m < 2; ++m)
            for (std::size_t r = 0; r < 3; ++r) a.set(m, r, rng() % 2);
        const double value = apr(a, q, y);
        CHECK(value == doctest::Approx(oracle::apr(a, q.entries, y.entries)));
        CHECK(value >= 0.0);
        CHECK(value <= 1.0);
        CHECK((value == 0.0) == is_valid_allocation(a, q, y));
    }
}

TEST_CASE("nsq and tetaq") {
    CHECK(nsq(10, {10, 50}) == 0.0);
    CHECK(nsq(50, {10, 50}) == 1.0);
    CHECK(nsq(20, {10, 50}) == doctest::Approx(0.25));
    CHECK(nsq(80, {10, 50}) == 1.0);
    CHECK(nsq(5, {10, 10}) == 0.0);
    CHECK(tetaq(0.4, 0.2, 1.0) == 0.4);
    CHECK(tetaq(0.4, 0.2, 0.0) == 0.2);
    CHECK(tetaq(0.4, 0.2, 0.5) == doctest::Approx(0.3));
    CHECK_THROWS_AS(tetaq(0.4, 0.2, 1.5), Error);
    CHECK_THROWS_AS(tetaq(0.4, 0.2, -0.1), Error);
}

TEST_CASE("search state bookkeeping") {
    SearchState state(0.5, {0, 10});
    AllocationNode a;
    a.allocation = Allocation(1, 2);
    a.tetaq = 0.5;
    AllocationNode b;
    b.allocation = allocation({{1, 0}});
    b.tetaq = 0.2;
    AllocationNode c;
    c.allocation = allocation({{0, 1}});
    c.tetaq = 0.2;
    const auto ia = state.add(a, NodeStatus::Open);
    const auto ib = state.add(b, NodeStatus::Open);
    const auto ic = state.add(c, NodeStatus::Open);
    CHECK_THROWS_AS(state.add(c, NodeStatus::Open), Error);
    CHECK(state.root() == ia);
    CHECK(state.find(allocation({{0, 1}})) == ic);
    CHECK(state.open_nodes() == std::vector<NodeId>{ib, ic, ia});  // tie goes to insertion order
    CHECK(state.pop_open() == ib);
    CHECK(state.closed_nodes().count(ib));
    state.set_status(ic, NodeStatus::Pruned);
    CHECK(state.pruned_nodes().count(ic));
    CHECK(state.open_size() == 1);
    state.remove(ic);
    CHECK_FALSE(state.find(allocation({{0, 1}})));
    CHECK(state.size() == 2);
    const auto before = state.mutations();
    (void)state.open_nodes();
    (void)state.node(ia);
    CHECK(state.mutations() == before);
}

TEST_CASE("expansion") {
    auto d = fixture::DomainBuilder({"lift"})
                 .robot("r0", {1}, {1, 1})
                 .robot("r1", {1}, {2, 1})
                 .robot("r2", {1}, {3, 1})
                 .task("a", 4, {1}, {10, 10})
                 .task("b", 4, {1}, {12, 10})
                 .build();
    Bench bench(d);
    auto ctx = bench.ctx();
    auto state = make_initial_state(ctx);
    const auto root = *state.root();
    CHECK(state.node(root).apr == 1.0);
    CHECK(state.pop_open() == root);
    const auto children = expand(root, state, ctx);
    CHECK(children.size() == 6);
    for (const auto id : children) {
        CHECK(state.node(id).allocation.count() == 1);
        CHECK(state.node(id).parent == root);
        const auto& n = state.node(id);
        CHECK(n.tetaq == doctest::Approx(0.5 * n.apr + 0.5 * n.nsq).epsilon(1e-12));
    }
    // Two assignment orders reach the same allocation once.
    const auto first = children[0];
    CHECK(state.pop_open());
    const auto grandchildren = expand(first, state, ctx);
    CHECK(grandchildren.size() == 5);
    std::size_t created_later = 0;
    for (const auto id : children) {
        if (id == first) continue;
        const auto seen_before = state.size();
        created_later += expand(id, state, ctx).size();
        CHECK(state.size() >= seen_before);
    }
    // 15 distinct two-assignment allocations exist; all of them are created exactly once.
    CHECK(grandchildren.size() + created_later == 15);
}

TEST_CASE("unreachable task sites are pruned at expansion") {
    auto d = fixture::DomainBuilder({"lift"})
                 .robot("left", {1}, {3, 10})
                 .robot("right", {1}, {17, 10})
                 .task("far", 2, {1}, {16, 4})
                 .obstacle(Rect{{9, -1}, {11, 21}})
                 .build();
    Bench bench(d);
    auto ctx = bench.ctx();
    auto state = make_initial_state(ctx);
    const auto root = *state.pop_open();
    expand(root, state, ctx);
    const auto left = state.find(allocation({{1, 0}}));
    const auto right = state.find(allocation({{0, 1}}));
    REQUIRE(left);
    REQUIRE(right);
    CHECK(state.node(*left).status == NodeStatus::Pruned);
    CHECK(state.node(*right).status == NodeStatus::Open);
    CHECK(oracle::grid_reachable(d.world, {17, 10}, {16, 4}));
    CHECK_FALSE(oracle::grid_reachable(d.world, {3, 10}, {16, 4}));
}

TEST_CASE("search examples") {
    SUBCASE("nothing required: the empty allocation is the answer") {
        auto d = fixture::DomainBuilder({"lift"}).robot("r0", {1}, {1, 1}).task("a", 3, {0}, {5, 5}).build();
        Bench bench(d);
        const auto out = search(bench.domain, bench.planner, bench.options);
        REQUIRE(out.result.status == SearchStatus::Solved);
        CHECK(out.result.solution->allocation.count() == 0);
        CHECK(out.result.solution->schedule.makespan == doctest::Approx(3.0));
    }
    SUBCASE("no tasks at all") {
        auto d = fixture::DomainBuilder({"lift"}).robot("r0", {1}, {1, 1}).build();
        Bench bench(d);
        const auto out = search(bench.domain, bench.planner, bench.options);
        REQUIRE(out.result.status == SearchStatus::Solved);
        CHECK(out.result.solution->schedule.makespan == 0.0);
    }
    SUBCASE("the only capable robot is chosen") {
        auto d = fixture::DomainBuilder({"lift"}).robot("r0", {1}, {1, 1}).task("a", 3, {1}, {5, 5}).build();
        Bench bench(d);
        const auto out = search(bench.domain, bench.planner, bench.options);
        REQUIRE(out.result.solution);
        CHECK(resource_count(out.result.solution->allocation) == 1);
    }
    SUBCASE("two weak robots together") {
        Bench bench(two_robot_domain());
        const auto out = search(bench.domain, bench.planner, bench.options);
        REQUIRE(out.result.solution);
        CHECK(out.result.solution->allocation == allocation({{1, 1}}));
        CHECK(solution_issues(bench.domain, *out.result.solution, bench.planner).empty());
    }
    SUBCASE("unsatisfiable requirements empty the open set") {
        auto d = fixture::DomainBuilder({"lift"}).robot("r0", {1}, {1, 1}).task("a", 3, {2}, {5, 5}).build();
        Bench bench(d);
        const auto out = search(bench.domain, bench.planner, bench.options);
        CHECK(out.result.status == SearchStatus::NoSolution);
        CHECK(out.state.open_size() == 0);
    }
    SUBCASE("the expansion limit is reported separately") {
        Bench bench(two_robot_domain());
        bench.options.limits.max_expansions = 1;
        const auto out = search(bench.domain, bench.planner, bench.options);
        CHECK(out.result.status == SearchStatus::LimitReached);
        CHECK(out.state.open_size() > 0);
    }
}

TEST_CASE("solutions carry a motion plan for every transition") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        GeneratorParams gp;
        gp.robots = 3;
        gp.tasks = 4;
        const auto d = generate_problem(seed, gp);
        Bench bench(d);
        const auto out = search(bench.domain, bench.planner, bench.options);
        REQUIRE(out.result.solution);
        const auto& sol = *out.result.solution;
        CHECK(solution_issues(d, sol, bench.planner).empty());
        const auto problem = solution_scheduling_problem(d, sol);
        CHECK(oracle::satisfies(problem, sol.schedule.start_times, sol.schedule.makespan));
        for (const auto& [key, plan] : sol.motion_plans) CHECK(oracle::dense_path_free(d.world, plan.waypoints));
        // The schedule is optimal for its own allocation under planned travel.
        CHECK(sol.schedule.makespan == doctest::Approx(oracle::brute_force_makespan(problem).value()));
    }
}

TEST_CASE("every edge keeps apr from rising and nsq from falling") {
    std::size_t edges = 0;
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        GeneratorParams gp;
        gp.robots = 3;
        gp.tasks = 4;
        Bench bench(generate_problem(seed, gp), 0.3);
        bench.options.on_child = [&](const AllocationNode& parent, const AllocationNode& child) {
            ++edges;
            CHECK(child.apr <= parent.apr + 1e-12);
            CHECK(child.nsq >= parent.nsq - 1e-9);
            CHECK(child.allocation.count() == parent.allocation.count() + 1);
        };
        const auto out = search(bench.domain, bench.planner, bench.options);
        CHECK(out.result.status == SearchStatus::Solved);
    }
    CHECK(edges > 0);
}

TEST_CASE("search is deterministic") {
    GeneratorParams gp;
    gp.robots = 4;
    gp.tasks = 5;
    const auto d = generate_problem(77, gp);
    Bench a(d);
    Bench b(d);
    const auto x = search(a.domain, a.planner, a.options);
    const auto y = search(b.domain, b.planner, b.options);
    REQUIRE(x.result.solution);
    REQUIRE(y.result.solution);
    CHECK(x.result.solution->allocation == y.result.solution->allocation);
    CHECK(x.result.solution->schedule.start_times == y.result.solution->schedule.start_times);
    CHECK(x.result.counters.expansions == y.result.counters.expansions);
}

TEST_CASE("open, closed and pruned sets stay disjoint") {
    GeneratorParams gp;
    gp.robots = 3;
    gp.tasks = 3;
    Bench bench(generate_problem(5, gp));
    const auto out = search(bench.domain, bench.planner, bench.options);
    std::set<NodeId> seen;
    for (const auto id : out.state.open_nodes()) CHECK(seen.insert(id).second);
    for (const auto id : out.state.closed_nodes()) CHECK(seen.insert(id).second);
    for (const auto id : out.state.pruned_nodes()) CHECK(seen.insert(id).second);
    CHECK(seen.size() == out.state.size());
}
