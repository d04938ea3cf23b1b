#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mrta/harness.hpp"
#include "mrta/problem_io.hpp"

using namespace mrta;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Drops the wall_time_ms column.
std::string without_timing(const std::string& csv) {
    std::stringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        cells.erase(cells.begin() + 4);
        for (const auto& c : cells) out += c + ",";
        out += "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("generator") {
    GeneratorParams gp;
    gp.robots = 4;
    gp.tasks = 6;
    SUBCASE("same seed, same problem") {
        CHECK(io::problem_to_json(generate_problem(3, gp)).dump() == io::problem_to_json(generate_problem(3, gp)).dump());
        CHECK_FALSE(generate_problem(3, gp) == generate_problem(4, gp));
    }
    SUBCASE("one robot, one task") {
        gp.robots = 1;
        gp.tasks = 1;
        const auto d = generate_problem(0, gp);
        auto planner = make_planner(d, {60, 8, 50, 0});
        SearchOptions options;
        CHECK(search(d, planner, options).result.status == SearchStatus::Solved);
    }
    SUBCASE("generated problems validate and are solvable") {
        gp.robots = 3;
        gp.tasks = 4;
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            const auto d = generate_problem(seed, gp);
            CHECK(validate_problem(d).ok());
            auto planner = make_planner(d, {60, 8, 50, 0});
            CHECK(brute_force_min_assignments(d, planner).has_value());
        }
    }
    SUBCASE("zero counts rejected") {
        gp.tasks = 0;
        CHECK_THROWS_AS(generate_problem(0, gp), Error);
    }
    SUBCASE("events stay satisfiable") {
        const auto d = generate_problem(8, gp);
        for (const auto kind : kAllEventKinds) {
            for (std::uint64_t s = 0; s < 5; ++s) {
                const auto e = generate_event(s, d, kind, 1);
                CHECK(e.kind() == kind);
                const auto next = apply_event(d, e);
                CHECK(requirements_satisfiable(next.team, next.requirements));
            }
        }
        const auto mixed = generate_mixed_trait_change(1, d, 2);
        CHECK(mixed.size() == 2);
        const auto seq = generate_event_sequence(2, d, 5);
        CHECK(seq.size() == 5);
        ProblemDomain cur = d;
        for (const auto& e : seq) cur = apply_event(cur, e);
    }
}

TEST_CASE("scenario runs") {
    GeneratorParams gp;
    gp.robots = 4;
    gp.tasks = 5;
    const auto d = generate_problem(21, gp);
    ScenarioConfig cfg;
    cfg.repetitions = 1;
    cfg.roadmap = {80, 8, 50, 0};

    SUBCASE("no events: one solve, both modes agree") {
        const auto r = run_scenario(d, {}, cfg);
        REQUIRE(r.records.size() == 2);
        CHECK(r.records[0].makespan == r.records[1].makespan);
        CHECK(r.records[0].resource_count == r.records[1].resource_count);
        CHECK(r.all_valid());
    }
    SUBCASE("both modes see the same events") {
        const auto events = generate_event_sequence(4, d, 4);
        const auto r = run_scenario(d, events, cfg);
        std::vector<std::string> repair, recompute;
        for (const auto& rec : r.records) {
            (rec.mode == "repair" ? repair : recompute).push_back(std::to_string(rec.step) + rec.event);
            CHECK(rec.valid);
        }
        CHECK(repair == recompute);
        CHECK(repair.size() == 5);
    }
    SUBCASE("single modes") {
        cfg.mode = RunMode::Repair;
        const auto events = generate_event_sequence(5, d, 2);
        for (const auto& rec : run_scenario(d, events, cfg).records) CHECK(rec.mode == "repair");
        cfg.mode = RunMode::Recompute;
        for (const auto& rec : run_scenario(d, events, cfg).records) CHECK(rec.mode == "recompute");
    }
    SUBCASE("outputs are deterministic apart from timing") {
        const auto events = generate_event_sequence(6, d, 3);
        const auto dir = std::filesystem::temp_directory_path() / "mrta_harness_test";
        write_scenario_outputs(dir / "a", run_scenario(d, events, cfg));
        write_scenario_outputs(dir / "b", run_scenario(d, events, cfg));
        const auto a = slurp(dir / "a" / "results.csv");
        CHECK(a.rfind(kScenarioCsvHeader, 0) == 0);
        CHECK(without_timing(a) == without_timing(slurp(dir / "b" / "results.csv")));
        CHECK(std::filesystem::exists(dir / "a" / "results.json"));
        CHECK(std::filesystem::exists(dir / "a" / "summary.txt"));
        std::filesystem::remove_all(dir);
    }
    SUBCASE("mode names") {
        CHECK(run_mode_from_string("both") == RunMode::Both);
        CHECK_THROWS_AS(run_mode_from_string("fast"), Error);
    }
}

TEST_CASE("unsolvable scenario raises") {
    auto d = fixture::DomainBuilder({"t"}).robot("r", {1}, {1, 1}).task("a", 2, {2}, {5, 5}).build();
    ScenarioConfig cfg;
    cfg.repetitions = 1;
    cfg.roadmap = {40, 8, 50, 0};
    CHECK_THROWS_AS(run_scenario(d, {}, cfg), SearchExhausted);
}

TEST_CASE("bounds sweep") {
    GeneratorParams gp;
    gp.robots = 3;
    gp.tasks = 3;
    std::vector<std::pair<std::string, ProblemDomain>> problems{{"p0", generate_problem(0, gp)},
                                                                {"p1", generate_problem(1, gp)}};
    SUBCASE("alpha zero gives zero gaps") {
        const auto r = run_bounds_sweep(problems, {0.0}, {60, 8, 50, 0});
        REQUIRE(r.rows.size() == 2);
        for (const auto& row : r.rows) CHECK(row.report.normalized_gap == doctest::Approx(0.0));
        CHECK(r.violations() == 0);
    }
    SUBCASE("alpha at one half is rejected") {
        CHECK_THROWS_WITH_AS(run_bounds_sweep(problems, {0.1, 0.5}, {60, 8, 50, 0}),
                             doctest::Contains("loses significance"), Error);
    }
    SUBCASE("outputs") {
        const auto r = run_bounds_sweep(problems, {0.0, 0.3}, {60, 8, 50, 0});
        const auto dir = std::filesystem::temp_directory_path() / "mrta_sweep_test";
        write_sweep_outputs(dir, r);
        const auto csv = slurp(dir / "results.csv");
        CHECK(csv.rfind("alpha,optimal,achieved,lb,ub,bound_eq6,bound_eq14,min_open_apr,gap_normalized\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("guard") {
        GeneratorParams big;
        big.robots = 4;
        big.tasks = 4;
        CHECK_THROWS_AS(run_bounds_sweep({{"big", generate_problem(0, big)}}, {0.0}, {60, 8, 50, 0}), Error);
    }
}
