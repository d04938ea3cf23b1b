#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mrta/harness.hpp"
#include "mrta/problem_io.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidSolution = 1, kBadInput = 2, kExhausted = 3 };

struct Common {
    std::uint64_t seed = 0;
    std::vector<double> alpha{0.5};
    std::string out;
    std::size_t prm_samples = 200;
    std::size_t prm_k = 8;

    [[nodiscard]] mrta::RoadmapParams roadmap() const {
        mrta::RoadmapParams p;
        p.samples = prm_samples;
        p.k_neighbors = prm_k;
        p.seed = seed;
        return p;
    }
    [[nodiscard]] double single_alpha() const {
        if (alpha.size() != 1) throw mrta::Error("this command takes a single --alpha value");
        return alpha.front();
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
    cmd->add_option("--alpha", c.alpha, "trade-off weight in [0, 1]; bounds takes a comma list")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--out", c.out, "output directory")->required();
    cmd->add_option("--prm-samples", c.prm_samples, "roadmap samples")->capture_default_str();
    cmd->add_option("--prm-k", c.prm_k, "roadmap neighbors per vertex")->capture_default_str();
}

void fail(const std::string& kind, const std::string& message) {
    nlohmann::json err{{"error", kind}, {"message", message}};
    std::cerr << err.dump() << '\n';
}

int cmd_solve(const Common& c, const std::string& problem_path) {
    const auto domain = mrta::io::load_problem(problem_path);
    const auto report = mrta::validate_problem(domain);
    if (!report.ok()) throw mrta::io::ParseError("problem failed validation: " +
                                                 std::string(mrta::to_string(report.issues.front().code)));
    mrta::ScenarioConfig cfg;
    cfg.mode = mrta::RunMode::Recompute;
    cfg.alpha = c.single_alpha();
    cfg.roadmap = c.roadmap();
    const auto result = mrta::run_scenario(domain, {}, cfg);
    mrta::write_scenario_outputs(c.out, result);

    auto planner = mrta::make_planner(domain, cfg.roadmap);
    mrta::SearchOptions options;
    options.alpha = cfg.alpha;
    const auto outcome = mrta::search(domain, planner, options);
    mrta::io::write_json(std::filesystem::path(c.out) / "solution.json",
                         mrta::solution_to_json(domain, *outcome.result.solution));
    return result.all_valid() ? kOk : kInvalidSolution;
}

int cmd_scenario(const Common& c, const std::string& problem_path, const std::string& scenario_path,
                 const std::string& mode, std::size_t reps) {
    const auto domain = mrta::io::load_problem(problem_path);
    const auto events = mrta::io::load_scenario(scenario_path, domain);
    mrta::ScenarioConfig cfg;
    cfg.mode = mrta::run_mode_from_string(mode);
    cfg.alpha = c.single_alpha();
    cfg.roadmap = c.roadmap();
    cfg.repetitions = reps;
    const auto result = mrta::run_scenario(domain, events, cfg);
    mrta::write_scenario_outputs(c.out, result);
    return result.all_valid() ? kOk : kInvalidSolution;
}

int cmd_bounds(const Common& c, const std::vector<std::string>& problem_paths,
               const mrta::GeneratorParams& gen, std::size_t count) {
    mrta::check_sweep_alphas(c.alpha);
    std::vector<std::pair<std::string, mrta::ProblemDomain>> problems;
    for (const auto& path : problem_paths) problems.emplace_back(path, mrta::io::load_problem(path));
    if (problems.empty()) {
        for (std::size_t i = 0; i < count; ++i) {
            problems.emplace_back("generated-" + std::to_string(i), mrta::generate_problem(c.seed + i, gen));
        }
    }
    const auto result = mrta::run_bounds_sweep(problems, c.alpha, c.roadmap());
    mrta::write_sweep_outputs(c.out, result);
    return result.violations() == 0 ? kOk : kInvalidSolution;
}

int cmd_gen(const Common& c, const mrta::GeneratorParams& gen, std::size_t events) {
    const auto domain = mrta::generate_problem(c.seed, gen);
    const std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    mrta::io::save_problem(dir / "problem.json", domain);
    mrta::io::save_scenario(dir / "scenario.json",
                            mrta::generate_event_sequence(c.seed + 1, domain, events), domain);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-robot task allocation with targeted repair"};
    app.require_subcommand(1);

    Common solve_opts, scenario_opts, bounds_opts, gen_opts;
    std::string problem, scenario, mode = "both";
    std::vector<std::string> problems;
    std::size_t reps = 3, count = 10, events = 0;
    mrta::GeneratorParams bounds_gen, gen_params;

    auto* solve = app.add_subcommand("solve", "solve one problem");
    add_common(solve, solve_opts);
    solve->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run-scenario", "solve a problem, then respond to scripted events");
    add_common(run, scenario_opts);
    run->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "repair, recompute or both")->capture_default_str();
    run->add_option("--repetitions", reps, "timed runs per solve (median reported)")->capture_default_str();

    auto add_gen = [](CLI::App* cmd, mrta::GeneratorParams& g) {
        cmd->add_option("--robots", g.robots)->capture_default_str();
        cmd->add_option("--tasks", g.tasks)->capture_default_str();
        cmd->add_option("--traits", g.traits)->capture_default_str();
        cmd->add_option("--width", g.world.width)->capture_default_str();
        cmd->add_option("--height", g.world.height)->capture_default_str();
        cmd->add_option("--obstacles", g.world.obstacles)->capture_default_str();
    };

    auto* bounds = app.add_subcommand("bounds", "compare achieved makespans with the optimum and its bounds");
    add_common(bounds, bounds_opts);
    bounds_opts.alpha = {0.0, 0.1, 0.2, 0.3, 0.4, 0.45};
    bounds->add_option("--problem", problems, "problem JSON files (default: generate)")->check(CLI::ExistingFile);
    bounds->add_option("--count", count, "generated problems")->capture_default_str();
    add_gen(bounds, bounds_gen);

    auto* gen = app.add_subcommand("gen", "generate a random problem and scenario");
    add_common(gen, gen_opts);
    gen_params.robots = 8;
    gen_params.tasks = 15;
    gen_params.traits = 3;
    add_gen(gen, gen_params);
    gen->add_option("--events", events, "number of scenario events")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return cmd_solve(solve_opts, problem);
        if (*run) return cmd_scenario(scenario_opts, problem, scenario, mode, reps);
        if (*bounds) return cmd_bounds(bounds_opts, problems, bounds_gen, count);
        if (*gen) return cmd_gen(gen_opts, gen_params, events);
    } catch (const mrta::SearchExhausted& e) {
        fail("search_exhausted", e.what());
        return kExhausted;
    } catch (const mrta::io::ParseError& e) {
        fail("parse_error", e.what());
        return kBadInput;
    } catch (const mrta::Error& e) {
        fail("error", e.what());
        return kBadInput;
    } catch (const std::exception& e) {
        fail("error", e.what());
        return kBadInput;
    }
    return kOk;
}
