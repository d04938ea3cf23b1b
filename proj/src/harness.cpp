#include "mrta/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mrta/geometry.hpp"
#include "mrta/problem_io.hpp"

namespace mrta {

const char* const kScenarioCsvHeader =
    "step,time,event,mode,wall_time_ms,makespan,resource_count,nodes_touched,planner_calls,"
    "scheduler_calls,expansions,valid";

namespace {

constexpr double kTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

nlohmann::json point_json(Point p) { return {p.x, p.y}; }

std::string event_label(const std::vector<DynamicEvent>& batch) {
    std::string out;
    for (const auto& e : batch) {
        if (!out.empty()) out += '+';
        out += to_string(e.kind());
    }
    return out;
}

const Solution& solved_or_throw(const SearchResult& result, const std::string& what) {
    if (result.status != SearchStatus::Solved || !result.solution) {
        const char* why = result.status == SearchStatus::LimitReached ? "search limit reached"
                                                                      : "no valid allocation found";
        throw SearchExhausted(what + ": " + why);
    }
    return *result.solution;
}

EventRecord make_record(std::size_t step, double time, std::string event, RunMode mode,
                        double wall_ms, const ProblemDomain& domain, const SearchResult& result,
                        std::uint64_t planner_calls, const MotionPlanner& planner) {
    const Solution& sol = *result.solution;
    EventRecord rec;
    rec.step = step;
    rec.time = time;
    rec.event = std::move(event);
    rec.mode = to_string(mode);
    rec.wall_time_ms = wall_ms;
    rec.makespan = sol.schedule.makespan;
    rec.resource_count = resource_count(sol.allocation);
    rec.nodes_touched = result.counters.nodes_touched + result.counters.nodes_generated;
    rec.planner_calls = planner_calls;
    rec.scheduler_calls = result.counters.scheduler_calls;
    rec.expansions = result.counters.expansions;
    rec.issues = solution_issues(domain, sol, planner);
    rec.valid = rec.issues.empty();
    return rec;
}

struct TimedSearch {
    SearchOutcome outcome;
    MotionPlanner planner;
    double wall_ms;
};

// Fresh search with a planner that starts from an empty plan cache.
TimedSearch timed_search(const ProblemDomain& domain, const MotionPlanner& base,
                         const SearchOptions& options, std::size_t reps, const std::string& what) {
    std::vector<double> times;
    std::optional<TimedSearch> last;
    for (std::size_t i = 0; i < std::max<std::size_t>(reps, 1); ++i) {
        MotionPlanner planner(base);
        const auto t0 = Clock::now();
        auto outcome = search(domain, planner, options);
        times.push_back(elapsed_ms(t0));
        last.emplace(TimedSearch{std::move(outcome), std::move(planner), 0.0});
    }
    solved_or_throw(last->outcome.result, what);
    last->wall_ms = median(times);
    return std::move(*last);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::vector<std::string> solution_issues(const ProblemDomain& domain, const Solution& sol,
                                         const MotionPlanner& planner) {
    std::vector<std::string> issues;
    if (sol.allocation.num_tasks() != domain.num_tasks() ||
        sol.allocation.num_robots() != domain.num_robots()) {
        issues.push_back("allocation dimensions do not match the domain");
        return issues;
    }
    if (!is_valid_allocation(sol.allocation, domain.team, domain.requirements)) {
        issues.push_back("allocation leaves requirements unmet");
    }
    try {
        const auto problem = solution_scheduling_problem(domain, sol);
        for (auto& v : schedule_violations(problem, sol.schedule, kTolerance)) issues.push_back(std::move(v));
    } catch (const Error& e) {
        issues.push_back(e.what());
    }
    for (const auto& [key, plan] : sol.motion_plans) {
        const auto& [cls, from, to] = key;
        if (plan.waypoints.empty() || plan.waypoints.front() != from || plan.waypoints.back() != to) {
            issues.push_back("motion plan endpoints do not match its transition");
            continue;
        }
        for (std::size_t i = 0; i + 1 < plan.waypoints.size(); ++i) {
            if (!geometry::segment_free(planner.world(), plan.waypoints[i], plan.waypoints[i + 1])) {
                issues.push_back("motion plan segment collides with an obstacle");
                break;
            }
        }
        if (std::abs(plan.duration - geometry::path_length(plan.waypoints) / cls.speed) > 1e-6) {
            issues.push_back("motion plan duration disagrees with its length");
        }
    }
    if (domain.num_robots() > 0) {
        const auto bounds = nsq_bounds(domain, &planner);
        if (sol.schedule.makespan < bounds.lower - kTolerance ||
            sol.schedule.makespan > bounds.upper + kTolerance) {
            issues.push_back("makespan lies outside the analytic bounds");
        }
    }
    return issues;
}

MotionPlanner make_planner(const ProblemDomain& domain, const RoadmapParams& params) {
    return MotionPlanner(domain.world, build_roadmap(domain, params));
}

nlohmann::json solution_to_json(const ProblemDomain& domain, const Solution& sol) {
    nlohmann::json assignments = nlohmann::json::object();
    nlohmann::json starts = nlohmann::json::object();
    for (std::size_t m = 0; m < domain.num_tasks(); ++m) {
        const auto& id = domain.network.tasks[m].id;
        nlohmann::json robots = nlohmann::json::array();
        for (const auto r : sol.allocation.robots_of(m)) robots.push_back(domain.team.robot_ids[r]);
        assignments[id] = robots;
        starts[id] = sol.schedule.start_times[m];
    }
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& [key, plan] : sol.motion_plans) {
        const auto& [cls, from, to] = key;
        nlohmann::json waypoints = nlohmann::json::array();
        for (const auto p : plan.waypoints) waypoints.push_back(point_json(p));
        plans.push_back({{"traits", cls.traits},
                         {"speed", cls.speed},
                         {"from", point_json(from)},
                         {"to", point_json(to)},
                         {"waypoints", waypoints},
                         {"length", plan.length},
                         {"duration", plan.duration}});
    }
    return {{"makespan", sol.schedule.makespan},
            {"resource_count", resource_count(sol.allocation)},
            {"assignments", assignments},
            {"start_times", starts},
            {"motion_plans", plans}};
}

RunMode run_mode_from_string(const std::string& name) {
    if (name == "repair") return RunMode::Repair;
    if (name == "recompute") return RunMode::Recompute;
    if (name == "both") return RunMode::Both;
    throw Error("unknown mode '" + name + "' (expected repair, recompute or both)");
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Repair: return "repair";
        case RunMode::Recompute: return "recompute";
        case RunMode::Both: return "both";
    }
    return "";
}

bool ScenarioResult::all_valid() const {
    return std::all_of(records.begin(), records.end(), [](const EventRecord& r) { return r.valid; });
}

ScenarioResult run_scenario(const ProblemDomain& domain, const std::vector<DynamicEvent>& events,
                            const ScenarioConfig& config) {
    const bool do_repair = config.mode != RunMode::Recompute;
    const bool do_recompute = config.mode != RunMode::Repair;
    SearchOptions options;
    options.alpha = config.alpha;
    options.limits = config.limits;

    const MotionPlanner base = make_planner(domain, config.roadmap);
    ScenarioResult out;
    auto report = [&](const EventRecord& r, const ProblemDomain& d, const Solution& s,
                      const MotionPlanner& p) {
        if (config.on_solution) config.on_solution(r, d, s, p);
    };

    auto initial = timed_search(domain, base, options, config.repetitions, "initial solve");
    const std::uint64_t initial_calls = initial.planner.planner_calls() - base.planner_calls();
    for (const auto mode : {RunMode::Repair, RunMode::Recompute}) {
        if ((mode == RunMode::Repair && !do_repair) || (mode == RunMode::Recompute && !do_recompute)) continue;
        out.records.push_back(make_record(0, 0.0, "initial", mode, initial.wall_ms, domain,
                                          initial.outcome.result, initial_calls, initial.planner));
        report(out.records.back(), domain, *initial.outcome.result.solution, initial.planner);
    }

    SearchState state = std::move(initial.outcome.state);
    Solution solution = *initial.outcome.result.solution;
    std::optional<MotionPlanner> planner;
    planner.emplace(initial.planner);
    ProblemDomain current = domain;

    std::size_t step = 0;
    for (const auto& batch : batch_by_time(events)) {
        ++step;
        ProblemDomain next = current;
        for (const auto& e : batch) next = apply_event(next, e);
        const std::string label = event_label(batch);
        const std::string what = "step " + std::to_string(step) + " (" + label + ")";

        if (do_repair) {
            std::vector<double> times;
            std::optional<SearchState> kept_state;
            std::optional<MotionPlanner> kept_planner;
            std::optional<RepairResult> kept;
            for (std::size_t i = 0; i < std::max<std::size_t>(config.repetitions, 1); ++i) {
                SearchState trial = state;
                MotionPlanner trial_planner(*planner);
                const auto t0 = Clock::now();
                auto result = repair(trial, solution, batch, current, trial_planner, options);
                times.push_back(elapsed_ms(t0));
                kept.emplace(std::move(result));
                kept_state.emplace(std::move(trial));
                kept_planner.emplace(trial_planner);
            }
            solved_or_throw(kept->result, "repair at " + what);
            if (!(kept->domain == next)) throw Error("repair produced an unexpected domain at " + what);
            const auto calls = kept_planner->planner_calls() - planner->planner_calls();
            out.records.push_back(make_record(step, batch.front().time, label, RunMode::Repair,
                                              median(times), next, kept->result, calls, *kept_planner));
            report(out.records.back(), next, *kept->result.solution, *kept_planner);
            state = std::move(*kept_state);
            solution = *kept->result.solution;
            planner.emplace(*kept_planner);
        }

        if (do_recompute) {
            const auto mutations = state.mutations();
            auto fresh = timed_search(next, base, options, config.repetitions, "recompute at " + what);
            if (state.mutations() != mutations) throw Error("recompute touched the retained search state");
            const auto calls = fresh.planner.planner_calls() - base.planner_calls();
            out.records.push_back(make_record(step, batch.front().time, label, RunMode::Recompute,
                                              fresh.wall_ms, next, fresh.outcome.result, calls,
                                              fresh.planner));
            report(out.records.back(), next, *fresh.outcome.result.solution, fresh.planner);
            if (!do_repair) solution = *fresh.outcome.result.solution;
        }
        current = std::move(next);
    }
    return out;
}

void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioResult& result) {
    std::filesystem::create_directories(dir);
    std::string csv = std::string(kScenarioCsvHeader) + "\n";
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records) {
        csv += std::to_string(r.step) + "," + fmt("%.9g", r.time) + "," + r.event + "," + r.mode + "," +
               fmt("%.3f", r.wall_time_ms) + "," + fmt("%.9f", r.makespan) + "," +
               std::to_string(r.resource_count) + "," + std::to_string(r.nodes_touched) + "," +
               std::to_string(r.planner_calls) + "," + std::to_string(r.scheduler_calls) + "," +
               std::to_string(r.expansions) + "," + (r.valid ? "1" : "0") + "\n";
        records.push_back({{"step", r.step},
                           {"time", r.time},
                           {"event", r.event},
                           {"mode", r.mode},
                           {"wall_time_ms", r.wall_time_ms},
                           {"makespan", r.makespan},
                           {"resource_count", r.resource_count},
                           {"nodes_touched", r.nodes_touched},
                           {"planner_calls", r.planner_calls},
                           {"scheduler_calls", r.scheduler_calls},
                           {"expansions", r.expansions},
                           {"valid", r.valid},
                           {"issues", r.issues}});
    }
    write_text(dir / "results.csv", csv);
    io::write_json(dir / "results.json", {{"records", records}, {"all_valid", result.all_valid()}});

    std::map<std::string, std::vector<const EventRecord*>> by_mode;
    for (const auto& r : result.records) by_mode[r.mode].push_back(&r);
    std::string text = "mode        solves  median_ms   median_makespan  nodes_touched  valid\n";
    for (const auto& [mode, rows] : by_mode) {
        std::vector<double> ms;
        std::vector<double> spans;
        std::uint64_t touched = 0;
        bool valid = true;
        for (const auto* r : rows) {
            ms.push_back(r->wall_time_ms);
            spans.push_back(r->makespan);
            touched += r->nodes_touched;
            valid = valid && r->valid;
        }
        char line[160];
        std::snprintf(line, sizeof line, "%-10s  %6zu  %9.3f  %15.3f  %13llu  %s\n", mode.c_str(),
                      rows.size(), median(ms), median(spans),
                      static_cast<unsigned long long>(touched), valid ? "yes" : "no");
        text += line;
    }
    write_text(dir / "summary.txt", text);
}

std::size_t SweepResult::violations() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) {
        return !r.report.respects_apriori() || !r.report.respects_posthoc();
    }));
}

void check_sweep_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) throw Error("no alpha values given");
    for (const double a : alphas) time_optimality_bound(a, 0.0, 0.0);
}

SweepResult run_bounds_sweep(const std::vector<std::pair<std::string, ProblemDomain>>& problems,
                             const std::vector<double>& alphas, const RoadmapParams& roadmap) {
    check_sweep_alphas(alphas);
    SweepResult out;
    for (const auto& [name, domain] : problems) {
        if (domain.num_tasks() * domain.num_robots() > kBruteForceLimit) {
            throw Error("problem '" + name + "' exceeds the brute-force limit of " +
                        std::to_string(kBruteForceLimit) + " task-robot pairs");
        }
        MotionPlanner planner = make_planner(domain, roadmap);
        const auto min_assignments = brute_force_min_assignments(domain, planner);
        const bool tie_free = unique_apr_descent(domain);
        for (const double alpha : alphas) {
            auto validation = validate_bound(domain, alpha, planner);
            out.rows.push_back({name, validation.report, min_assignments.value_or(0), tie_free});
        }
    }
    return out;
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result) {
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    csv << kBoundCsvHeader << '\n';
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : result.rows) {
        write_bound_row(csv, row.report);
        const auto& r = row.report;
        rows.push_back({{"problem", row.problem},
                        {"alpha", r.alpha},
                        {"optimal", r.optimal_makespan},
                        {"achieved", r.achieved_makespan},
                        {"lb", r.lb},
                        {"ub", r.ub},
                        {"bound_eq6", r.apriori_bound},
                        {"bound_eq14", r.posthoc_bound},
                        {"min_open_apr", r.min_open_apr},
                        {"gap_normalized", r.normalized_gap},
                        {"resource_count", r.resource_count},
                        {"min_assignments", row.min_assignments},
                        {"respects_bounds", r.respects_apriori() && r.respects_posthoc()}});
    }
    write_text(dir / "results.csv", csv.str());
    io::write_json(dir / "results.json", {{"rows", rows}, {"violations", result.violations()}});

    std::map<double, std::vector<const SweepRow*>> by_alpha;
    for (const auto& row : result.rows) by_alpha[row.report.alpha].push_back(&row);
    std::string text = "alpha   rows  mean_achieved  mean_optimal  max_gap_norm  max_bound_norm  violations\n";
    for (const auto& [alpha, rows] : by_alpha) {
        double achieved = 0.0, optimal = 0.0, max_gap = 0.0, max_bound = 0.0;
        std::size_t bad = 0;
        for (const auto* row : rows) {
            const auto& r = row->report;
            achieved += r.achieved_makespan;
            optimal += r.optimal_makespan;
            max_gap = std::max(max_gap, r.normalized_gap);
            if (r.ub > r.lb) max_bound = std::max(max_bound, r.apriori_bound / (r.ub - r.lb));
            bad += !(r.respects_apriori() && r.respects_posthoc());
        }
        const auto n = static_cast<double>(rows.size());
        char line[160];
        std::snprintf(line, sizeof line, "%-6.3g  %4zu  %13.3f  %12.3f  %12.3g  %14.3g  %10zu\n", alpha,
                      rows.size(), achieved / n, optimal / n, max_gap, max_bound, bad);
        text += line;
    }
    write_text(dir / "summary.txt", text);
}

}  // namespace mrta
