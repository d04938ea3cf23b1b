#ifndef MRTA_HARNESS_HPP
#define MRTA_HARNESS_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrta/analysis.hpp"
#include "mrta/generator.hpp"
#include "mrta/repair.hpp"

namespace mrta {

/// Raised when a search ends without a solution.
class SearchExhausted : public Error {
public:
    using Error::Error;
};

/// Everything wrong with a solution: unmet requirements, schedule constraint violations,
/// missing or colliding motion plans, and a makespan outside the analytic bounds.
std::vector<std::string> solution_issues(const ProblemDomain& domain, const Solution& solution,
                                         const MotionPlanner& planner);

/// Builds the roadmap for a domain with the given parameters.
MotionPlanner make_planner(const ProblemDomain& domain, const RoadmapParams& params);

nlohmann::json solution_to_json(const ProblemDomain& domain, const Solution& solution);

enum class RunMode { Repair, Recompute, Both };
RunMode run_mode_from_string(const std::string& name);
std::string to_string(RunMode mode);

/// One solve in one mode. Step 0 is the initial solve.
struct EventRecord {
    std::size_t step = 0;
    double time = 0.0;
    std::string event;  // kinds joined with '+' when a batch holds several events
    std::string mode;
    double wall_time_ms = 0.0;
    double makespan = 0.0;
    std::size_t resource_count = 0;
    std::uint64_t nodes_touched = 0;
    std::uint64_t planner_calls = 0;
    std::uint64_t scheduler_calls = 0;
    std::uint64_t expansions = 0;
    bool valid = false;
    std::vector<std::string> issues;
};

struct ScenarioConfig {
    RunMode mode = RunMode::Both;
    double alpha = 0.5;
    RoadmapParams roadmap;
    SearchLimits limits;
    std::size_t repetitions = 3;  // wall time is the median over this many runs
    /// Sees every record with the domain it was solved on, the solution behind it and the
    /// planner that produced its motion plans.
    std::function<void(const EventRecord&, const ProblemDomain&, const Solution&, const MotionPlanner&)>
        on_solution;
};

struct ScenarioResult {
    std::vector<EventRecord> records;
    [[nodiscard]] bool all_valid() const;
};

/// Solves the initial problem and then each batch of simultaneous events, by targeted repair,
/// by recomputing from scratch, or both. Throws SearchExhausted if any solve fails.
ScenarioResult run_scenario(const ProblemDomain& domain, const std::vector<DynamicEvent>& events,
                            const ScenarioConfig& config);

/// CSV header of results.csv; `wall_time_ms` is the only timing column.
extern const char* const kScenarioCsvHeader;

/// Writes results.csv, results.json and summary.txt.
void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioResult& result);

struct SweepRow {
    std::string problem;
    BoundReport report;
    std::size_t min_assignments = 0;  // brute-force optimum, 0 when unknown
    bool tie_free = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    [[nodiscard]] std::size_t violations() const;
};

/// Throws Error when an alpha is outside [0, 0.5).
void check_sweep_alphas(const std::vector<double>& alphas);

/// One bound report per (problem, alpha), on problems within the brute-force limit.
SweepResult run_bounds_sweep(const std::vector<std::pair<std::string, ProblemDomain>>& problems,
                             const std::vector<double>& alphas, const RoadmapParams& roadmap);

/// Writes results.csv (bound rows), results.json and summary.txt.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result);

}  // namespace mrta

#endif  // MRTA_HARNESS_HPP
