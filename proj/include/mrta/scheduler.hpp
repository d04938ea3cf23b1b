#ifndef MRTA_SCHEDULER_HPP
#define MRTA_SCHEDULER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mrta/domain.hpp"

namespace mrta {

/// Source of robot travel times between configurations. Returning nullopt marks the two
/// points as mutually unreachable for that robot, which makes any schedule needing the
/// transition infeasible.
class TravelTimeProvider {
public:
    virtual ~TravelTimeProvider() = default;
    virtual std::optional<double> travel_time(std::size_t robot, Point from, Point to) = 0;
};

/// Makespan minimization input for a fixed allocation.
///
/// Constraints on start times s:
///   s_i >= initial_arrival[i]
///   s_j >= s_i + d_i + x(i, j)                for (i, j) in precedence
///   s_j >= s_i + d_i + x(i, j)  or
///   s_i >= s_j + d_j + x(j, i)                for {i, j} in mutex_reduced
/// An infinite x or arrival encodes an unreachable transition.
struct SchedulingProblem {
    std::vector<double> durations;
    std::vector<TaskPair> precedence;
    std::vector<TaskPair> mutex_reduced;  // first < second
    std::vector<double> transition;       // row-major M x M, x(i, j)
    std::vector<double> initial_arrival;

    [[nodiscard]] std::size_t num_tasks() const { return durations.size(); }
    [[nodiscard]] double x(std::size_t i, std::size_t j) const {
        return transition[i * durations.size() + j];
    }
    void set_x(std::size_t i, std::size_t j, double value) {
        transition[i * durations.size() + j] = value;
    }

    static SchedulingProblem with_tasks(std::size_t num_tasks);
};

/// Orientation of a mutex pair {i, j} with i < j.
enum class Ordering : std::int8_t {
    Undecided = -1,
    FirstBeforeSecond = 0,
    SecondBeforeFirst = 1,
};

struct Schedule {
    std::vector<double> start_times;
    double makespan = 0.0;
    std::vector<Ordering> orderings;  // aligned with SchedulingProblem::mutex_reduced
};

SchedulingProblem build_scheduling_problem(const ProblemDomain& domain, const Allocation& alloc,
                                           TravelTimeProvider& travel);

/// Earliest start times for the precedence constraints plus the oriented mutex pairs.
/// Undecided pairs are left out, which gives a relaxation of the full problem. Returns
/// nullopt on a positive cycle or an unreachable transition.
std::optional<Schedule> stn_solve(const SchedulingProblem& problem,
                                  std::span<const Ordering> orderings);

struct ScheduleStats {
    std::uint64_t nodes = 0;
    std::uint64_t stn_solves = 0;
};

/// Exact minimum makespan over every orientation of the mutex pairs, by depth-first
/// branch and bound. Returns nullopt when no orientation is feasible.
std::optional<Schedule> solve_schedule(const SchedulingProblem& problem,
                                       ScheduleStats* stats = nullptr);

/// Lower bound on the optimal makespan from the root relaxation, without branching.
/// nullopt exactly when solve_schedule would find no feasible orientation.
std::optional<double> makespan_lower_bound(const SchedulingProblem& problem);

double makespan(std::span<const double> start_times, std::span<const double> durations);

/// Worst-case makespan 2·M·z/w + Σ d over the domain's tasks, with z a bound on any path
/// length and w the slowest robot speed. Without a roadmap, z falls back to M times the
/// world perimeter.
double schedule_upper_bound(const ProblemDomain& domain, std::optional<double> longest_path);

/// Longest single task duration.
double schedule_lower_bound(const ProblemDomain& domain);

/// Lists each constraint the schedule violates by more than `tolerance`.
std::vector<std::string> schedule_violations(const SchedulingProblem& problem,
                                             const Schedule& schedule, double tolerance = 1e-9);

}  // namespace mrta

#endif  // MRTA_SCHEDULER_HPP
