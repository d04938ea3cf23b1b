#ifndef MRTA_ANALYSIS_HPP
#define MRTA_ANALYSIS_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mrta/allocation_search.hpp"

namespace mrta {

/// Largest task-robot product the brute-force oracles accept.
constexpr std::size_t kBruteForceLimit = 12;

struct BoundReport {
    double alpha = 0.0;
    double optimal_makespan = 0.0;
    double achieved_makespan = 0.0;
    double lb = 0.0;
    double ub = 0.0;
    double apriori_bound = 0.0;
    double posthoc_bound = 0.0;
    double min_open_apr = 1.0;
    double normalized_gap = 0.0;
    std::size_t resource_count = 0;

    [[nodiscard]] double gap() const { return achieved_makespan - optimal_makespan; }
    [[nodiscard]] bool respects_apriori(double tol = 1e-9) const { return gap() <= apriori_bound + tol; }
    [[nodiscard]] bool respects_posthoc(double tol = 1e-9) const { return gap() <= posthoc_bound + tol; }
};

/// (alpha / (1 − alpha)) · (ub − lb). Throws Error for alpha outside [0, 0.5) or ub < lb.
double time_optimality_bound(double alpha, double lb, double ub);

/// time_optimality_bound scaled by the smallest APR left in the open set.
double posthoc_bound(double alpha, double lb, double ub, double min_open_apr);

/// Smallest APR among open nodes, skipping `exclude`; 1 when no other open node exists.
double min_open_apr(const SearchState& state, std::optional<NodeId> exclude);

/// Best makespan over every valid allocation, scheduled with planned travel.
/// Infinity when no valid allocation is schedulable. Throws above kBruteForceLimit.
double brute_force_optimal_makespan(const ProblemDomain& domain, MotionPlanner& planner);

/// Fewest assignments of any valid, schedulable allocation; nullopt when none exists.
std::optional<std::size_t> brute_force_min_assignments(const ProblemDomain& domain,
                                                       MotionPlanner& planner);

/// True when greedy APR descent from the empty allocation never faces a tie before the
/// final step. Instances failing this are excluded from the resource-optimality check.
bool unique_apr_descent(const ProblemDomain& domain);

struct BoundValidation {
    BoundReport report;
    SearchCounters counters;
    Solution solution;
};

/// Solves at `alpha` and compares against the brute-force optimum. Throws Error when the
/// search ends without a solution.
BoundValidation validate_bound(const ProblemDomain& domain, double alpha, MotionPlanner& planner,
                               const SearchOptions& base = {});

extern const char* const kBoundCsvHeader;
void write_bound_row(std::ostream& out, const BoundReport& report);

}  // namespace mrta

#endif  // MRTA_ANALYSIS_HPP
