#include "mrta/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace mrta {

const char* const kBoundCsvHeader =
    "alpha,optimal,achieved,lb,ub,bound_eq6,bound_eq14,min_open_apr,gap_normalized";

namespace {

void check_guard(const ProblemDomain& domain) {
    if (domain.num_tasks() * domain.num_robots() > kBruteForceLimit) {
        throw Error("brute-force enumeration is limited to " + std::to_string(kBruteForceLimit) +
                    " task-robot pairs");
    }
}

// Calls fn(alloc) for every allocation of the domain.
template <typename Fn>
void for_each_allocation(const ProblemDomain& domain, Fn&& fn) {
    const std::size_t n = domain.num_tasks();
    const std::size_t m = domain.num_robots();
    const std::size_t cells = n * m;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        Allocation alloc(n, m);
        for (std::size_t c = 0; c < cells; ++c) {
            if (mask >> c & 1U) alloc.set(c / m, c % m, true);
        }
        fn(alloc);
    }
}

std::optional<double> planned_makespan(const ProblemDomain& domain, const Allocation& alloc,
                                       MotionPlanner& planner) {
    PlannedTravel travel(domain, planner);
    const auto problem = build_scheduling_problem(domain, alloc, travel);
    const auto schedule = solve_schedule(problem);
    if (!schedule) return std::nullopt;
    return schedule->makespan;
}

}  // namespace

double time_optimality_bound(double alpha, double lb, double ub) {
    if (!(alpha >= 0.0)) throw Error("alpha must be non-negative");
    if (alpha >= 0.5) {
        throw Error("alpha >= 0.5: the time optimality bound loses significance, since the "
                    "gap it allows is at least the whole makespan range");
    }
    if (ub < lb) throw Error("upper makespan bound is below the lower bound");
    return alpha / (1.0 - alpha) * (ub - lb);
}

double posthoc_bound(double alpha, double lb, double ub, double min_open_apr) {
    if (!(min_open_apr >= 0.0 && min_open_apr <= 1.0)) throw Error("min_open_apr must lie in [0, 1]");
    return time_optimality_bound(alpha, lb, ub) * min_open_apr;
}

double min_open_apr(const SearchState& state, std::optional<NodeId> exclude) {
    double best = 1.0;
    for (const auto id : state.open_nodes()) {
        if (exclude && id == *exclude) continue;
        best = std::min(best, state.node(id).apr);
    }
    return best;
}

double brute_force_optimal_makespan(const ProblemDomain& domain, MotionPlanner& planner) {
    check_guard(domain);
    double best = std::numeric_limits<double>::infinity();
    for_each_allocation(domain, [&](const Allocation& alloc) {
        if (!is_valid_allocation(alloc, domain.team, domain.requirements)) return;
        if (const auto c = planned_makespan(domain, alloc, planner)) best = std::min(best, *c);
    });
    return best;
}

std::optional<std::size_t> brute_force_min_assignments(const ProblemDomain& domain,
                                                       MotionPlanner& planner) {
    check_guard(domain);
    std::optional<std::size_t> best;
    for_each_allocation(domain, [&](const Allocation& alloc) {
        const std::size_t count = alloc.count();
        if (best && count >= *best) return;
        if (!is_valid_allocation(alloc, domain.team, domain.requirements)) return;
        if (planned_makespan(domain, alloc, planner)) best = count;
    });
    return best;
}

bool unique_apr_descent(const ProblemDomain& domain) {
    constexpr double kTie = 1e-12;
    Allocation current(domain.num_tasks(), domain.num_robots());
    double current_apr = apr(current, domain.team, domain.requirements);
    while (current_apr > 0.0) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ties = 0;
        Allocation next;
        for (std::size_t m = 0; m < domain.num_tasks(); ++m) {
            for (std::size_t r = 0; r < domain.num_robots(); ++r) {
                if (current.assigned(m, r)) continue;
                Allocation child = current.with(m, r);
                const double a = apr(child, domain.team, domain.requirements);
                if (a < best - kTie) {
                    best = a;
                    ties = 1;
                    next = std::move(child);
                } else if (std::abs(a - best) <= kTie) {
                    ++ties;
                }
            }
        }
        if (ties == 0 || !(best < current_apr)) return false;
        if (ties > 1 && best > 0.0) return false;
        current = std::move(next);
        current_apr = best;
    }
    return true;
}

BoundValidation validate_bound(const ProblemDomain& domain, double alpha, MotionPlanner& planner,
                               const SearchOptions& base) {
    check_guard(domain);
    SearchOptions options = base;
    options.alpha = alpha;
    auto outcome = search(domain, planner, options);
    if (outcome.result.status != SearchStatus::Solved) {
        throw Error("search ended without a solution while validating the bound");
    }
    const Solution& sol = *outcome.result.solution;
    const auto bounds = nsq_bounds(domain, &planner);

    BoundReport r;
    r.alpha = alpha;
    r.optimal_makespan = brute_force_optimal_makespan(domain, planner);
    r.achieved_makespan = sol.schedule.makespan;
    r.lb = bounds.lower;
    r.ub = bounds.upper;
    r.min_open_apr = min_open_apr(outcome.state, sol.node);
    if (alpha < 0.5) {
        r.apriori_bound = time_optimality_bound(alpha, r.lb, r.ub);
        r.posthoc_bound = posthoc_bound(alpha, r.lb, r.ub, r.min_open_apr);
    } else {
        r.apriori_bound = r.posthoc_bound = std::numeric_limits<double>::infinity();
    }
    const double range = r.ub - r.lb;
    r.normalized_gap = range > 0.0 ? r.gap() / range : 0.0;
    r.resource_count = resource_count(sol.allocation);
    return {r, outcome.result.counters, sol};
}

void write_bound_row(std::ostream& out, const BoundReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.6g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.alpha,
                  r.optimal_makespan, r.achieved_makespan, r.lb, r.ub, r.apriori_bound,
                  r.posthoc_bound, r.min_open_apr, r.normalized_gap);
    out << buf << '\n';
}

}  // namespace mrta
