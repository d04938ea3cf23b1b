#ifndef MRTA_REPAIR_HPP
#define MRTA_REPAIR_HPP

#include <span>

#include "mrta/allocation_search.hpp"
#include "mrta/events.hpp"

namespace mrta {

// Targeted repair of a retained search graph after dynamic events.
//
// Each event kind updates only the node sets that the change can affect:
//   agent or task loss      drop nodes using the agent or task, shrink the rest; on task loss,
//                           open and closed nodes meeting the reduced requirements become goals
//   traits down / reqs up   recompute APR of open nodes; closed and pruned stay infeasible
//   traits up / reqs down   recompute APR of open nodes; revive closed or pruned nodes with APR 0
//   duration change         re-solve the schedules of open nodes under new NSQ bounds
//   new agent               widen every allocation and add one root child per task
// The previous solution, carried into the new domain, is then re-evaluated and placed in the
// open set before the search resumes.

/// Carries an allocation across an event: drops the lost robot column or task row, or adds
/// a zero column for a new robot.
Allocation project_allocation(const Allocation& alloc, const ProblemDomain& before,
                              const DynamicEvent& event);

/// `ctx.domain` must be the domain after the event.
void handle_agent_or_task_loss(SearchState& state, const ProblemDomain& before,
                               const DynamicEvent& event, SearchContext& ctx);
void handle_decrease(SearchState& state, SearchContext& ctx);
void handle_increase(SearchState& state, SearchContext& ctx);
void handle_duration_change(SearchState& state, SearchContext& ctx);
void handle_new_agent(SearchState& state, SearchContext& ctx);

/// Runs the handler matching the event's kind.
void apply_handler(SearchState& state, const ProblemDomain& before, const DynamicEvent& event,
                   SearchContext& ctx);

struct RepairResult {
    ProblemDomain domain;  // D_{k+1} after the whole batch
    SearchResult result;
};

/// Applies a batch of simultaneous events to the domain and to the retained state, then
/// resumes the search. `state` must be the state that produced `solution` on `domain`.
RepairResult repair(SearchState& state, const Solution& solution,
                    std::span<const DynamicEvent> events, const ProblemDomain& domain,
                    MotionPlanner& planner, const SearchOptions& options);

}  // namespace mrta

#endif  // MRTA_REPAIR_HPP
