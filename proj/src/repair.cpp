#include "mrta/repair.hpp"

namespace mrta {

namespace {

void drop_task_from_schedule(AllocationNode& n, std::size_t task, const ProblemDomain& after) {
    n.stale = true;
    n.refined = false;
    if (!n.schedule) return;
    auto& s = *n.schedule;
    s.start_times.erase(s.start_times.begin() + static_cast<std::ptrdiff_t>(task));
    s.orderings.clear();
    std::vector<double> durations;
    for (const auto& t : after.network.tasks) durations.push_back(t.duration);
    s.makespan = makespan(s.start_times, durations);
}

void recompute_apr(SearchState& state, NodeId id, SearchContext& ctx) {
    state.modify(id, [&](AllocationNode& n) {
        n.apr = apr(n.allocation, ctx.domain.team, ctx.domain.requirements);
        n.tetaq = tetaq(n.apr, n.nsq, state.alpha());
    });
    ++ctx.counters.nodes_touched;
}

// Re-evaluates a node and files it as open (feasible) or pruned.
void reopen(SearchState& state, NodeId id, SearchContext& ctx) {
    bool feasible = true;
    state.modify(id, [&](AllocationNode& n) { feasible = evaluate(n, state, ctx); });
    ++ctx.counters.nodes_touched;
    state.set_status(id, feasible ? NodeStatus::Open : NodeStatus::Pruned);
}

}  // namespace

Allocation project_allocation(const Allocation& alloc, const ProblemDomain& before,
                              const DynamicEvent& event) {
    Allocation out = alloc;
    if (const auto* lost = std::get_if<AgentLost>(&event.payload)) {
        out.erase_robot(*before.robot_index(lost->agent));
    } else if (const auto* gone = std::get_if<TaskLost>(&event.payload)) {
        out.erase_task(*before.task_index(gone->task));
    } else if (std::holds_alternative<NewAgent>(event.payload)) {
        out.append_robot();
    }
    return out;
}

void handle_agent_or_task_loss(SearchState& state, const ProblemDomain& before,
                               const DynamicEvent& event, SearchContext& ctx) {
    const auto* agent = std::get_if<AgentLost>(&event.payload);
    const auto* task = std::get_if<TaskLost>(&event.payload);
    if (!agent && !task) throw Error("loss handler received a different event kind");

    if (agent) {
        const auto r = *before.robot_index(agent->agent);
        for (const auto id : state.all_nodes()) {
            if (state.node(id).allocation.robot_used(r)) {
                state.remove(id);
                ++ctx.counters.nodes_touched;
            }
        }
        state.transform_allocations([r](Allocation& a) { a.erase_robot(r); });
        // Survivors never used the robot, so their schedules and APR carry over unchanged.
        return;
    }

    const auto m = *before.task_index(task->task);
    for (const auto id : state.all_nodes()) {
        if (state.node(id).allocation.task_uses_any(m)) {
            state.remove(id);
            ++ctx.counters.nodes_touched;
        }
    }
    state.transform_allocations([m](Allocation& a) { a.erase_task(m); });
    for (const auto id : state.all_nodes()) {
        state.modify(id, [&](AllocationNode& n) { drop_task_from_schedule(n, m, ctx.domain); });
    }

    // Open and closed nodes that already meet every remaining requirement become goal
    // candidates; other open nodes are re-solved lazily when popped.
    std::vector<NodeId> rescan = state.open_nodes();
    rescan.insert(rescan.end(), state.closed_nodes().begin(), state.closed_nodes().end());
    for (const auto id : rescan) {
        recompute_apr(state, id, ctx);
        if (state.node(id).apr == 0.0) reopen(state, id, ctx);
    }
}

void handle_decrease(SearchState& state, SearchContext& ctx) {
    for (const auto id : state.open_nodes()) recompute_apr(state, id, ctx);
}

void handle_increase(SearchState& state, SearchContext& ctx) {
    for (const auto id : state.open_nodes()) recompute_apr(state, id, ctx);

    std::vector<NodeId> rescan(state.closed_nodes().begin(), state.closed_nodes().end());
    rescan.insert(rescan.end(), state.pruned_nodes().begin(), state.pruned_nodes().end());
    for (const auto id : rescan) {
        recompute_apr(state, id, ctx);
        if (state.node(id).apr != 0.0) continue;
        const auto& n = state.node(id);
        if (n.status == NodeStatus::Pruned || n.stale || !n.schedule) {
            reopen(state, id, ctx);
        } else {
            state.set_status(id, NodeStatus::Open);
        }
    }
}

void handle_duration_change(SearchState& state, SearchContext& ctx) {
    state.set_bounds(nsq_bounds(ctx.domain, &ctx.planner));
    for (const auto id : state.open_nodes()) {
        bool feasible = true;
        state.modify(id, [&](AllocationNode& n) {
            const double kept_apr = n.apr;
            feasible = estimate(n, state, ctx, 0.0);
            n.apr = kept_apr;
            n.tetaq = tetaq(n.apr, n.nsq, state.alpha());
        });
        ++ctx.counters.nodes_touched;
        if (!feasible) state.set_status(id, NodeStatus::Pruned);
    }
    // Closed and pruned schedules are re-solved only if a later event revives them.
    std::vector<NodeId> others(state.closed_nodes().begin(), state.closed_nodes().end());
    others.insert(others.end(), state.pruned_nodes().begin(), state.pruned_nodes().end());
    for (const auto id : others) {
        state.modify(id, [](AllocationNode& n) { n.stale = true; });
    }
}

void handle_new_agent(SearchState& state, SearchContext& ctx) {
    state.transform_allocations([](Allocation& a) { a.append_robot(); });
    const auto root = state.root();
    if (!root) throw Error("search graph has no root node");
    const Allocation base = state.node(*root).allocation;
    const std::size_t robot = base.num_robots() - 1;
    for (std::size_t m = 0; m < base.num_tasks(); ++m) {
        AllocationNode child;
        child.allocation = base.with(m, robot);
        child.parent = *root;
        const bool feasible = estimate(child, state, ctx, 0.0);
        ++ctx.counters.nodes_generated;
        ++ctx.counters.nodes_touched;
        state.add(std::move(child), feasible ? NodeStatus::Open : NodeStatus::Pruned);
    }
}

void apply_handler(SearchState& state, const ProblemDomain& before, const DynamicEvent& event,
                   SearchContext& ctx) {
    switch (event.kind()) {
        case EventKind::AgentLost:
        case EventKind::TaskLost:
            handle_agent_or_task_loss(state, before, event, ctx);
            break;
        case EventKind::TraitsReduced:
        case EventKind::RequirementsIncreased:
            handle_decrease(state, ctx);
            break;
        case EventKind::TraitsIncreased:
        case EventKind::RequirementsReduced:
            handle_increase(state, ctx);
            break;
        case EventKind::DurationChanged:
            handle_duration_change(state, ctx);
            break;
        case EventKind::NewAgent:
            handle_new_agent(state, ctx);
            break;
    }
}

RepairResult repair(SearchState& state, const Solution& solution,
                    std::span<const DynamicEvent> events, const ProblemDomain& domain,
                    MotionPlanner& planner, const SearchOptions& options) {
    SearchCounters counters;
    ProblemDomain current = domain;
    Allocation carried = solution.allocation;
    for (const auto& event : events) {
        ProblemDomain next = apply_event(current, event);
        SearchContext ctx{next, planner, options, counters};
        apply_handler(state, current, event, ctx);
        carried = project_allocation(carried, current, event);
        current = std::move(next);
    }

    SearchContext ctx{current, planner, options, counters};
    state.set_bounds(nsq_bounds(current, &planner));

    // The previous solution re-enters the open set, evaluated under the new domain.
    if (const auto existing = state.find(carried)) {
        reopen(state, *existing, ctx);
    } else {
        AllocationNode node;
        node.allocation = carried;
        const bool feasible = evaluate(node, state, ctx);
        ++ctx.counters.nodes_touched;
        state.add(std::move(node), feasible ? NodeStatus::Open : NodeStatus::Pruned);
    }

    SearchResult result = resume(state, ctx);
    return {std::move(current), std::move(result)};
}

}  // namespace mrta
