#include "mrta/allocation_search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mrta {

namespace {

constexpr double kMakespanTolerance = 1e-9;

class RecordedTravel final : public TravelTimeProvider {
public:
    RecordedTravel(const ProblemDomain& domain, const std::map<PlanKey, MotionPlan>& plans)
        : domain_(domain), plans_(plans) {}

    std::optional<double> travel_time(std::size_t robot, Point from, Point to) override {
        const auto it = plans_.find(PlanKey{capability_class(domain_, robot), from, to});
        if (it == plans_.end()) throw Error("solution lacks a motion plan for a required transition");
        return it->second.duration;
    }

private:
    const ProblemDomain& domain_;
    const std::map<PlanKey, MotionPlan>& plans_;
};

}  // namespace

double apr(const Allocation& alloc, const TeamTraitMatrix& team, const DesiredTraitMatrix& req) {
    const double required = req.entries.sum();
    if (required <= 0.0) return 0.0;
    const Eigen::MatrixXd mismatch = trait_mismatch(alloc, team, req);
    const double unmet = (mismatch.array() > kTraitTolerance).select(mismatch.array(), 0.0).sum();
    return unmet / required;
}

double nsq(double makespan, NsqBounds bounds) {
    const double range = bounds.upper - bounds.lower;
    if (!(range > 0.0)) return 0.0;
    return std::clamp((makespan - bounds.lower) / range, 0.0, 1.0);
}

double tetaq(double apr_value, double nsq_value, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
    return alpha * apr_value + (1.0 - alpha) * nsq_value;
}

NsqBounds nsq_bounds(const ProblemDomain& domain, const MotionPlanner* planner) {
    std::optional<double> z;
    if (planner) z = planner->roadmap().total_edge_length();
    return {schedule_lower_bound(domain), schedule_upper_bound(domain, z)};
}

SearchState::SearchState(double alpha, NsqBounds bounds) : alpha_(alpha), bounds_(bounds) {
    tetaq(0.0, 0.0, alpha);  // validates alpha
}

void SearchState::set_bounds(NsqBounds bounds) {
    ++mutations_;
    bounds_ = bounds;
    std::vector<NodeId> ids;
    for (const auto& k : open_) ids.push_back(k.id);
    for (const auto id : ids) {
        modify(id, [&](AllocationNode& n) {
            if (n.schedule) {
                n.nsq = nsq(n.schedule->makespan, bounds_);
            } else if (n.estimate) {
                n.nsq = nsq(*n.estimate, bounds_);
            }
            n.tetaq = tetaq(n.apr, n.nsq, alpha_);
        });
    }
}

bool SearchState::contains(NodeId id) const { return id < nodes_.size() && nodes_[id].has_value(); }

const AllocationNode& SearchState::node(NodeId id) const {
    if (!contains(id)) throw Error("no node with id " + std::to_string(id));
    return *nodes_[id];
}

AllocationNode& SearchState::mut(NodeId id) {
    if (!contains(id)) throw Error("no node with id " + std::to_string(id));
    return *nodes_[id];
}

std::optional<NodeId> SearchState::find(const Allocation& alloc) const {
    const auto it = index_.find(alloc);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void SearchState::detach(AllocationNode& n) {
    switch (n.status) {
        case NodeStatus::Open: open_.erase(key_of(n)); break;
        case NodeStatus::Closed: closed_.erase(n.id); break;
        case NodeStatus::Pruned: pruned_.erase(n.id); break;
    }
}

void SearchState::attach(AllocationNode& n) {
    switch (n.status) {
        case NodeStatus::Open: open_.insert(key_of(n)); break;
        case NodeStatus::Closed: closed_.insert(n.id); break;
        case NodeStatus::Pruned: pruned_.insert(n.id); break;
    }
}

NodeId SearchState::add(AllocationNode node, NodeStatus status) {
    ++mutations_;
    if (index_.count(node.allocation)) throw Error("allocation already present in the search graph");
    node.id = static_cast<NodeId>(nodes_.size());
    node.status = status;
    node.sequence = next_sequence_++;
    if (node.allocation.count() == 0 && !root_) root_ = node.id;
    index_.emplace(node.allocation, node.id);
    nodes_.emplace_back(std::move(node));
    attach(*nodes_.back());
    return nodes_.back()->id;
}

void SearchState::modify(NodeId id, const std::function<void(AllocationNode&)>& fn) {
    ++mutations_;
    auto& n = mut(id);
    const NodeStatus status = n.status;
    detach(n);
    fn(n);
    n.status = status;
    attach(n);
}

void SearchState::set_status(NodeId id, NodeStatus status) {
    ++mutations_;
    auto& n = mut(id);
    detach(n);
    if (status == NodeStatus::Open) n.sequence = next_sequence_++;
    n.status = status;
    attach(n);
}

void SearchState::remove(NodeId id) {
    ++mutations_;
    auto& n = mut(id);
    detach(n);
    index_.erase(n.allocation);
    if (root_ == id) root_.reset();
    nodes_[id].reset();
}

std::optional<NodeId> SearchState::pop_open() {
    ++mutations_;
    if (open_.empty()) return std::nullopt;
    const NodeId id = open_.begin()->id;
    open_.erase(open_.begin());
    auto& n = mut(id);
    n.status = NodeStatus::Closed;
    closed_.insert(id);
    return id;
}

std::vector<NodeId> SearchState::open_nodes() const {
    std::vector<NodeId> out;
    out.reserve(open_.size());
    for (const auto& k : open_) out.push_back(k.id);
    return out;
}

std::vector<NodeId> SearchState::all_nodes() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_) {
        if (n) out.push_back(n->id);
    }
    return out;
}

void SearchState::transform_allocations(const std::function<void(Allocation&)>& fn) {
    ++mutations_;
    open_.clear();
    index_.clear();
    for (auto& n : nodes_) {
        if (!n) continue;
        fn(n->allocation);
        if (!index_.emplace(n->allocation, n->id).second) {
            throw Error("allocation transform merged two nodes");
        }
        if (n->status == NodeStatus::Open) open_.insert(key_of(*n));
    }
}

bool evaluate(AllocationNode& node, const SearchState& state, SearchContext& ctx) {
    node.apr = apr(node.allocation, ctx.domain.team, ctx.domain.requirements);
    EuclideanTravel travel(ctx.domain, &ctx.planner);
    const auto problem = build_scheduling_problem(ctx.domain, node.allocation, travel);
    ++ctx.counters.scheduler_calls;
    node.schedule = solve_schedule(problem);
    node.estimate.reset();
    node.refined = false;
    node.stale = false;
    if (!node.schedule) {
        node.nsq = 1.0;
        node.tetaq = tetaq(node.apr, node.nsq, state.alpha());
        return false;
    }
    node.nsq = nsq(node.schedule->makespan, state.bounds());
    node.tetaq = tetaq(node.apr, node.nsq, state.alpha());
    return true;
}

bool estimate(AllocationNode& node, const SearchState& state, SearchContext& ctx, double floor) {
    node.apr = apr(node.allocation, ctx.domain.team, ctx.domain.requirements);
    EuclideanTravel travel(ctx.domain, &ctx.planner);
    const auto bound = makespan_lower_bound(build_scheduling_problem(ctx.domain, node.allocation, travel));
    node.schedule.reset();
    node.refined = false;
    node.stale = false;
    if (!bound) {
        node.estimate.reset();
        node.nsq = 1.0;
        node.tetaq = tetaq(node.apr, node.nsq, state.alpha());
        return false;
    }
    node.estimate = std::max(*bound, floor);
    node.nsq = nsq(*node.estimate, state.bounds());
    node.tetaq = tetaq(node.apr, node.nsq, state.alpha());
    return true;
}

std::optional<std::map<PlanKey, MotionPlan>> refine(AllocationNode& node, const SearchState& state,
                                                    SearchContext& ctx) {
    PlannedTravel travel(ctx.domain, ctx.planner);
    const auto problem = build_scheduling_problem(ctx.domain, node.allocation, travel);
    ++ctx.counters.scheduler_calls;
    ++ctx.counters.goal_refinements;
    auto schedule = solve_schedule(problem);
    if (!schedule) return std::nullopt;
    node.schedule = std::move(schedule);
    node.refined = true;
    node.stale = false;
    node.nsq = nsq(node.schedule->makespan, state.bounds());
    node.tetaq = tetaq(node.apr, node.nsq, state.alpha());
    return travel.take_plans();
}

SearchState make_initial_state(SearchContext& ctx) {
    SearchState state(ctx.options.alpha, nsq_bounds(ctx.domain, &ctx.planner));
    AllocationNode root;
    root.allocation = Allocation(ctx.domain.num_tasks(), ctx.domain.num_robots());
    const bool feasible = evaluate(root, state, ctx);
    state.add(std::move(root), feasible ? NodeStatus::Open : NodeStatus::Pruned);
    return state;
}

std::vector<NodeId> expand(NodeId id, SearchState& state, SearchContext& ctx) {
    ++ctx.counters.expansions;
    if (state.node(id).status != NodeStatus::Closed) state.set_status(id, NodeStatus::Closed);
    const Allocation base = state.node(id).allocation;
    const auto& parent_schedule = state.node(id).schedule;
    // Adding a robot only adds constraints, so the parent's makespan is a floor for every child.
    const double floor = parent_schedule && !state.node(id).refined ? parent_schedule->makespan : 0.0;
    std::vector<NodeId> children;
    for (std::size_t m = 0; m < base.num_tasks(); ++m) {
        for (std::size_t r = 0; r < base.num_robots(); ++r) {
            if (base.assigned(m, r)) continue;
            Allocation alloc = base.with(m, r);
            if (state.find(alloc)) continue;
            AllocationNode child;
            child.allocation = std::move(alloc);
            child.parent = id;
            const bool feasible = estimate(child, state, ctx, floor);
            ++ctx.counters.nodes_generated;
            if (ctx.options.on_child) ctx.options.on_child(state.node(id), child);
            children.push_back(state.add(std::move(child), feasible ? NodeStatus::Open : NodeStatus::Pruned));
        }
    }
    return children;
}

SearchResult resume(SearchState& state, SearchContext& ctx) {
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    const auto& limits = ctx.options.limits;
    SearchResult result;

    auto finish = [&](SearchStatus status) {
        result.status = status;
        result.counters = ctx.counters;
        return result;
    };

    for (;;) {
        if (ctx.counters.expansions >= limits.max_expansions ||
            std::chrono::duration<double>(Clock::now() - started).count() > limits.max_seconds) {
            return finish(SearchStatus::LimitReached);
        }
        const auto popped = state.pop_open();
        if (!popped) return finish(SearchStatus::NoSolution);
        const NodeId id = *popped;

        if (state.node(id).stale || !state.node(id).schedule) {
            const bool touched = state.node(id).stale;
            bool feasible = true;
            state.modify(id, [&](AllocationNode& n) { feasible = evaluate(n, state, ctx); });
            if (touched) ++ctx.counters.nodes_touched;
            state.set_status(id, feasible ? NodeStatus::Open : NodeStatus::Pruned);
            continue;
        }

        if (state.node(id).apr > 0.0) {
            expand(id, state, ctx);
            continue;
        }

        // Goal candidate.
        if (!is_valid_allocation(state.node(id).allocation, ctx.domain.team, ctx.domain.requirements)) {
            state.modify(id, [&](AllocationNode& n) {
                n.apr = apr(n.allocation, ctx.domain.team, ctx.domain.requirements);
                n.tetaq = tetaq(n.apr, n.nsq, state.alpha());
            });
            state.set_status(id, NodeStatus::Open);
            continue;
        }

        std::optional<std::map<PlanKey, MotionPlan>> plans;
        if (!state.node(id).refined) {
            const double estimate = state.node(id).schedule->makespan;
            state.modify(id, [&](AllocationNode& n) { plans = refine(n, state, ctx); });
            if (!plans) {
                state.set_status(id, NodeStatus::Pruned);
                continue;
            }
            if (std::abs(state.node(id).schedule->makespan - estimate) > kMakespanTolerance) {
                state.set_status(id, NodeStatus::Open);
                continue;
            }
        } else {
            PlannedTravel travel(ctx.domain, ctx.planner);
            (void)build_scheduling_problem(ctx.domain, state.node(id).allocation, travel);
            plans = travel.take_plans();
        }

        const auto& n = state.node(id);
        result.solution = Solution{n.allocation, *n.schedule, std::move(*plans), id};
        return finish(SearchStatus::Solved);
    }
}

SearchOutcome search(const ProblemDomain& domain, MotionPlanner& planner,
                     const SearchOptions& options) {
    SearchCounters counters;
    SearchContext ctx{domain, planner, options, counters};
    SearchState state = make_initial_state(ctx);
    SearchResult result = resume(state, ctx);
    return {std::move(result), std::move(state)};
}

SchedulingProblem solution_scheduling_problem(const ProblemDomain& domain, const Solution& solution) {
    RecordedTravel travel(domain, solution.motion_plans);
    return build_scheduling_problem(domain, solution.allocation, travel);
}

}  // namespace mrta
