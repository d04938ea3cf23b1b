#ifndef MRTA_ALLOCATION_SEARCH_HPP
#define MRTA_ALLOCATION_SEARCH_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "mrta/domain.hpp"
#include "mrta/motion_planner.hpp"
#include "mrta/scheduler.hpp"

namespace mrta {

using NodeId = std::uint32_t;

enum class NodeStatus { Open, Closed, Pruned };

/// A vertex of the allocation graph. Edges add exactly one robot-to-task assignment.
struct AllocationNode {
    NodeId id = 0;
    Allocation allocation;
    std::optional<NodeId> parent;
    std::optional<Schedule> schedule;
    double apr = 1.0;
    double nsq = 0.0;
    double tetaq = 0.0;
    NodeStatus status = NodeStatus::Open;
    bool refined = false;  // schedule was solved with instantiated motion plans
    bool stale = false;    // schedule predates the current domain; re-solved when popped
    std::optional<double> estimate;  // makespan lower bound used until the schedule is solved
    std::uint64_t sequence = 0;
};

/// Makespan normalization range for NSQ.
struct NsqBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Fraction of the total required trait mass still unmet; 0 iff the allocation is valid.
/// Defined as 0 when nothing is required.
double apr(const Allocation& alloc, const TeamTraitMatrix& team, const DesiredTraitMatrix& req);

/// Makespan normalized into [0, 1] by the bounds; 0 when the range is empty.
double nsq(double makespan, NsqBounds bounds);

/// alpha·apr + (1 − alpha)·nsq. Throws Error unless alpha ∈ [0, 1].
double tetaq(double apr_value, double nsq_value, double alpha);

/// Lower bound = longest task; upper bound uses the planner's roadmap edge sum when given.
NsqBounds nsq_bounds(const ProblemDomain& domain, const MotionPlanner* planner);

/// Open, closed and pruned node sets of one search, plus the allocation index that merges
/// duplicate allocations into one node. Copyable, so a retained state can be snapshotted.
class SearchState {
public:
    SearchState(double alpha, NsqBounds bounds);

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] NsqBounds bounds() const { return bounds_; }

    /// Replaces the bounds and re-normalizes NSQ of every open node from its stored makespan.
    void set_bounds(NsqBounds bounds);

    [[nodiscard]] bool contains(NodeId id) const;
    [[nodiscard]] const AllocationNode& node(NodeId id) const;
    [[nodiscard]] std::optional<NodeId> find(const Allocation& alloc) const;
    [[nodiscard]] std::optional<NodeId> root() const { return root_; }

    /// Adds a node under a fresh id. Throws if its allocation is already indexed.
    NodeId add(AllocationNode node, NodeStatus status);

    /// Applies `fn` to a node; open-set ordering is kept consistent.
    void modify(NodeId id, const std::function<void(AllocationNode&)>& fn);

    /// Moves a node between sets. Entering the open set counts as a new insertion.
    void set_status(NodeId id, NodeStatus status);

    void remove(NodeId id);

    /// Removes and returns the open node with the lowest (tetaq, assignments, insertion order).
    /// The node is left with status Closed until the caller reassigns it.
    std::optional<NodeId> pop_open();

    [[nodiscard]] std::vector<NodeId> open_nodes() const;  // in priority order
    [[nodiscard]] const std::set<NodeId>& closed_nodes() const { return closed_; }
    [[nodiscard]] const std::set<NodeId>& pruned_nodes() const { return pruned_; }
    [[nodiscard]] std::vector<NodeId> all_nodes() const;
    [[nodiscard]] std::size_t open_size() const { return open_.size(); }
    [[nodiscard]] std::size_t size() const { return index_.size(); }

    /// Rewrites every node's allocation (e.g. dropping a robot column) and rebuilds the index.
    /// The transform must keep allocations distinct.
    void transform_allocations(const std::function<void(Allocation&)>& fn);

    /// Number of mutating calls made on this state since construction.
    [[nodiscard]] std::uint64_t mutations() const { return mutations_; }

private:
    struct OpenKey {
        double tetaq;
        std::size_t assignments;
        std::uint64_t sequence;
        NodeId id;
        friend auto operator<=>(const OpenKey&, const OpenKey&) = default;
    };

    static OpenKey key_of(const AllocationNode& n) {
        return {n.tetaq, n.allocation.count(), n.sequence, n.id};
    }
    AllocationNode& mut(NodeId id);
    void detach(AllocationNode& n);
    void attach(AllocationNode& n);

    double alpha_;
    NsqBounds bounds_;
    std::vector<std::optional<AllocationNode>> nodes_;
    std::set<OpenKey> open_;
    std::set<NodeId> closed_;
    std::set<NodeId> pruned_;
    std::unordered_map<Allocation, NodeId, AllocationHash> index_;
    std::optional<NodeId> root_;
    std::uint64_t next_sequence_ = 0;
    std::uint64_t mutations_ = 0;
};

struct SearchLimits {
    std::size_t max_expansions = 100000;
    double max_seconds = 300.0;
};

struct SearchCounters {
    std::uint64_t expansions = 0;
    std::uint64_t nodes_generated = 0;
    std::uint64_t scheduler_calls = 0;
    std::uint64_t goal_refinements = 0;
    std::uint64_t nodes_touched = 0;
};

struct SearchOptions {
    double alpha = 0.5;
    SearchLimits limits;
    /// Called for every newly generated child, after evaluation.
    std::function<void(const AllocationNode& parent, const AllocationNode& child)> on_child;
};

struct Solution {
    Allocation allocation;
    Schedule schedule;
    std::map<PlanKey, MotionPlan> motion_plans;
    NodeId node = 0;
};

enum class SearchStatus {
    Solved,
    NoSolution,    // open set emptied
    LimitReached,  // expansions or wall time exhausted; the state can be resumed
};

struct SearchResult {
    SearchStatus status = SearchStatus::NoSolution;
    std::optional<Solution> solution;
    SearchCounters counters;
};

/// Everything evaluation needs besides the node itself.
struct SearchContext {
    const ProblemDomain& domain;
    MotionPlanner& planner;
    const SearchOptions& options;
    SearchCounters& counters;
};

/// Computes APR, the Euclidean-estimate schedule, NSQ and TETAQ. Returns false when no
/// feasible schedule exists.
bool evaluate(AllocationNode& node, const SearchState& state, SearchContext& ctx);

/// Cheap stand-in for evaluate: NSQ comes from a makespan lower bound, raised to `floor`,
/// and the schedule is left unsolved until the node is popped. Feasibility is exact.
bool estimate(AllocationNode& node, const SearchState& state, SearchContext& ctx, double floor);

/// Re-solves the node's schedule with instantiated motion plans.
/// Returns the plans used, or nullopt if the refined schedule is infeasible.
std::optional<std::map<PlanKey, MotionPlan>> refine(AllocationNode& node, const SearchState& state,
                                                    SearchContext& ctx);

/// Creates a state holding only the evaluated root (the empty allocation).
SearchState make_initial_state(SearchContext& ctx);

/// Generates one child per unassigned (task, robot) pair, skipping allocations already in
/// the graph, and closes the parent. Children are estimated, not solved. Returns the ids of new children.
std::vector<NodeId> expand(NodeId id, SearchState& state, SearchContext& ctx);

/// Best-first search from the state's current open set.
SearchResult resume(SearchState& state, SearchContext& ctx);

struct SearchOutcome {
    SearchResult result;
    SearchState state;
};

SearchOutcome search(const ProblemDomain& domain, MotionPlanner& planner,
                     const SearchOptions& options);

/// Builds the scheduling problem of a solution with its recorded motion plans as travel times.
SchedulingProblem solution_scheduling_problem(const ProblemDomain& domain, const Solution& solution);

}  // namespace mrta

#endif  // MRTA_ALLOCATION_SEARCH_HPP
