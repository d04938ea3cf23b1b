#ifndef MRTA_MOTION_PLANNER_HPP
#define MRTA_MOTION_PLANNER_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <tuple>
#include <vector>

#include "mrta/domain.hpp"
#include "mrta/scheduler.hpp"

namespace mrta {

struct RoadmapParams {
    std::size_t samples = 200;
    std::size_t k_neighbors = 8;
    std::size_t rejection_factor = 50;  // rejection cap = rejection_factor * samples
    std::uint64_t seed = 0;
};

struct RoadmapEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double length = 0.0;
};

/// Undirected probabilistic roadmap over the free space. Immutable once built.
class Roadmap {
public:
    Roadmap(std::vector<Point> vertices, std::vector<RoadmapEdge> edges);

    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<RoadmapEdge>& edges() const { return edges_; }
    [[nodiscard]] double total_edge_length() const { return total_length_; }
    [[nodiscard]] std::optional<std::size_t> find_vertex(Point p) const;
    [[nodiscard]] std::size_t component(std::size_t vertex) const { return component_[vertex]; }

    struct Neighbor {
        std::size_t vertex;
        double length;
    };
    [[nodiscard]] std::span<const Neighbor> neighbors(std::size_t vertex) const {
        return adjacency_[vertex];
    }

    friend bool operator==(const Roadmap& a, const Roadmap& b) {
        return a.vertices_ == b.vertices_ && a.total_length_ == b.total_length_ &&
               a.edges_.size() == b.edges_.size();
    }

private:
    std::vector<Point> vertices_;
    std::vector<RoadmapEdge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<std::size_t> component_;
    std::map<Point, std::size_t> index_;
    double total_length_ = 0.0;
};

/// Uniform free-space samples plus every mandatory point, each joined to its k nearest
/// neighbors by collision-free segments. Deterministic in `params.seed`.
Roadmap build_roadmap(const WorldModel& world, std::span<const Point> mandatory,
                      const RoadmapParams& params);

/// Uses every task configuration and robot start of the domain as mandatory vertices.
Roadmap build_roadmap(const ProblemDomain& domain, const RoadmapParams& params);

struct MotionPlan {
    std::vector<Point> waypoints;
    double length = 0.0;    // meters
    double duration = 0.0;  // seconds

    friend bool operator==(const MotionPlan&, const MotionPlan&) = default;
};

/// Robots with identical trait rows and speed share one class and therefore one set of plans.
struct CapabilityClass {
    std::vector<double> traits;
    double speed = 1.0;

    friend auto operator<=>(const CapabilityClass&, const CapabilityClass&) = default;
};

CapabilityClass capability_class(const ProblemDomain& domain, std::size_t robot);

double estimate_travel_time(Point from, Point to, double speed);

/// Shortest roadmap path by edge length. Endpoints that are not roadmap vertices are joined
/// to their visible nearest vertices for this query only. Returns nullopt when disconnected.
std::optional<MotionPlan> plan_path(const Roadmap& roadmap, const WorldModel& world, Point from,
                                    Point to, double speed);

using PlanKey = std::tuple<CapabilityClass, Point, Point>;

/// Memoized plans. Concurrent lookups are allowed; inserts are serialized.
class PlanCache {
public:
    PlanCache() = default;
    PlanCache(const PlanCache& other);
    PlanCache& operator=(const PlanCache& other);

    [[nodiscard]] std::optional<MotionPlan> lookup(const CapabilityClass& cls, Point from,
                                                   Point to) const;
    [[nodiscard]] bool known_unreachable(const CapabilityClass& cls, Point from, Point to) const;
    void insert(const CapabilityClass& cls, Point from, Point to, std::optional<MotionPlan> plan);
    [[nodiscard]] std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<PlanKey, MotionPlan> plans_;
    std::set<PlanKey> unreachable_;
};

/// Roadmap plus plan cache. `plan` consults the cache first; `planner_calls` counts the
/// actual graph searches.
class MotionPlanner {
public:
    MotionPlanner(WorldModel world, Roadmap roadmap);
    MotionPlanner(const MotionPlanner& other)
        : world_(other.world_), roadmap_(other.roadmap_), cache_(other.cache_),
          calls_(other.calls_.load()) {}
    MotionPlanner& operator=(const MotionPlanner&) = delete;

    [[nodiscard]] const Roadmap& roadmap() const { return roadmap_; }
    [[nodiscard]] const WorldModel& world() const { return world_; }
    [[nodiscard]] PlanCache& cache() { return cache_; }

    std::optional<MotionPlan> plan(const CapabilityClass& cls, Point from, Point to);

    /// Whether a path exists between the two points, without planning one.
    [[nodiscard]] bool connected(Point from, Point to) const;

    [[nodiscard]] std::uint64_t planner_calls() const { return calls_.load(); }

private:
    [[nodiscard]] std::optional<std::size_t> component_of(Point p) const;

    WorldModel world_;
    Roadmap roadmap_;
    PlanCache cache_;
    std::atomic<std::uint64_t> calls_{0};
};

/// Straight-line travel times. With a planner, points in different roadmap components are
/// reported unreachable.
class EuclideanTravel final : public TravelTimeProvider {
public:
    EuclideanTravel(const ProblemDomain& domain, const MotionPlanner* planner)
        : domain_(domain), planner_(planner) {}

    std::optional<double> travel_time(std::size_t robot, Point from, Point to) override;

private:
    const ProblemDomain& domain_;
    const MotionPlanner* planner_;
};

/// Travel times from instantiated motion plans. Every plan used is recorded.
class PlannedTravel final : public TravelTimeProvider {
public:
    PlannedTravel(const ProblemDomain& domain, MotionPlanner& planner)
        : domain_(domain), planner_(planner) {}

    std::optional<double> travel_time(std::size_t robot, Point from, Point to) override;

    [[nodiscard]] const std::map<PlanKey, MotionPlan>& used_plans() const { return used_; }
    std::map<PlanKey, MotionPlan> take_plans() { return std::move(used_); }

private:
    const ProblemDomain& domain_;
    MotionPlanner& planner_;
    std::map<PlanKey, MotionPlan> used_;
};

}  // namespace mrta

#endif  // MRTA_MOTION_PLANNER_HPP
