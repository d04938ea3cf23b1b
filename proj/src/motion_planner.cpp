#include "mrta/motion_planner.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <queue>
#include <random>

#include "mrta/geometry.hpp"

namespace mrta {

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Vertices of `vertices` ordered by distance to p (ties by index).
std::vector<std::size_t> by_distance(const std::vector<Point>& vertices, Point p) {
    std::vector<std::size_t> idx(vertices.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return distance(vertices[a], p) < distance(vertices[b], p);
    });
    return idx;
}

// Visible roadmap vertices used to attach a query point that is not itself a vertex.
std::vector<Roadmap::Neighbor> attach(const Roadmap& roadmap, const WorldModel& world, Point p,
                                      std::size_t wanted) {
    std::vector<Roadmap::Neighbor> out;
    if (!geometry::point_free(world, p)) return out;
    for (const auto v : by_distance(roadmap.vertices(), p)) {
        if (out.size() >= wanted) break;
        const Point q = roadmap.vertices()[v];
        if (geometry::segment_free(world, p, q)) out.push_back({v, distance(p, q)});
    }
    return out;
}

constexpr std::size_t kAttachNeighbors = 8;

}  // namespace

Roadmap::Roadmap(std::vector<Point> vertices, std::vector<RoadmapEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), adjacency_(vertices_.size()) {
    DisjointSet sets(vertices_.size());
    for (const auto& e : edges_) {
        adjacency_[e.a].push_back({e.b, e.length});
        adjacency_[e.b].push_back({e.a, e.length});
        total_length_ += e.length;
        sets.unite(e.a, e.b);
    }
    component_.resize(vertices_.size());
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        component_[v] = sets.find(v);
        index_.emplace(vertices_[v], v);
    }
}

std::optional<std::size_t> Roadmap::find_vertex(Point p) const {
    const auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Roadmap build_roadmap(const WorldModel& world, std::span<const Point> mandatory,
                      const RoadmapParams& params) {
    if (params.samples < 1) throw Error("roadmap needs at least one sample");
    const auto& b = world.bounds;
    if (!(b.max.x > b.min.x && b.max.y > b.min.y)) throw Error("world bounds are degenerate");

    std::vector<Point> vertices;
    std::set<Point> seen;
    for (const auto p : mandatory) {
        if (seen.insert(p).second) vertices.push_back(p);
    }

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> ux(b.min.x, b.max.x);
    std::uniform_real_distribution<double> uy(b.min.y, b.max.y);
    const std::size_t cap = params.rejection_factor * params.samples;
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; attempt < cap && accepted < params.samples; ++attempt) {
        const Point p{ux(rng), uy(rng)};
        if (!geometry::point_free(world, p)) continue;
        ++accepted;
        if (seen.insert(p).second) vertices.push_back(p);
    }
    if (accepted == 0) {
        throw Error("no collision-free roadmap sample found within the rejection cap");
    }

    std::set<std::pair<std::size_t, std::size_t>> linked;
    std::vector<RoadmapEdge> edges;
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        const auto order = by_distance(vertices, vertices[v]);
        std::size_t taken = 0;
        for (const auto u : order) {
            if (u == v) continue;
            if (taken++ >= params.k_neighbors) break;
            const auto key = std::minmax(u, v);
            if (linked.count(key)) continue;
            if (!geometry::segment_free(world, vertices[v], vertices[u])) continue;
            linked.insert(key);
            edges.push_back({key.first, key.second, distance(vertices[u], vertices[v])});
        }
    }
    return Roadmap(std::move(vertices), std::move(edges));
}

Roadmap build_roadmap(const ProblemDomain& domain, const RoadmapParams& params) {
    std::vector<Point> mandatory;
    for (std::size_t r = 0; r < domain.num_robots(); ++r) mandatory.push_back(domain.robot_start(r));
    for (const auto& t : domain.network.tasks) {
        mandatory.push_back(t.initial_config);
        mandatory.push_back(t.terminal_config);
    }
    return build_roadmap(domain.world, mandatory, params);
}

CapabilityClass capability_class(const ProblemDomain& domain, std::size_t robot) {
    CapabilityClass cls;
    const auto row = domain.team.entries.row(static_cast<Eigen::Index>(robot));
    cls.traits.reserve(static_cast<std::size_t>(row.size()));
    for (Eigen::Index u = 0; u < row.size(); ++u) cls.traits.push_back(row(u));
    cls.speed = domain.robot_speed(robot);
    return cls;
}

double estimate_travel_time(Point from, Point to, double speed) {
    if (!(speed > 0.0)) throw Error("speed must be positive");
    return distance(from, to) / speed;
}

std::optional<MotionPlan> plan_path(const Roadmap& roadmap, const WorldModel& world, Point from,
                                    Point to, double speed) {
    if (!(speed > 0.0)) throw Error("speed must be positive");
    if (from == to) return MotionPlan{{from}, 0.0, 0.0};

    // Graph vertices 0..n-1 are roadmap vertices; n and n+1 are temporary endpoints.
    const std::size_t n = roadmap.vertices().size();
    const std::size_t source = roadmap.find_vertex(from).value_or(n);
    const std::size_t target = roadmap.find_vertex(to).value_or(n + 1);
    std::vector<Roadmap::Neighbor> source_links;
    std::vector<Roadmap::Neighbor> target_links;
    if (source == n) {
        source_links = attach(roadmap, world, from, kAttachNeighbors);
        if (source_links.empty()) return std::nullopt;
    }
    if (target == n + 1) {
        target_links = attach(roadmap, world, to, kAttachNeighbors);
        if (target_links.empty()) return std::nullopt;
    }

    auto point_of = [&](std::size_t v) { return v == n ? from : (v == n + 1 ? to : roadmap.vertices()[v]); };

    std::vector<double> dist(n + 2, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev(n + 2, n + 2);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    dist[source] = 0.0;
    frontier.push({0.0, source});
    auto relax = [&](std::size_t u, std::size_t v, double w) {
        if (dist[u] + w < dist[v]) {
            dist[v] = dist[u] + w;
            prev[v] = u;
            frontier.push({dist[v], v});
        }
    };
    while (!frontier.empty()) {
        const auto [d, u] = frontier.top();
        frontier.pop();
        if (d > dist[u]) continue;
        if (u == target) break;
        if (u == n) {
            for (const auto& nb : source_links) relax(u, nb.vertex, nb.length);
            continue;
        }
        if (u == n + 1) continue;
        for (const auto& nb : roadmap.neighbors(u)) relax(u, nb.vertex, nb.length);
        for (const auto& nb : target_links) {
            if (nb.vertex == u) relax(u, n + 1, nb.length);
        }
    }
    if (!std::isfinite(dist[target])) return std::nullopt;

    MotionPlan plan;
    for (std::size_t v = target; v != source; v = prev[v]) plan.waypoints.push_back(point_of(v));
    plan.waypoints.push_back(from);
    std::reverse(plan.waypoints.begin(), plan.waypoints.end());
    plan.length = geometry::path_length(plan.waypoints);
    plan.duration = plan.length / speed;
    return plan;
}

PlanCache::PlanCache(const PlanCache& other) {
    std::shared_lock lock(other.mutex_);
    plans_ = other.plans_;
    unreachable_ = other.unreachable_;
}

PlanCache& PlanCache::operator=(const PlanCache& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_);
    std::shared_lock other_lock(other.mutex_);
    plans_ = other.plans_;
    unreachable_ = other.unreachable_;
    return *this;
}

std::optional<MotionPlan> PlanCache::lookup(const CapabilityClass& cls, Point from,
                                            Point to) const {
    std::shared_lock lock(mutex_);
    const auto it = plans_.find(PlanKey{cls, from, to});
    if (it == plans_.end()) return std::nullopt;
    return it->second;
}

bool PlanCache::known_unreachable(const CapabilityClass& cls, Point from, Point to) const {
    std::shared_lock lock(mutex_);
    return unreachable_.count(PlanKey{cls, from, to}) > 0;
}

void PlanCache::insert(const CapabilityClass& cls, Point from, Point to,
                       std::optional<MotionPlan> plan) {
    std::scoped_lock lock(mutex_);
    if (plan) {
        plans_.emplace(PlanKey{cls, from, to}, std::move(*plan));
    } else {
        unreachable_.insert(PlanKey{cls, from, to});
    }
}

std::size_t PlanCache::size() const {
    std::shared_lock lock(mutex_);
    return plans_.size() + unreachable_.size();
}

MotionPlanner::MotionPlanner(WorldModel world, Roadmap roadmap)
    : world_(std::move(world)), roadmap_(std::move(roadmap)) {}

std::optional<MotionPlan> MotionPlanner::plan(const CapabilityClass& cls, Point from, Point to) {
    if (auto hit = cache_.lookup(cls, from, to)) return hit;
    if (cache_.known_unreachable(cls, from, to)) return std::nullopt;
    ++calls_;
    auto result = plan_path(roadmap_, world_, from, to, cls.speed);
    cache_.insert(cls, from, to, result);
    return result;
}

std::optional<std::size_t> MotionPlanner::component_of(Point p) const {
    if (const auto v = roadmap_.find_vertex(p)) return roadmap_.component(*v);
    return std::nullopt;
}

bool MotionPlanner::connected(Point from, Point to) const {
    if (from == to) return true;
    auto components = [this](Point p) {
        std::set<std::size_t> out;
        if (const auto c = component_of(p)) {
            out.insert(*c);
        } else {
            for (const auto& nb : attach(roadmap_, world_, p, kAttachNeighbors)) {
                out.insert(roadmap_.component(nb.vertex));
            }
        }
        return out;
    };
    const auto a = components(from);
    const auto b = components(to);
    return std::any_of(a.begin(), a.end(), [&b](std::size_t c) { return b.count(c) > 0; });
}

std::optional<double> EuclideanTravel::travel_time(std::size_t robot, Point from, Point to) {
    if (planner_ && !planner_->connected(from, to)) return std::nullopt;
    return estimate_travel_time(from, to, domain_.robot_speed(robot));
}

std::optional<double> PlannedTravel::travel_time(std::size_t robot, Point from, Point to) {
    auto cls = capability_class(domain_, robot);
    auto plan = planner_.plan(cls, from, to);
    if (!plan) return std::nullopt;
    const double duration = plan->duration;
    used_.emplace(PlanKey{std::move(cls), from, to}, std::move(*plan));
    return duration;
}

}  // namespace mrta
