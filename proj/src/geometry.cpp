#include "mrta/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mrta::geometry {

namespace {

double segment_point_distance_sq(Point a, Point b, Point p) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len_sq = dx * dx + dy * dy;
    double t = 0.0;
    if (len_sq > 0.0) {
        t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq, 0.0, 1.0);
    }
    const double cx = a.x + t * dx - p.x;
    const double cy = a.y + t * dy - p.y;
    return cx * cx + cy * cy;
}

// Liang-Barsky clipping against a closed box.
bool segment_hits_rect(const Rect& r, Point a, Point b) {
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, t);
        } else {
            t1 = std::min(t1, t);
        }
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace

bool contains(const Rect& rect, Point p) {
    return p.x >= rect.min.x && p.x <= rect.max.x && p.y >= rect.min.y && p.y <= rect.max.y;
}

bool contains(const Obstacle& obstacle, Point p) {
    return std::visit(
        [p](const auto& shape) {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Circle>) {
                const double dx = p.x - shape.center.x;
                const double dy = p.y - shape.center.y;
                return dx * dx + dy * dy <= shape.radius * shape.radius;
            } else {
                return contains(shape, p);
            }
        },
        obstacle);
}

bool segment_intersects(const Obstacle& obstacle, Point a, Point b) {
    return std::visit(
        [a, b](const auto& shape) {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return segment_point_distance_sq(a, b, shape.center) <= shape.radius * shape.radius;
            } else {
                return segment_hits_rect(shape, a, b);
            }
        },
        obstacle);
}

bool point_free(const WorldModel& world, Point p) {
    if (!contains(world.bounds, p)) return false;
    return std::none_of(world.obstacles.begin(), world.obstacles.end(),
                        [p](const Obstacle& o) { return contains(o, p); });
}

bool segment_free(const WorldModel& world, Point a, Point b) {
    // The bounds are convex, so checking both endpoints covers the segment.
    if (!contains(world.bounds, a) || !contains(world.bounds, b)) return false;
    return std::none_of(world.obstacles.begin(), world.obstacles.end(),
                        [a, b](const Obstacle& o) { return segment_intersects(o, a, b); });
}

double path_length(std::span<const Point> waypoints) {
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        total += distance(waypoints[i - 1], waypoints[i]);
    }
    return total;
}

}  // namespace mrta::geometry
