#ifndef MRTA_GEOMETRY_HPP
#define MRTA_GEOMETRY_HPP

#include <span>

#include "mrta/domain.hpp"

namespace mrta::geometry {

// Obstacles are closed sets: touching a boundary counts as contact.

bool contains(const Obstacle& obstacle, Point p);
bool contains(const Rect& rect, Point p);
bool segment_intersects(const Obstacle& obstacle, Point a, Point b);

/// Point lies inside the world bounds and outside every obstacle.
bool point_free(const WorldModel& world, Point p);

/// Segment lies inside the world bounds and touches no obstacle.
bool segment_free(const WorldModel& world, Point a, Point b);

double path_length(std::span<const Point> waypoints);

}  // namespace mrta::geometry

#endif  // MRTA_GEOMETRY_HPP
