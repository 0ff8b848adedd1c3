#pragma once

#include <utility>

#include "tr/common/vec2.hpp"

namespace tr::botworld {

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Closest pair (on ab, on cd); for crossing segments both are the crossing.
std::pair<Vec2, Vec2> closest_points(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// A segment core thickened by `radius`: circles have a == b, bars are capsules.
struct Capsule {
    Vec2 a;
    Vec2 b;
    double radius = 0.0;

    double distance_to_core(Vec2 p) const { return point_segment_distance(p, a, b); }
};

/// Smallest t in [0, 1] at which the distance from p + t (q - p) to the
/// capsule core falls below `threshold`, assuming it starts at or above it.
/// Returns 1 when it never does. The returned point itself is never below.
double first_entry(Vec2 p, Vec2 q, const Capsule& c, double threshold);

/// Parameter in [0, 1] of the point of segment pq nearest the capsule core.
double nearest_parameter(Vec2 p, Vec2 q, const Capsule& c);

}  // namespace tr::botworld
