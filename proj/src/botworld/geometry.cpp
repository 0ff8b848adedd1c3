#include "tr/botworld/geometry.hpp"

#include <algorithm>
#include <optional>

namespace tr::botworld {

Vec2 closest_point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) return a;
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) { return distance(p, closest_point_on_segment(p, a, b)); }

namespace {

/// Crossing point of ab and cd if they properly intersect or touch.
std::optional<Vec2> crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    Vec2 r = b - a;
    Vec2 s = d - c;
    double denom = cross(r, s);
    if (denom == 0.0) return std::nullopt;  // parallel: endpoint distances cover it
    double t = cross(c - a, s) / denom;
    double u = cross(c - a, r) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return a + t * r;
}

}  // namespace

std::pair<Vec2, Vec2> closest_points(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    if (auto x = crossing(a, b, c, d)) return {*x, *x};
    std::pair<Vec2, Vec2> best{a, closest_point_on_segment(a, c, d)};
    double best_d = distance(best.first, best.second);
    auto consider = [&](Vec2 on_ab, Vec2 on_cd) {
        double dd = distance(on_ab, on_cd);
        if (dd < best_d) {
            best_d = dd;
            best = {on_ab, on_cd};
        }
    };
    consider(b, closest_point_on_segment(b, c, d));
    consider(closest_point_on_segment(c, a, b), c);
    consider(closest_point_on_segment(d, a, b), d);
    return best;
}

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto [x, y] = closest_points(a, b, c, d);
    return distance(x, y);
}

double nearest_parameter(Vec2 p, Vec2 q, const Capsule& c) {
    Vec2 pq = q - p;
    double len2 = dot(pq, pq);
    if (len2 == 0.0) return 0.0;
    Vec2 x = closest_points(p, q, c.a, c.b).first;
    return std::clamp(dot(x - p, pq) / len2, 0.0, 1.0);
}

double first_entry(Vec2 p, Vec2 q, const Capsule& c, double threshold) {
    auto f = [&](double t) { return c.distance_to_core(p + t * (q - p)); };
    if (f(0.0) < threshold) return 0.0;
    double hi = nearest_parameter(p, q, c);
    if (f(hi) >= threshold) return 1.0;
    double lo = 0.0;
    // f is convex along the segment, so below-threshold points form one interval.
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) >= threshold ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace tr::botworld
