#pragma once

#include <cmath>

namespace tr {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }
/// Counter-clockwise perpendicular.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit(Vec2 a) {
    double n = norm(a);
    return {a.x / n, a.y / n};
}
inline Vec2 from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }

}  // namespace tr
