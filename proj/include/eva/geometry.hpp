#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace eva {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 &operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2 &operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2 &operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2 &) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return length(a - b); }
inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Unit vector along `v`, or the zero vector when `v` is (numerically) zero.
inline Vec2 normalized(Vec2 v) {
    const double len = length(v);
    return len > 1e-12 ? v / len : Vec2{};
}

inline Vec2 from_angle(double radians) { return {std::cos(radians), std::sin(radians)}; }

struct Segment {
    Vec2 a;
    Vec2 b;
    bool operator==(const Segment &) const = default;
};

struct Box {
    Vec2 min;
    Vec2 max;
};

using Polygon = std::vector<Vec2>;

Vec2 closest_point(const Segment &s, Vec2 p);
double distance_to_segment(const Segment &s, Vec2 p);

/// Parameter along `motion` (0 at motion.a, 1 at motion.b) of the first point
/// shared with `target`, or nothing when the closed segments are disjoint.
/// Collinear overlaps report the earliest shared point.
std::optional<double> segment_intersection(const Segment &motion, const Segment &target);

bool segments_intersect(const Segment &s, const Segment &t);

/// Closed segment vs closed axis-aligned box.
bool segment_touches_box(const Segment &s, const Box &box);

/// Inclusive point-in-convex-polygon test (either winding).
bool point_in_convex_polygon(std::span<const Vec2> poly, Vec2 p);

bool is_convex(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);

} // namespace eva
