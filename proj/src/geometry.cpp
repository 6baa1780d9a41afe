#include "eva/geometry.hpp"

#include <algorithm>

namespace eva {

Vec2 closest_point(const Segment &s, Vec2 p) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 <= 0.0)
        return s.a;
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return s.a + d * t;
}

double distance_to_segment(const Segment &s, Vec2 p) { return distance(closest_point(s, p), p); }

std::optional<double> segment_intersection(const Segment &motion, const Segment &target) {
    const Vec2 r = motion.b - motion.a;
    const Vec2 s = target.b - target.a;
    const Vec2 qp = target.a - motion.a;
    const double denom = cross(r, s);

    if (denom != 0.0) {
        const double t = cross(qp, s) / denom;
        const double u = cross(qp, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0)
            return t;
        return std::nullopt;
    }

    // Parallel. Only collinear segments can share points.
    if (cross(qp, r) != 0.0)
        return std::nullopt;

    const double rr = dot(r, r);
    if (rr == 0.0) {
        // motion is a point
        if (dot(s, s) == 0.0)
            return motion.a == target.a ? std::optional<double>(0.0) : std::nullopt;
        if (cross(motion.a - target.a, s) != 0.0)
            return std::nullopt;
        const double u = dot(motion.a - target.a, s) / dot(s, s);
        return (u >= 0.0 && u <= 1.0) ? std::optional<double>(0.0) : std::nullopt;
    }
    double t0 = dot(target.a - motion.a, r) / rr;
    double t1 = dot(target.b - motion.a, r) / rr;
    if (t0 > t1)
        std::swap(t0, t1);
    if (t1 < 0.0 || t0 > 1.0)
        return std::nullopt;
    return std::max(t0, 0.0);
}

bool segments_intersect(const Segment &s, const Segment &t) { return segment_intersection(s, t).has_value(); }

bool segment_touches_box(const Segment &s, const Box &box) {
    // Liang-Barsky clip of the segment against the closed box.
    double t0 = 0.0;
    double t1 = 1.0;
    const Vec2 d = s.b - s.a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {s.a.x - box.min.x, box.max.x - s.a.x, s.a.y - box.min.y, box.max.y - s.a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0)
                return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
        if (t0 > t1)
            return false;
    }
    return true;
}

bool point_in_convex_polygon(std::span<const Vec2> poly, Vec2 p) {
    if (poly.size() < 3)
        return false;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % poly.size()];
        const double c = cross(b - a, p - a);
        has_pos |= c > 0.0;
        has_neg |= c < 0.0;
        if (has_pos && has_neg)
            return false;
    }
    return true;
}

bool is_convex(std::span<const Vec2> poly) {
    if (poly.size() < 3)
        return false;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % poly.size()];
        const Vec2 c = poly[(i + 2) % poly.size()];
        const double z = cross(b - a, c - b);
        has_pos |= z > 0.0;
        has_neg |= z < 0.0;
    }
    return !(has_pos && has_neg) && (has_pos || has_neg);
}

Vec2 centroid(std::span<const Vec2> poly) {
    // Area centroid; falls back to the vertex mean for degenerate polygons.
    double area2 = 0.0;
    Vec2 acc{};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % poly.size()];
        const double c = cross(a, b);
        area2 += c;
        acc += (a + b) * c;
    }
    if (std::abs(area2) < 1e-12) {
        Vec2 mean{};
        for (Vec2 v : poly)
            mean += v;
        return poly.empty() ? mean : mean / static_cast<double>(poly.size());
    }
    return acc / (3.0 * area2);
}

} // namespace eva
