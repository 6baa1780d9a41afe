#pragma once
// Reference implementations used only by tests. Deliberately naive and
// written without looking at the production algorithms.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Boolean occupancy grid, row-major, true = blocked.
struct BoolGrid {
    int cols = 0;
    int rows = 0;
    std::vector<char> blocked;

    bool free(int c, int r) const { return c >= 0 && r >= 0 && c < cols && r < rows && !blocked[r * cols + c]; }
};

inline BoolGrid random_grid(std::mt19937_64 &rng, int max_side, double density) {
    std::uniform_int_distribution<int> side(2, max_side);
    std::bernoulli_distribution wall(density);
    BoolGrid g;
    g.cols = side(rng);
    g.rows = side(rng);
    g.blocked.resize(static_cast<std::size_t>(g.cols * g.rows));
    for (auto &b : g.blocked)
        b = wall(rng);
    return g;
}

// Path length as straight/diagonal step counts; the real length is
// straight + diagonal * sqrt(2) (times the cell size). Keeping integers lets
// equal-length routes compare exactly.
struct Steps {
    long straight = 0;
    long diagonal = 0;
    long double value() const { return straight + diagonal * std::numbers::sqrt2_v<long double>; }
};

// Plain BFS for 4-connectivity (all steps equal).
inline std::optional<Steps> bfs4(const BoolGrid &g, int sc, int sr, int gc, int gr) {
    if (!g.free(sc, sr) || !g.free(gc, gr))
        return std::nullopt;
    std::vector<int> dist(g.blocked.size(), -1);
    std::queue<std::pair<int, int>> q;
    dist[sr * g.cols + sc] = 0;
    q.push({sc, sr});
    const int dc[4] = {1, -1, 0, 0}, dr[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        auto [c, r] = q.front();
        q.pop();
        if (c == gc && r == gr)
            return Steps{dist[r * g.cols + c], 0};
        for (int k = 0; k < 4; ++k) {
            int nc = c + dc[k], nr = r + dr[k];
            if (g.free(nc, nr) && dist[nr * g.cols + nc] < 0) {
                dist[nr * g.cols + nc] = dist[r * g.cols + c] + 1;
                q.push({nc, nr});
            }
        }
    }
    return std::nullopt;
}

// Dijkstra for 8-connectivity. A diagonal step is refused only when both
// orthogonal cells it passes between are blocked.
inline std::optional<Steps> dijkstra8(const BoolGrid &g, int sc, int sr, int gc, int gr) {
    if (!g.free(sc, sr) || !g.free(gc, gr))
        return std::nullopt;
    const std::size_t n = g.blocked.size();
    std::vector<Steps> best(n);
    std::vector<char> seen(n, 0), done(n, 0);
    using Item = std::pair<long double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    const int s = sr * g.cols + sc;
    seen[s] = 1;
    pq.push({0.0L, s});
    while (!pq.empty()) {
        auto [d, i] = pq.top();
        pq.pop();
        if (done[i])
            continue;
        done[i] = 1;
        const int c = i % g.cols, r = i / g.cols;
        if (c == gc && r == gr)
            return best[i];
        for (int dc = -1; dc <= 1; ++dc)
            for (int dr = -1; dr <= 1; ++dr) {
                if (!dc && !dr)
                    continue;
                const int nc = c + dc, nr = r + dr;
                if (!g.free(nc, nr))
                    continue;
                const bool diag = dc && dr;
                if (diag && !g.free(c + dc, r) && !g.free(c, r + dr))
                    continue;
                Steps cand = best[i];
                (diag ? cand.diagonal : cand.straight) += 1;
                const int j = nr * g.cols + nc;
                if (!done[j] && (!seen[j] || cand.value() < best[j].value() - 1e-12L)) {
                    seen[j] = 1;
                    best[j] = cand;
                    pq.push({cand.value(), j});
                }
            }
    }
    return std::nullopt;
}

// Even-odd ray casting, boundary counted as inside.
inline bool point_in_polygon(const std::vector<std::pair<double, double>> &poly, double x, double y) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto [x1, y1] = poly[i];
        auto [x2, y2] = poly[(i + 1) % n];
        const double cr = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
        if (std::abs(cr) < 1e-12 && x >= std::min(x1, x2) - 1e-12 && x <= std::max(x1, x2) + 1e-12 &&
            y >= std::min(y1, y2) - 1e-12 && y <= std::max(y1, y2) + 1e-12)
            return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        auto [xi, yi] = poly[i];
        auto [xj, yj] = poly[j];
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

// Orientation test for closed segments p1p2 and q1q2, integer-friendly.
inline int orient(double ax, double ay, double bx, double by, double cx, double cy) {
    const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return (v > 0) - (v < 0);
}

inline bool on_box(double ax, double ay, double bx, double by, double px, double py) {
    return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py && py <= std::max(ay, by);
}

inline bool segments_cross(double p1x, double p1y, double p2x, double p2y, double q1x, double q1y, double q2x,
                           double q2y) {
    const int o1 = orient(p1x, p1y, p2x, p2y, q1x, q1y);
    const int o2 = orient(p1x, p1y, p2x, p2y, q2x, q2y);
    const int o3 = orient(q1x, q1y, q2x, q2y, p1x, p1y);
    const int o4 = orient(q1x, q1y, q2x, q2y, p2x, p2y);
    if (o1 != o2 && o3 != o4)
        return true;
    if (!o1 && on_box(p1x, p1y, p2x, p2y, q1x, q1y))
        return true;
    if (!o2 && on_box(p1x, p1y, p2x, p2y, q2x, q2y))
        return true;
    if (!o3 && on_box(q1x, q1y, q2x, q2y, p1x, p1y))
        return true;
    if (!o4 && on_box(q1x, q1y, q2x, q2y, p2x, p2y))
        return true;
    return false;
}

// Free agent under the relaxation term alone, starting at rest.
inline double relaxation_speed(double v0, double tau, double t) { return v0 * (1.0 - std::exp(-t / tau)); }

} // namespace oracle
