#include "eva/dynamics.hpp"
#include "eva/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace eva {

void DynamicsParams::validate() const {
    auto positive = [](double v, const char *name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("dynamics parameter ") + name + " must be positive");
    };
    positive(tau, "tau");
    positive(a_agent, "a_agent");
    positive(b_agent, "b_agent");
    positive(a_wall, "a_wall");
    positive(b_wall, "b_wall");
    positive(dt, "dt");
    positive(speed_cap_factor, "speed_cap_factor");
    positive(radius, "radius");
    positive(desired_speed, "desired_speed");
    positive(wheelchair_factor, "wheelchair_factor");
    positive(neighbor_radius, "neighbor_radius");
    if (dt > 0.1)
        throw std::invalid_argument("dynamics parameter dt must not exceed 0.1 s");
}

bool AgentState::operator==(const AgentState &o) const {
    auto same_route = [](const std::optional<Route> &a, const std::optional<Route> &b) {
        if (a.has_value() != b.has_value())
            return false;
        return !a || (a->cells == b->cells && a->length_m == b->length_m);
    };
    return id == o.id && position == o.position && velocity == o.velocity && heading == o.heading &&
           radius == o.radius && desired_speed == o.desired_speed && pushing_wheelchair == o.pushing_wheelchair &&
           same_route(route, o.route) && route_index == o.route_index && final_target == o.final_target;
}

double effective_speed(const AgentState &a, const DynamicsParams &params) {
    return a.desired_speed * (a.pushing_wheelchair ? params.wheelchair_factor : 1.0);
}

Vec2 desired_direction(const AgentState &a) {
    if (a.route && a.route_index < a.route->points.size())
        return normalized(a.route->points[a.route_index] - a.position);
    if (a.final_target)
        return normalized(*a.final_target - a.position);
    return {};
}

Vec2 clip_move(const NavGrid &grid, Vec2 from, Vec2 to) {
    auto ok = [&](Vec2 p) { return grid.walkable(p) && !grid.motion_blocked({from, p}); };
    if (ok(to))
        return to;
    const Vec2 slide_x{to.x, from.y};
    const Vec2 slide_y{from.x, to.y};
    // Prefer the axis carrying more of the motion.
    const bool x_first = std::abs(to.x - from.x) >= std::abs(to.y - from.y);
    for (Vec2 cand : x_first ? std::array{slide_x, slide_y} : std::array{slide_y, slide_x})
        if (ok(cand))
            return cand;
    return from;
}

AgentState step_avatar(const AgentState &state, const InputCommand &input, const NavGrid &grid, double dt,
                       double wheelchair_factor) {
    AgentState next = state;
    next.heading = std::isfinite(input.look_yaw) ? input.look_yaw : state.heading;

    const Vec2 forward = from_angle(next.heading);
    const Vec2 left{-forward.y, forward.x};
    Vec2 dir{};
    if (input.forward)
        dir += forward;
    if (input.back)
        dir -= forward;
    if (input.left)
        dir += left;
    if (input.right)
        dir -= left;
    dir = normalized(dir);

    const double speed = state.desired_speed * (state.pushing_wheelchair ? wheelchair_factor : 1.0);
    if (dt <= 0.0 || dir == Vec2{}) {
        next.velocity = {};
        return next;
    }
    const Vec2 target = state.position + dir * (speed * dt);
    next.position = clip_move(grid, state.position, target);
    next.velocity = (next.position - state.position) / dt;
    return next;
}

Vec2 coincident_direction(std::int64_t self_id, std::int64_t other_id) {
    const auto lo = static_cast<std::uint64_t>(std::min(self_id, other_id));
    const auto hi = static_cast<std::uint64_t>(std::max(self_id, other_id));
    const std::uint64_t h = splitmix64(lo * 0x9E3779B97F4A7C15ull ^ splitmix64(hi));
    const double angle = to_unit_double(h) * 2.0 * std::numbers::pi;
    const Vec2 u = from_angle(angle);
    return self_id <= other_id ? u : -u;
}

Vec2 agent_repulsion(const AgentState &self, const AgentState &other, const DynamicsParams &params) {
    const Vec2 diff = self.position - other.position;
    const double d = length(diff);
    const Vec2 n = d > 0.0 ? diff / d : coincident_direction(self.id, other.id);
    return n * (params.a_agent * std::exp((self.radius + other.radius - d) / params.b_agent));
}

Vec2 wall_repulsion(const AgentState &self, const Segment &wall, const DynamicsParams &params) {
    const Vec2 diff = self.position - closest_point(wall, self.position);
    const double d = length(diff);
    Vec2 n;
    if (d > 0.0)
        n = diff / d;
    else {
        const Vec2 along = normalized(wall.b - wall.a);
        n = along == Vec2{} ? Vec2{1.0, 0.0} : Vec2{-along.y, along.x};
    }
    return n * (params.a_wall * std::exp((self.radius - d) / params.b_wall));
}

Vec2 social_accel(const AgentState &self, std::span<const AgentState> neighbors, std::span<const Segment> walls,
                  const DynamicsParams &params) {
    const Vec2 desired = desired_direction(self) * effective_speed(self, params);
    Vec2 acc = (desired - self.velocity) / params.tau;
    for (const auto &other : neighbors)
        acc += agent_repulsion(self, other, params);
    for (const auto &w : walls)
        acc += wall_repulsion(self, w, params);
    return acc;
}

namespace {

void advance_route(AgentState &a, double reach) {
    if (!a.route)
        return;
    const auto &pts = a.route->points;
    while (a.route_index < pts.size() && distance(a.position, pts[a.route_index]) <= reach) {
        // Keep the last point as the target unless there is somewhere beyond it.
        if (a.route_index + 1 == pts.size() && !a.final_target)
            break;
        ++a.route_index;
    }
}

struct CellKey {
    std::int64_t x;
    std::int64_t y;
    bool operator==(const CellKey &) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey &k) const {
        return static_cast<std::size_t>(splitmix64(static_cast<std::uint64_t>(k.x) * 73856093u ^
                                                   static_cast<std::uint64_t>(k.y) * 19349663u));
    }
};

} // namespace

std::vector<AgentState> integrate(std::span<const AgentState> agents, const NavGrid &grid,
                                  const DynamicsParams &params) {
    std::vector<AgentState> next(agents.begin(), agents.end());
    if (next.empty())
        return next;

    const double reach = grid.cell_size() * 0.75;
    for (auto &a : next)
        advance_route(a, reach);

    // Spatial hash over the pre-step positions.
    const double bucket = params.neighbor_radius;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> buckets;
    auto key_of = [&](Vec2 p) {
        return CellKey{static_cast<std::int64_t>(std::floor(p.x / bucket)),
                       static_cast<std::int64_t>(std::floor(p.y / bucket))};
    };
    for (std::size_t i = 0; i < next.size(); ++i)
        buckets[key_of(next[i].position)].push_back(i);

    std::vector<Vec2> accel(next.size());
    std::vector<std::size_t> near;
    std::vector<AgentState> neighbor_states;
    std::vector<Segment> walls;
    for (std::size_t i = 0; i < next.size(); ++i) {
        const AgentState &self = next[i];
        near.clear();
        const CellKey k = key_of(self.position);
        for (std::int64_t dy = -1; dy <= 1; ++dy)
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                auto it = buckets.find({k.x + dx, k.y + dy});
                if (it == buckets.end())
                    continue;
                for (std::size_t j : it->second)
                    if (j != i && distance(next[j].position, self.position) <= params.neighbor_radius)
                        near.push_back(j);
            }
        // Sum in id order so the result is independent of input order.
        std::ranges::sort(near, [&](std::size_t a, std::size_t b) {
            return next[a].id != next[b].id ? next[a].id < next[b].id : next[a].position.x < next[b].position.x;
        });
        neighbor_states.clear();
        for (std::size_t j : near)
            neighbor_states.push_back(next[j]);

        walls.clear();
        if (auto c = grid.cell_of(self.position)) {
            for (std::uint32_t o : grid.nearby_obstacles(*c))
                if (grid.obstacle_active(o))
                    walls.push_back(grid.obstacles()[o].segment);
        }
        accel[i] = social_accel(self, neighbor_states, walls, params);
    }

    for (std::size_t i = 0; i < next.size(); ++i) {
        AgentState &a = next[i];
        Vec2 v = a.velocity + accel[i] * params.dt;
        const double cap = params.speed_cap_factor * effective_speed(a, params);
        const double speed = length(v);
        if (speed > cap)
            v = v * (cap / speed);
        const Vec2 from = a.position;
        const Vec2 to = clip_move(grid, from, from + v * params.dt);
        if (to.x == from.x && v.x * params.dt != 0.0)
            v.x = 0.0;
        if (to.y == from.y && v.y * params.dt != 0.0)
            v.y = 0.0;
        a.position = to;
        a.velocity = v;
        if (length(v) > 1e-9)
            a.heading = std::atan2(v.y, v.x);
    }
    return next;
}

} // namespace eva
