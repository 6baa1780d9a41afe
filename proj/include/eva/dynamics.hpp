#pragma once

#include "eva/geometry.hpp"
#include "eva/navgrid.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eva {

/// Avatar walking speed in m/s.
inline constexpr double kAvatarSpeed = 1.5;

/// Social-force constants and integration settings. Accelerations are per
/// unit mass (m/s^2).
struct DynamicsParams {
    double tau = 0.5;              ///< velocity relaxation time (s)
    double a_agent = 2.0;          ///< agent repulsion strength
    double b_agent = 0.3;          ///< agent repulsion range (m)
    double a_wall = 4.0;           ///< wall repulsion strength
    double b_wall = 0.2;           ///< wall repulsion range (m)
    double dt = 0.05;              ///< tick (s)
    double speed_cap_factor = 1.25;
    double radius = 0.25;          ///< default body radius (m)
    double desired_speed = kAvatarSpeed;
    double wheelchair_factor = 0.8; ///< desired-speed multiplier while pushing
    double neighbor_radius = 2.0;  ///< agents farther apart than this do not interact

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

struct InputCommand {
    bool forward = false;
    bool back = false;
    bool left = false;
    bool right = false;
    double look_yaw = 0.0;
    bool interact = false;

    bool operator==(const InputCommand &) const = default;
};

struct AgentState {
    std::int64_t id = 0;
    Vec2 position;
    Vec2 velocity;
    double heading = 0.0;
    double radius = 0.25;
    double desired_speed = kAvatarSpeed;
    bool pushing_wheelchair = false;
    std::optional<Route> route;
    /// Next route point to steer toward.
    std::size_t route_index = 0;
    /// Point steered toward once the route is exhausted (e.g. just past an
    /// exit line); none means stop at the last route point.
    std::optional<Vec2> final_target;

    bool operator==(const AgentState &) const;
};

/// Desired speed after the wheelchair multiplier.
double effective_speed(const AgentState &a, const DynamicsParams &params);

/// Unit direction toward the current steering target, or zero when the
/// agent has nowhere to go.
Vec2 desired_direction(const AgentState &a);

/// Moves from `from` toward `to`, sliding along blocked axes. Returns the
/// accepted end point; never lands in a blocked cell or crosses an active
/// obstacle.
Vec2 clip_move(const NavGrid &grid, Vec2 from, Vec2 to);

/// Direct avatar kinematics from keyboard/mouse input.
AgentState step_avatar(const AgentState &state, const InputCommand &input, const NavGrid &grid, double dt,
                       double wheelchair_factor = DynamicsParams{}.wheelchair_factor);

/// Driving term toward the route plus exponential repulsion from neighbors
/// and wall segments.
Vec2 social_accel(const AgentState &self, std::span<const AgentState> neighbors, std::span<const Segment> walls,
                  const DynamicsParams &params);

/// Repulsion on `self` from one neighbor. Antisymmetric in the pair.
Vec2 agent_repulsion(const AgentState &self, const AgentState &other, const DynamicsParams &params);
Vec2 wall_repulsion(const AgentState &self, const Segment &wall, const DynamicsParams &params);

/// Unit direction used to separate two coincident agents; depends only on
/// the ordered id pair and flips sign when the pair is swapped.
Vec2 coincident_direction(std::int64_t self_id, std::int64_t other_id);

/// One semi-implicit Euler tick for all agents. Forces are evaluated from the
/// input states only, so the result does not depend on input order.
std::vector<AgentState> integrate(std::span<const AgentState> agents, const NavGrid &grid,
                                  const DynamicsParams &params);

} // namespace eva
