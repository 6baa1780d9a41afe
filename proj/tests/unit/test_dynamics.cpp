#include "eva/dynamics.hpp"

#include "../support/oracles.hpp"
#include "../support/paths.hpp"
#include "../support/plans.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace eva;

namespace {

// Empty 200 x 20 m hall: no walls, so only the driving term acts.
NavGrid open_hall() {
    FloorPlan p;
    p.waypoints["E"] = {0, 0};
    p.waypoints["F"] = {200, 20};
    return build_nav_grid(p, 0.5);
}

AgentState walker(std::int64_t id, Vec2 at, Vec2 goal) {
    AgentState a;
    a.id = id;
    a.position = at;
    a.final_target = goal;
    return a;
}

} // namespace

TEST_CASE("free agent relaxes toward the desired speed like the exponential") {
    const NavGrid hall = open_hall();
    DynamicsParams p; // dt 0.05, tau 0.5, v0 1.5
    std::vector<AgentState> one{walker(1, {2, 10}, {199, 10})};
    double worst = 0.0;
    for (int k = 1; k <= 100; ++k) {
        one = integrate(one, hall, p);
        const double t = k * p.dt;
        const double want = oracle::relaxation_speed(p.desired_speed, p.tau, t);
        worst = std::max(worst, std::abs(length(one[0].velocity) - want) / p.desired_speed);
    }
    MESSAGE("largest deviation from v0(1-exp(-t/tau)): " << worst * 100 << "% of v0");
    CHECK(worst <= 0.02);
    CHECK(length(one[0].velocity) == doctest::Approx(p.desired_speed).epsilon(0.001));
}

TEST_CASE("pair repulsion is antisymmetric") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const DynamicsParams p;
    for (int i = 0; i < 5000; ++i) {
        AgentState a = walker(i, {u(rng), u(rng)}, {0, 0});
        AgentState b = walker(i + 7919, {u(rng), u(rng)}, {0, 0});
        if (i % 50 == 0)
            b.position = a.position; // coincident
        const Vec2 fab = agent_repulsion(a, b, p);
        const Vec2 fba = agent_repulsion(b, a, p);
        REQUIRE(std::abs(fab.x + fba.x) <= 1e-9);
        REQUIRE(std::abs(fab.y + fba.y) <= 1e-9);
        REQUIRE(is_finite(fab));
    }
    const Vec2 d = coincident_direction(3, 9);
    CHECK(length(d) == doctest::Approx(1.0));
    CHECK(coincident_direction(9, 3) == -d);
}

TEST_CASE("repulsion pushes apart and decays with distance") {
    const DynamicsParams p;
    const AgentState a = walker(1, {0, 0}, {0, 0});
    const Vec2 near = agent_repulsion(a, walker(2, {0.6, 0}, {0, 0}), p);
    const Vec2 far = agent_repulsion(a, walker(2, {1.2, 0}, {0, 0}), p);
    CHECK(near.x < 0.0);
    CHECK(std::abs(near.x) > std::abs(far.x));
    const Vec2 w = wall_repulsion(a, {{-5, 0.4}, {5, 0.4}}, p);
    CHECK(w.y < 0.0);
}

TEST_CASE("integration does not depend on agent order") {
    const NavGrid hall = open_hall();
    const DynamicsParams p;
    std::vector<AgentState> crowd;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> x(40, 46), y(8, 12);
    for (int i = 0; i < 40; ++i)
        crowd.push_back(walker(i, {x(rng), y(rng)}, {150, 10}));
    auto shuffled = crowd;
    std::reverse(shuffled.begin(), shuffled.end());
    for (int k = 0; k < 50; ++k) {
        crowd = integrate(crowd, hall, p);
        shuffled = integrate(shuffled, hall, p);
    }
    std::ranges::sort(shuffled, {}, &AgentState::id);
    for (std::size_t i = 0; i < crowd.size(); ++i) {
        CHECK(crowd[i].position == shuffled[i].position);
        CHECK(crowd[i].velocity == shuffled[i].velocity);
    }
}

TEST_CASE("no wall penetration over 10,000 random ticks") {
    const FloorPlan plan = load_floorplan(testpaths::building());
    const NavGrid grid = build_nav_grid(plan, 0.5);
    std::vector<std::size_t> open_cells;
    for (std::size_t i = 0; i < grid.cells().size(); ++i)
        if (grid.cells()[i].kind == CellKind::Walkable)
            open_cells.push_back(i);
    std::mt19937_64 rng(99);
    auto random_point = [&] {
        const auto c = grid.cell_at(open_cells[rng() % open_cells.size()]);
        return grid.center(c);
    };

    DynamicsParams p;
    std::vector<AgentState> agents;
    for (int i = 0; i < 12; ++i)
        agents.push_back(walker(i, random_point(), random_point()));

    std::size_t crossings = 0;
    for (int tick = 0; tick < 10000; ++tick) {
        // Occasionally retarget, sometimes straight through a wall.
        if (tick % 200 == 0)
            for (auto &a : agents) {
                a.route.reset();
                a.final_target = random_point();
            }
        const auto next = integrate(agents, grid, p);
        for (std::size_t i = 0; i < next.size(); ++i) {
            const Segment motion{agents[i].position, next[i].position};
            REQUIRE(grid.walkable(next[i].position));
            for (std::size_t o = 0; o < grid.obstacles().size(); ++o)
                if (grid.obstacle_active(o) && segments_intersect(motion, grid.obstacles()[o].segment))
                    ++crossings;
        }
        agents = next;
    }
    CHECK(crossings == 0);
}

TEST_CASE("avatar walks a 15 m corridor in 10 s") {
    const FloorPlan plan = load_floorplan(testpaths::corridor());
    const NavGrid grid = build_nav_grid(plan, 0.5);
    AgentState a;
    a.position = plan.waypoint("E");
    const double start_x = a.position.x;
    InputCommand fwd;
    fwd.forward = true;
    fwd.look_yaw = 0.0;
    const double dt = 0.05;
    int ticks = 0;
    while (a.position.x - start_x < 15.0 - 1e-9 && ticks < 1000) {
        a = step_avatar(a, fwd, grid, dt);
        ++ticks;
    }
    CHECK(ticks * dt == doctest::Approx(10.0).epsilon(0.0051));
    CHECK(std::abs(ticks - 200) <= 1);
    CHECK(a.position.y == plan.waypoint("E").y);
}

TEST_CASE("avatar input mapping") {
    const NavGrid hall = open_hall();
    AgentState a;
    a.position = {100, 10};
    InputCommand c;
    c.look_yaw = std::numbers::pi / 2; // facing +y
    c.forward = true;
    auto n = step_avatar(a, c, hall, 0.05);
    CHECK(n.position.y > a.position.y);
    CHECK(n.position.x == doctest::Approx(a.position.x));
    c.forward = false;
    c.left = true; // left of +y is -x
    n = step_avatar(a, c, hall, 0.05);
    CHECK(n.position.x < a.position.x);
    c.left = false;
    n = step_avatar(a, c, hall, 0.05);
    CHECK(n.position == a.position);
    CHECK(n.velocity == Vec2{});
    // pushing the wheelchair slows the avatar down
    a.pushing_wheelchair = true;
    c.forward = true;
    n = step_avatar(a, c, hall, 0.05, 0.8);
    CHECK(distance(n.position, a.position) == doctest::Approx(1.5 * 0.8 * 0.05));
}

TEST_CASE("clip_move never lands in a blocked cell") {
    const FloorPlan plan = parse_floorplan(testplans::tiny_plan_json());
    const NavGrid g = build_nav_grid(plan, 0.5).with_door(0, false);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> x(0.3, 9.7), y(0.3, 3.7), d(-1.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const Vec2 from{x(rng), y(rng)};
        if (!g.walkable(from))
            continue;
        const Vec2 to = from + Vec2{d(rng), d(rng)};
        const Vec2 got = clip_move(g, from, to);
        REQUIRE(g.walkable(got));
        REQUIRE_FALSE(g.motion_blocked({from, got}));
    }
}

TEST_CASE("parameter validation") {
    DynamicsParams p;
    CHECK_NOTHROW(p.validate());
    p.tau = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.dt = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
