#include "eva/navgrid.hpp"

#include "../support/oracles.hpp"
#include "../support/paths.hpp"
#include "../support/plans.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace eva;

namespace {

NavGrid grid_of(const oracle::BoolGrid &g, Adjacency adj = Adjacency::Eight) {
    return build_nav_grid(testplans::plan_from_grid(g), 1.0, adj);
}

} // namespace

TEST_CASE("rasterization reproduces the source occupancy") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto g = oracle::random_grid(rng, 20, 0.3);
        const NavGrid n = grid_of(g);
        REQUIRE(n.cols() == g.cols);
        REQUIRE(n.rows() == g.rows);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c)
                REQUIRE(n.walkable(GridCell{c, r}) == g.free(c, r));
    }
}

TEST_CASE("route lengths match the Dijkstra and BFS oracles") {
    std::mt19937_64 rng(17);
    int reachable = 0;
    for (int i = 0; i < 300; ++i) {
        const auto g = oracle::random_grid(rng, 20, 0.25);
        const bool eight = i % 3 != 0;
        const NavGrid n = grid_of(g, eight ? Adjacency::Eight : Adjacency::Four);
        std::uniform_int_distribution<int> cc(0, g.cols - 1), rr(0, g.rows - 1);
        const int sc = cc(rng), sr = rr(rng), gc = cc(rng), gr = rr(rng);
        if (!g.free(sc, sr) || !g.free(gc, gr)) {
            CHECK_THROWS_AS(plan_route(n, GridCell{sc, sr}, GridCell{gc, gr}), RouteError);
            continue;
        }
        const auto want = eight ? oracle::dijkstra8(g, sc, sr, gc, gr) : oracle::bfs4(g, sc, sr, gc, gr);
        const auto got = plan_route(n, GridCell{sc, sr}, GridCell{gc, gr});
        REQUIRE(got.has_value() == want.has_value());
        if (!got)
            continue;
        ++reachable;
        const double expect = double(want->straight) + double(want->diagonal) * std::numbers::sqrt2;
        REQUIRE(got->length_m == expect);
        // route is a connected chain of walkable cells from start to goal
        REQUIRE(got->cells.front() == GridCell{sc, sr});
        REQUIRE(got->cells.back() == GridCell{gc, gr});
        for (std::size_t k = 1; k < got->cells.size(); ++k) {
            const auto a = got->cells[k - 1], b = got->cells[k];
            REQUIRE(std::abs(a.col - b.col) <= 1);
            REQUIRE(std::abs(a.row - b.row) <= 1);
            if (!eight)
                REQUIRE(std::abs(a.col - b.col) + std::abs(a.row - b.row) == 1);
            REQUIRE(n.walkable(b));
        }
    }
    CHECK(reachable > 100);
}

TEST_CASE("shortest path tree agrees with point-to-point routes") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 40; ++i) {
        const auto g = oracle::random_grid(rng, 15, 0.2);
        const NavGrid n = grid_of(g);
        if (!g.free(0, 0))
            continue;
        const PathTree t = shortest_path_tree(n, {0, 0});
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) {
                if (!g.free(c, r))
                    continue;
                const auto route = plan_route(n, GridCell{0, 0}, GridCell{c, r});
                const double d = t.dist[n.index({c, r})];
                if (!route) {
                    REQUIRE(std::isinf(d));
                    continue;
                }
                REQUIRE(d == doctest::Approx(route->length_m).epsilon(1e-12));
                const auto ex = extract_route(n, t, {c, r});
                REQUIRE(ex);
                REQUIRE(ex->length_m == route->length_m);
            }
    }
}

TEST_CASE("diagonal steps cannot squeeze between two blocked cells") {
    oracle::BoolGrid g{2, 2, {0, 1, 1, 0}}; // free (0,0) and (1,1) only
    const NavGrid n = grid_of(g);
    CHECK_FALSE(plan_route(n, GridCell{0, 0}, GridCell{1, 1}));
    oracle::BoolGrid h{2, 2, {0, 1, 0, 0}};
    const auto r = plan_route(grid_of(h), GridCell{0, 0}, GridCell{1, 1});
    REQUIRE(r);
    CHECK(r->cells.size() == 2);
}

TEST_CASE("doors toggle their cells only") {
    const FloorPlan p = parse_floorplan(testplans::tiny_plan_json());
    const NavGrid open = build_nav_grid(p, 0.5);
    const NavGrid shut = open.with_door(0, false);
    CHECK(shut.revision() == open.revision() + 1);
    CHECK_FALSE(shut.door_open(0));
    const auto cells = open.door_cells(0);
    REQUIRE_FALSE(cells.empty());
    std::set<std::uint32_t> door_set(cells.begin(), cells.end());
    for (std::size_t i = 0; i < open.cells().size(); ++i) {
        if (door_set.contains(static_cast<std::uint32_t>(i)))
            CHECK(shut.cells()[i].kind == CellKind::Blocked);
        else
            CHECK(shut.cells()[i] == open.cells()[i]);
    }
    CHECK(plan_route(open, p.waypoint("F"), p.waypoint("ES")));
    CHECK_FALSE(plan_route(shut, p.waypoint("F"), p.waypoint("ES")));
    CHECK(shut.with_door(0, true).cells().size() == open.cells().size());
    for (std::size_t i = 0; i < open.cells().size(); ++i)
        CHECK(shut.with_door(0, true).cells()[i] == open.cells()[i]);
    CHECK_THROWS_AS(open.with_door(5, true), GridError);
}

TEST_CASE("exit cells and routes to exits") {
    const FloorPlan p = load_floorplan(testpaths::building());
    const NavGrid g = build_nav_grid(p, 0.5);
    for (auto l : kExitLabels) {
        CAPTURE(to_string(l));
        const auto cells = g.exit_cells(l);
        REQUIRE_FALSE(cells.empty());
        for (auto c : cells)
            CHECK(g.at(c).kind == CellKind::Exit);
        const auto r = plan_route_to_exit(g, p.waypoint("F"), l);
        REQUIRE(r);
        CHECK(g.at(r->cells.back()).kind == CellKind::Exit);
    }
    CHECK_THROWS_AS(build_nav_grid(p, 0.0), GridError);
    CHECK_THROWS_AS(plan_route(g, Vec2{-50, -50}, p.waypoint("F")), RouteError);
}

TEST_CASE("signage routes follow the chain") {
    const FloorPlan p = load_floorplan(testpaths::building());
    const NavGrid g = build_nav_grid(p, 0.5);
    for (std::size_t i = 0; i < p.signage.size(); ++i)
        CHECK(signage_terminus(p, i).has_value());

    // From the ward the nearest sign leads to D.
    const Route free = signage_route(p, g, p.waypoint("F"));
    CHECK(g.at(free.cells.back()).kind == CellKind::Exit);
    CHECK(g.at(free.cells.back()).tag == index_of(ExitLabel::D));

    for (auto l : kExitLabels) {
        const Route r = signage_route(p, g, p.waypoint("F"), l);
        CAPTURE(to_string(l));
        CHECK(g.at(r.cells.back()).tag == index_of(l));
        // never shorter than the unconstrained shortest route
        CHECK(r.length_m >= plan_route_to_exit(g, p.waypoint("F"), l)->length_m - 1e-9);
    }
}
