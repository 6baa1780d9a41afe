#pragma once

#include "eva/floorplan.hpp"
#include "eva/geometry.hpp"
#include "eva/labels.hpp"

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace eva {

enum class Adjacency : std::uint8_t { Four, Eight };

enum class CellKind : std::uint8_t { Walkable, Blocked, Door, Exit };

/// Occupancy of one grid cell. `tag` is the door index for Door cells and the
/// exit label index for Exit cells.
struct Cell {
    CellKind kind = CellKind::Walkable;
    std::uint16_t tag = 0;
    bool operator==(const Cell &) const = default;
};

struct GridCell {
    int col = 0;
    int row = 0;
    auto operator<=>(const GridCell &) const = default;
};

struct GridOptions {
    double cell_size = 0.5;
    Adjacency adjacency = Adjacency::Eight;
    /// Obstacles within this distance of a cell are listed in its neighborhood.
    double obstacle_radius = 1.5;
};

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A wall or door segment. Door obstacles only block while the door is closed.
struct Obstacle {
    Segment segment;
    int door = -1;
};

/// Occupancy grid over a floorplan. Immutable; door toggles produce a new
/// revision that shares the static layers with its parent.
class NavGrid {
public:
    double cell_size() const { return cell_size_; }
    Vec2 origin() const { return origin_; }
    int cols() const { return cols_; }
    int rows() const { return rows_; }
    Adjacency adjacency() const { return adjacency_; }
    std::uint64_t revision() const { return revision_; }

    bool in_bounds(GridCell c) const { return c.col >= 0 && c.row >= 0 && c.col < cols_ && c.row < rows_; }
    std::size_t index(GridCell c) const { return static_cast<std::size_t>(c.row) * cols_ + c.col; }
    GridCell cell_at(std::size_t index) const {
        return {static_cast<int>(index % cols_), static_cast<int>(index / cols_)};
    }
    const Cell &at(GridCell c) const { return cells_[index(c)]; }
    bool walkable(GridCell c) const { return in_bounds(c) && at(c).kind != CellKind::Blocked; }
    std::span<const Cell> cells() const { return cells_; }

    /// Cell containing `p`; points on the far bounding edge belong to the last
    /// row/column. Nothing for points outside the grid.
    std::optional<GridCell> cell_of(Vec2 p) const;
    bool walkable(Vec2 p) const;
    Vec2 center(GridCell c) const;
    Box box(GridCell c) const;

    std::span<const Obstacle> obstacles() const;
    bool obstacle_active(std::size_t i) const;
    /// Indices of obstacles near cell `c` (active or not).
    std::span<const std::uint32_t> nearby_obstacles(GridCell c) const;
    /// True when `motion` crosses or touches an active obstacle near its endpoints.
    bool motion_blocked(const Segment &motion) const;

    bool door_open(std::size_t door) const { return door_open_.at(door); }
    std::size_t door_count() const { return door_open_.size(); }
    /// Cells whose squares touch the given door segment.
    std::span<const std::uint32_t> door_cells(std::size_t door) const;

    /// New revision with one door opened or closed. Only cells touching that
    /// door are reclassified.
    NavGrid with_door(std::size_t door, bool open) const;

    std::vector<GridCell> exit_cells(ExitLabel label) const;

private:
    friend NavGrid build_nav_grid(const FloorPlan &, const GridOptions &, std::span<const bool>);

    struct StaticLayers;

    Cell classify(std::size_t index) const;

    double cell_size_ = 0.5;
    Vec2 origin_{};
    int cols_ = 0;
    int rows_ = 0;
    Adjacency adjacency_ = Adjacency::Eight;
    std::uint64_t revision_ = 0;
    std::vector<Cell> cells_;
    std::vector<bool> door_open_;
    std::shared_ptr<const StaticLayers> layers_;
};

/// Rasterizes the plan. A cell is blocked iff its closed square touches a wall
/// or a closed door. Throws GridError for a non-positive cell size or when an
/// exit ends up with no exit cell. `door_open` overrides initial door states.
NavGrid build_nav_grid(const FloorPlan &plan, const GridOptions &options, std::span<const bool> door_open = {});
NavGrid build_nav_grid(const FloorPlan &plan, double cell_size, Adjacency adjacency = Adjacency::Eight);

struct Route {
    std::vector<GridCell> cells;
    /// Cell centers, in the same order as `cells`.
    std::vector<Vec2> points;
    double length_m = 0.0;
};

/// Start or goal outside the grid or inside a blocked cell.
class RouteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Length of one step between adjacent cells.
double step_length(const NavGrid &grid, GridCell a, GridCell b);

/// Shortest route by A* with a Euclidean heuristic. Nothing when unreachable.
std::optional<Route> plan_route(const NavGrid &grid, Vec2 from, Vec2 to);
std::optional<Route> plan_route(const NavGrid &grid, GridCell from, GridCell to);

/// Shortest route to whichever goal cell is closest.
std::optional<Route> plan_route_to_any(const NavGrid &grid, Vec2 from, std::span<const GridCell> goals);
std::optional<Route> plan_route_to_exit(const NavGrid &grid, Vec2 from, ExitLabel label);

/// Single-source shortest path distances over the grid (infinity when
/// unreachable) with parent links for route extraction.
struct PathTree {
    GridCell source;
    std::vector<double> dist;
    std::vector<std::int32_t> parent;
};
PathTree shortest_path_tree(const NavGrid &grid, GridCell source);
std::optional<Route> extract_route(const NavGrid &grid, const PathTree &tree, GridCell goal);

/// Exit reached by following the sign chain that starts at sign `sign`.
std::optional<ExitLabel> signage_terminus(const FloorPlan &plan, std::size_t sign);

/// Walks to the nearest reachable sign, then follows the sign chain to its
/// exit. When `preferred` is given, only signs whose chain ends at that exit
/// are candidates (falling back to all signs if none is reachable). Throws
/// RouteError when no sign is reachable.
Route signage_route(const FloorPlan &plan, const NavGrid &grid, Vec2 from,
                    std::optional<ExitLabel> preferred = std::nullopt);

} // namespace eva
