#include "eva/navgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace eva {

struct NavGrid::StaticLayers {
    std::vector<Obstacle> obstacles;
    std::vector<std::uint8_t> wall_hit;
    std::vector<std::int8_t> exit_tag; // -1 when the cell touches no exit
    // CSR: doors touching each cell
    std::vector<std::uint32_t> cell_door_offsets;
    std::vector<std::uint32_t> cell_doors;
    // cells touching each door
    std::vector<std::vector<std::uint32_t>> door_cells;
    // CSR: obstacles near each cell
    std::vector<std::uint32_t> near_offsets;
    std::vector<std::uint32_t> near;
};

std::optional<GridCell> NavGrid::cell_of(Vec2 p) const {
    if (!is_finite(p))
        return std::nullopt;
    const double fx = (p.x - origin_.x) / cell_size_;
    const double fy = (p.y - origin_.y) / cell_size_;
    if (fx < 0.0 || fy < 0.0 || fx > cols_ || fy > rows_)
        return std::nullopt;
    const int col = std::min(static_cast<int>(std::floor(fx)), cols_ - 1);
    const int row = std::min(static_cast<int>(std::floor(fy)), rows_ - 1);
    return GridCell{col, row};
}

bool NavGrid::walkable(Vec2 p) const {
    auto c = cell_of(p);
    return c && walkable(*c);
}

Vec2 NavGrid::center(GridCell c) const {
    return {origin_.x + (c.col + 0.5) * cell_size_, origin_.y + (c.row + 0.5) * cell_size_};
}

Box NavGrid::box(GridCell c) const {
    const Vec2 lo{origin_.x + c.col * cell_size_, origin_.y + c.row * cell_size_};
    return {lo, {lo.x + cell_size_, lo.y + cell_size_}};
}

std::span<const Obstacle> NavGrid::obstacles() const { return layers_->obstacles; }

bool NavGrid::obstacle_active(std::size_t i) const {
    const auto &o = layers_->obstacles[i];
    return o.door < 0 || !door_open_[static_cast<std::size_t>(o.door)];
}

std::span<const std::uint32_t> NavGrid::nearby_obstacles(GridCell c) const {
    const std::size_t i = index(c);
    const auto &l = *layers_;
    return std::span<const std::uint32_t>(l.near).subspan(l.near_offsets[i], l.near_offsets[i + 1] - l.near_offsets[i]);
}

bool NavGrid::motion_blocked(const Segment &motion) const {
    auto check = [&](std::optional<GridCell> c) {
        if (!c)
            return true;
        for (std::uint32_t k : nearby_obstacles(*c))
            if (obstacle_active(k) && segments_intersect(motion, layers_->obstacles[k].segment))
                return true;
        return false;
    };
    const auto a = cell_of(motion.a);
    const auto b = cell_of(motion.b);
    return check(a) || (b != a && check(b));
}

std::span<const std::uint32_t> NavGrid::door_cells(std::size_t door) const { return layers_->door_cells.at(door); }

Cell NavGrid::classify(std::size_t i) const {
    const auto &l = *layers_;
    if (l.wall_hit[i])
        return {CellKind::Blocked, 0};
    const std::uint32_t begin = l.cell_door_offsets[i];
    const std::uint32_t end = l.cell_door_offsets[i + 1];
    for (std::uint32_t k = begin; k < end; ++k)
        if (!door_open_[l.cell_doors[k]])
            return {CellKind::Blocked, 0};
    if (l.exit_tag[i] >= 0)
        return {CellKind::Exit, static_cast<std::uint16_t>(l.exit_tag[i])};
    if (begin < end)
        return {CellKind::Door, static_cast<std::uint16_t>(l.cell_doors[begin])};
    return {CellKind::Walkable, 0};
}

NavGrid NavGrid::with_door(std::size_t door, bool open) const {
    if (door >= door_open_.size())
        throw GridError("no door with index " + std::to_string(door));
    NavGrid next = *this;
    next.revision_ = revision_ + 1;
    next.door_open_[door] = open;
    for (std::uint32_t i : layers_->door_cells[door])
        next.cells_[i] = next.classify(i);
    return next;
}

std::vector<GridCell> NavGrid::exit_cells(ExitLabel label) const {
    std::vector<GridCell> out;
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (cells_[i].kind == CellKind::Exit && cells_[i].tag == index_of(label))
            out.push_back(cell_at(i));
    return out;
}

namespace {

// Calls fn(index) for every cell whose closed square touches the segment.
template <class Fn>
void for_cells_touching(const NavGrid &g, const Segment &s, Fn &&fn) {
    const double cs = g.cell_size();
    const Vec2 o = g.origin();
    auto clampc = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    const int c0 = clampc(static_cast<int>(std::floor((std::min(s.a.x, s.b.x) - o.x) / cs)) - 1, g.cols());
    const int c1 = clampc(static_cast<int>(std::floor((std::max(s.a.x, s.b.x) - o.x) / cs)) + 1, g.cols());
    const int r0 = clampc(static_cast<int>(std::floor((std::min(s.a.y, s.b.y) - o.y) / cs)) - 1, g.rows());
    const int r1 = clampc(static_cast<int>(std::floor((std::max(s.a.y, s.b.y) - o.y) / cs)) + 1, g.rows());
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            if (segment_touches_box(s, g.box({c, r})))
                fn(g.index({c, r}));
}

} // namespace

NavGrid build_nav_grid(const FloorPlan &plan, const GridOptions &options, std::span<const bool> door_open) {
    if (!(options.cell_size > 0.0) || !std::isfinite(options.cell_size))
        throw GridError("cell_size must be positive");
    if (!door_open.empty() && door_open.size() != plan.doors.size())
        throw GridError("door state count does not match the plan");

    NavGrid g;
    const Box b = plan.bounds();
    g.cell_size_ = options.cell_size;
    g.adjacency_ = options.adjacency;
    g.origin_ = b.min;
    auto span_cells = [&](double extent) {
        return std::max(1, static_cast<int>(std::ceil(extent / options.cell_size - 1e-9)));
    };
    g.cols_ = span_cells(b.max.x - b.min.x);
    g.rows_ = span_cells(b.max.y - b.min.y);
    const std::size_t n = static_cast<std::size_t>(g.cols_) * g.rows_;

    auto layers = std::make_shared<NavGrid::StaticLayers>();
    layers->wall_hit.assign(n, 0);
    layers->exit_tag.assign(n, -1);
    layers->door_cells.resize(plan.doors.size());

    g.door_open_.resize(plan.doors.size());
    for (std::size_t d = 0; d < plan.doors.size(); ++d)
        g.door_open_[d] = door_open.empty() ? plan.doors[d].initially_open : door_open[d];

    for (const auto &w : plan.walls) {
        layers->obstacles.push_back({w, -1});
        for_cells_touching(g, w, [&](std::size_t i) { layers->wall_hit[i] = 1; });
    }
    std::vector<std::vector<std::uint32_t>> doors_of_cell(n);
    for (std::size_t d = 0; d < plan.doors.size(); ++d) {
        layers->obstacles.push_back({plan.doors[d].segment, static_cast<int>(d)});
        for_cells_touching(g, plan.doors[d].segment, [&](std::size_t i) {
            layers->door_cells[d].push_back(static_cast<std::uint32_t>(i));
            doors_of_cell[i].push_back(static_cast<std::uint32_t>(d));
        });
    }
    for (const auto &e : plan.exits)
        for_cells_touching(g, e.segment, [&](std::size_t i) {
            if (layers->exit_tag[i] < 0)
                layers->exit_tag[i] = static_cast<std::int8_t>(index_of(e.label));
        });

    layers->cell_door_offsets.reserve(n + 1);
    layers->cell_door_offsets.push_back(0);
    for (const auto &list : doors_of_cell) {
        layers->cell_doors.insert(layers->cell_doors.end(), list.begin(), list.end());
        layers->cell_door_offsets.push_back(static_cast<std::uint32_t>(layers->cell_doors.size()));
    }

    // Obstacle neighborhoods: every obstacle within obstacle_radius of any
    // point of the cell.
    std::vector<std::vector<std::uint32_t>> near(n);
    const double reach = options.obstacle_radius + options.cell_size * std::numbers::sqrt2 / 2.0;
    for (std::size_t k = 0; k < layers->obstacles.size(); ++k) {
        const Segment &s = layers->obstacles[k].segment;
        const double cs = options.cell_size;
        const int c0 = std::max(0, static_cast<int>(std::floor((std::min(s.a.x, s.b.x) - reach - g.origin_.x) / cs)));
        const int c1 = std::min(g.cols_ - 1, static_cast<int>(std::floor((std::max(s.a.x, s.b.x) + reach - g.origin_.x) / cs)));
        const int r0 = std::max(0, static_cast<int>(std::floor((std::min(s.a.y, s.b.y) - reach - g.origin_.y) / cs)));
        const int r1 = std::min(g.rows_ - 1, static_cast<int>(std::floor((std::max(s.a.y, s.b.y) + reach - g.origin_.y) / cs)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c)
                if (distance_to_segment(s, g.center({c, r})) <= reach)
                    near[g.index({c, r})].push_back(static_cast<std::uint32_t>(k));
    }
    layers->near_offsets.reserve(n + 1);
    layers->near_offsets.push_back(0);
    for (const auto &list : near) {
        layers->near.insert(layers->near.end(), list.begin(), list.end());
        layers->near_offsets.push_back(static_cast<std::uint32_t>(layers->near.size()));
    }

    g.layers_ = std::move(layers);
    g.cells_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.cells_[i] = g.classify(i);

    for (const auto &e : plan.exits)
        if (g.exit_cells(e.label).empty())
            throw GridError("exit " + to_string(e.label) + " has no exit cell at cell_size " +
                            std::to_string(options.cell_size));
    return g;
}

NavGrid build_nav_grid(const FloorPlan &plan, double cell_size, Adjacency adjacency) {
    GridOptions opt;
    opt.cell_size = cell_size;
    opt.adjacency = adjacency;
    return build_nav_grid(plan, opt);
}

double step_length(const NavGrid &grid, GridCell a, GridCell b) {
    const bool diagonal = a.col != b.col && a.row != b.row;
    return diagonal ? grid.cell_size() * std::numbers::sqrt2 : grid.cell_size();
}

namespace {

constexpr std::array<std::array<int, 2>, 8> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

template <class Fn>
void for_neighbors(const NavGrid &g, GridCell c, Fn &&fn) {
    const int count = g.adjacency() == Adjacency::Eight ? 8 : 4;
    for (int k = 0; k < count; ++k) {
        const GridCell n{c.col + kSteps[k][0], c.row + kSteps[k][1]};
        if (!g.walkable(n))
            continue;
        if (k >= 4) {
            // No squeezing between two blocked orthogonal neighbors.
            const bool side_a = g.walkable(GridCell{c.col + kSteps[k][0], c.row});
            const bool side_b = g.walkable(GridCell{c.col, c.row + kSteps[k][1]});
            if (!side_a && !side_b)
                continue;
        }
        fn(n);
    }
}

GridCell require_walkable(const NavGrid &g, Vec2 p, const char *what) {
    auto c = g.cell_of(p);
    if (!c)
        throw RouteError(std::string(what) + " point lies outside the grid");
    if (!g.walkable(*c))
        throw RouteError(std::string(what) + " point lies in a blocked cell");
    return *c;
}

Route make_route(const NavGrid &g, std::vector<GridCell> cells) {
    Route r;
    r.points.reserve(cells.size());
    std::size_t straight = 0;
    std::size_t diagonal = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        r.points.push_back(g.center(cells[i]));
        if (i > 0) {
            if (cells[i].col != cells[i - 1].col && cells[i].row != cells[i - 1].row)
                ++diagonal;
            else
                ++straight;
        }
    }
    // Summed by step kind so equal-length routes compare exactly.
    r.length_m = g.cell_size() * static_cast<double>(straight) +
                 g.cell_size() * std::numbers::sqrt2 * static_cast<double>(diagonal);
    r.cells = std::move(cells);
    return r;
}

std::vector<GridCell> unwind(const NavGrid &g, const std::vector<std::int32_t> &parent, std::size_t goal) {
    std::vector<GridCell> cells;
    for (std::int64_t i = static_cast<std::int64_t>(goal); i >= 0; i = parent[static_cast<std::size_t>(i)])
        cells.push_back(g.cell_at(static_cast<std::size_t>(i)));
    std::ranges::reverse(cells);
    return cells;
}

struct QueueItem {
    double f;
    double g;
    std::size_t index;
    bool operator>(const QueueItem &o) const {
        if (f != o.f)
            return f > o.f;
        if (g != o.g)
            return g < o.g;
        return index > o.index;
    }
};

using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

} // namespace

std::optional<Route> plan_route(const NavGrid &grid, GridCell from, GridCell to) {
    if (!grid.in_bounds(from) || !grid.in_bounds(to))
        throw RouteError("route endpoint outside the grid");
    if (!grid.walkable(from) || !grid.walkable(to))
        throw RouteError("route endpoint lies in a blocked cell");

    const std::size_t n = grid.cells().size();
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    const Vec2 goal_pt = grid.center(to);
    auto h = [&](GridCell c) { return distance(grid.center(c), goal_pt); };

    MinQueue open;
    best[grid.index(from)] = 0.0;
    open.push({h(from), 0.0, grid.index(from)});
    const std::size_t goal = grid.index(to);
    while (!open.empty()) {
        const QueueItem top = open.top();
        open.pop();
        if (closed[top.index])
            continue;
        closed[top.index] = 1;
        if (top.index == goal)
            return make_route(grid, unwind(grid, parent, goal));
        const GridCell c = grid.cell_at(top.index);
        for_neighbors(grid, c, [&](GridCell nb) {
            const std::size_t ni = grid.index(nb);
            if (closed[ni])
                return;
            const double g = top.g + step_length(grid, c, nb);
            if (g < best[ni]) {
                best[ni] = g;
                parent[ni] = static_cast<std::int32_t>(top.index);
                open.push({g + h(nb), g, ni});
            }
        });
    }
    return std::nullopt;
}

std::optional<Route> plan_route(const NavGrid &grid, Vec2 from, Vec2 to) {
    const GridCell a = require_walkable(grid, from, "start");
    const GridCell b = require_walkable(grid, to, "goal");
    return plan_route(grid, a, b);
}

PathTree shortest_path_tree(const NavGrid &grid, GridCell source) {
    if (!grid.walkable(source))
        throw RouteError("route start lies in a blocked cell or outside the grid");
    const std::size_t n = grid.cells().size();
    PathTree tree{source, std::vector<double>(n, std::numeric_limits<double>::infinity()),
                  std::vector<std::int32_t>(n, -1)};
    std::vector<std::uint8_t> closed(n, 0);
    MinQueue open;
    tree.dist[grid.index(source)] = 0.0;
    open.push({0.0, 0.0, grid.index(source)});
    while (!open.empty()) {
        const QueueItem top = open.top();
        open.pop();
        if (closed[top.index])
            continue;
        closed[top.index] = 1;
        const GridCell c = grid.cell_at(top.index);
        for_neighbors(grid, c, [&](GridCell nb) {
            const std::size_t ni = grid.index(nb);
            const double g = top.g + step_length(grid, c, nb);
            if (!closed[ni] && g < tree.dist[ni]) {
                tree.dist[ni] = g;
                tree.parent[ni] = static_cast<std::int32_t>(top.index);
                open.push({g, g, ni});
            }
        });
    }
    return tree;
}

std::optional<Route> extract_route(const NavGrid &grid, const PathTree &tree, GridCell goal) {
    if (!grid.in_bounds(goal) || !std::isfinite(tree.dist[grid.index(goal)]))
        return std::nullopt;
    return make_route(grid, unwind(grid, tree.parent, grid.index(goal)));
}

std::optional<Route> plan_route_to_any(const NavGrid &grid, Vec2 from, std::span<const GridCell> goals) {
    const GridCell start = require_walkable(grid, from, "start");
    const PathTree tree = shortest_path_tree(grid, start);
    std::optional<GridCell> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (GridCell g : goals) {
        if (!grid.in_bounds(g))
            continue;
        const double d = tree.dist[grid.index(g)];
        if (d < best_d) {
            best_d = d;
            best = g;
        }
    }
    if (!best)
        return std::nullopt;
    return extract_route(grid, tree, *best);
}

std::optional<Route> plan_route_to_exit(const NavGrid &grid, Vec2 from, ExitLabel label) {
    const auto goals = grid.exit_cells(label);
    return plan_route_to_any(grid, from, goals);
}

std::optional<ExitLabel> signage_terminus(const FloorPlan &plan, std::size_t sign) {
    std::size_t cur = sign;
    for (std::size_t steps = 0; steps <= plan.signage.size(); ++steps) {
        const SignNode &node = plan.signage.at(cur);
        if (node.exit)
            return node.exit;
        if (!node.next)
            return std::nullopt;
        auto nxt = plan.sign_index(*node.next);
        if (!nxt)
            return std::nullopt;
        cur = *nxt;
    }
    return std::nullopt;
}

namespace {

void append_leg(std::vector<GridCell> &cells, const Route &leg) {
    for (GridCell c : leg.cells)
        if (cells.empty() || cells.back() != c)
            cells.push_back(c);
}

} // namespace

Route signage_route(const FloorPlan &plan, const NavGrid &grid, Vec2 from, std::optional<ExitLabel> preferred) {
    const GridCell start = require_walkable(grid, from, "start");
    const PathTree tree = shortest_path_tree(grid, start);

    auto pick = [&](bool only_preferred) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < plan.signage.size(); ++i) {
            if (only_preferred && signage_terminus(plan, i) != preferred)
                continue;
            auto c = grid.cell_of(plan.signage[i].at);
            if (!c || !grid.walkable(*c))
                continue;
            const double d = tree.dist[grid.index(*c)];
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };
    std::optional<std::size_t> first = preferred ? pick(true) : std::nullopt;
    if (!first)
        first = pick(false);
    if (!first)
        throw RouteError("no emergency sign is reachable from the start point");

    std::vector<GridCell> cells;
    append_leg(cells, *extract_route(grid, tree, *grid.cell_of(plan.signage[*first].at)));

    std::size_t cur = *first;
    for (std::size_t steps = 0; steps <= plan.signage.size(); ++steps) {
        const SignNode &node = plan.signage[cur];
        const Vec2 here = grid.center(cells.back());
        if (node.exit) {
            auto leg = plan_route_to_exit(grid, here, *node.exit);
            if (!leg)
                throw RouteError("exit " + to_string(*node.exit) + " is unreachable from sign '" + node.id + "'");
            append_leg(cells, *leg);
            return make_route(grid, std::move(cells));
        }
        auto nxt = node.next ? plan.sign_index(*node.next) : std::nullopt;
        if (!nxt)
            throw RouteError("sign '" + node.id + "' has no successor");
        auto target = grid.cell_of(plan.signage[*nxt].at);
        if (!target || !grid.walkable(*target))
            throw RouteError("sign '" + plan.signage[*nxt].id + "' lies in a blocked cell");
        auto leg = plan_route(grid, cells.back(), *target);
        if (!leg)
            throw RouteError("sign '" + plan.signage[*nxt].id + "' is unreachable from sign '" + node.id + "'");
        append_leg(cells, *leg);
        cur = *nxt;
    }
    throw RouteError("signage chain does not terminate");
}

} // namespace eva
