#include "eva/validate.hpp"
#include "eva/floorplan.hpp"
#include "eva/navgrid.hpp"

#include <fstream>
#include <sstream>

namespace eva {

std::string PlanReport::text() const {
    if (ok())
        return "ok\n";
    std::string out;
    for (const auto &v : violations)
        out += v + "\n";
    return out;
}

PlanReport validate_plan_text(std::string_view text, double cell_size) {
    PlanReport r;
    FloorPlan plan;
    try {
        plan = parse_floorplan_unchecked(text);
    } catch (const PlanSyntaxError &e) {
        r.violations.push_back(std::string("syntax: ") + e.what());
        return r;
    } catch (const PlanSemanticError &e) {
        r.violations = e.violations();
        return r;
    }
    r.violations = check_floorplan(plan);
    if (!r.ok())
        return r;

    NavGrid grid;
    try {
        grid = build_nav_grid(plan, GridOptions{cell_size});
    } catch (const GridError &e) {
        r.violations.push_back(std::string("grid: ") + e.what());
        return r;
    }

    const Vec2 e = plan.waypoint("E");
    const auto start = grid.cell_of(e);
    if (!start || !grid.walkable(*start)) {
        r.violations.push_back("waypoint E lies in a blocked cell");
        return r;
    }
    const PathTree tree = shortest_path_tree(grid, *start);
    auto reachable = [&](GridCell c) { return grid.in_bounds(c) && tree.dist[grid.index(c)] < 1e300; };

    for (const auto &[name, p] : plan.waypoints) {
        if (name == "E")
            continue;
        auto c = grid.cell_of(p);
        if (!c || !grid.walkable(*c))
            r.violations.push_back("waypoint " + name + " lies in a blocked cell");
        else if (!reachable(*c))
            r.violations.push_back("waypoint " + name + " is unreachable from E");
    }
    for (const auto &x : plan.exits) {
        bool any = false;
        for (const auto &c : grid.exit_cells(x.label))
            any = any || reachable(c);
        if (!any)
            r.violations.push_back("exit " + to_string(x.label) + " is unreachable from E");
    }
    for (const auto &s : plan.signage) {
        auto c = grid.cell_of(s.at);
        if (!c || !grid.walkable(*c))
            r.violations.push_back("sign " + s.id + " lies in a blocked cell");
        else if (!reachable(*c))
            r.violations.push_back("sign " + s.id + " is unreachable from E");
    }
    return r;
}

PlanReport validate_plan_file(const std::string &path, double cell_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return PlanReport{{"cannot open " + path}};
    std::stringstream ss;
    ss << in.rdbuf();
    return validate_plan_text(ss.str(), cell_size);
}

} // namespace eva
