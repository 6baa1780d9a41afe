#pragma once

#include "eva/floorplan.hpp"
#include "oracles.hpp"

namespace testplans {

// Floorplan whose 1 m rasterization is exactly `g`: each blocked cell gets a
// short wall strictly inside its square, and two waypoints pin the bounds.
inline eva::FloorPlan plan_from_grid(const oracle::BoolGrid &g) {
    eva::FloorPlan p;
    p.name = "random";
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c)
            if (!g.free(c, r))
                p.walls.push_back({{c + 0.4, r + 0.5}, {c + 0.6, r + 0.5}});
    p.waypoints["E"] = {0.0, 0.0};
    p.waypoints["F"] = {double(g.cols), double(g.rows)};
    return p;
}

// Minimal valid document text with overridable pieces.
inline std::string tiny_plan_json() {
    return R"({
  "name": "tiny",
  "walls": [[[0, 0], [10, 0]], [[0, 4], [10, 4]], [[0, 0], [0, 4]], [[10, 0], [10, 1]], [[10, 3], [10, 4]]],
  "doors": [{"id": "d1", "segment": [[5, 0], [5, 4]], "initially_open": true}],
  "exits": [{"label": "A", "segment": [[10, 1], [10, 3]]}],
  "waypoints": {"E": [1, 2], "L": [1.5, 2], "F": [3, 2], "ES": [8, 2]},
  "safe_zones": [{"label": "ES", "polygon": [[7, 0.5], [9, 0.5], [9, 3.5], [7, 3.5]]}],
  "signage": [{"id": "s1", "at": [6, 2], "next": "s2"}, {"id": "s2", "at": [9, 2], "exit": "A"}]
}
)";
}

} // namespace testplans
