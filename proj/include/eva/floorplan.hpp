#pragma once

#include "eva/geometry.hpp"
#include "eva/labels.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace eva {

/// Raised for documents that are not valid JSON or do not match the
/// floorplan layout. `line()` is 1-based.
class PlanSyntaxError : public std::runtime_error {
public:
    PlanSyntaxError(std::size_t line, const std::string &what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Raised for well-formed documents that violate a floorplan invariant.
/// Carries every violation found, not just the first.
class PlanSemanticError : public std::runtime_error {
public:
    explicit PlanSemanticError(std::vector<std::string> violations);
    const std::vector<std::string> &violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct Door {
    std::string id;
    Segment segment;
    bool initially_open = true;
};

struct Exit {
    ExitLabel label;
    Segment segment;
};

struct SafeZone {
    std::string label;
    Polygon polygon;
};

/// One emergency sign. Each sign points either at another sign or at an exit.
struct SignNode {
    std::string id;
    Vec2 at;
    std::optional<std::string> next;
    std::optional<ExitLabel> exit;
};

/// Named landmarks every drill building must define.
inline constexpr std::array<std::string_view, 4> kRequiredWaypoints{"E", "F", "L", "ES"};

struct FloorPlan {
    std::string name;
    std::vector<Segment> walls;
    std::vector<Door> doors;
    std::vector<Exit> exits;
    std::map<std::string, Vec2> waypoints;
    std::vector<SafeZone> safe_zones;
    std::vector<SignNode> signage;

    const Exit *find_exit(ExitLabel label) const;
    std::optional<std::size_t> door_index(std::string_view id) const;
    std::optional<std::size_t> sign_index(std::string_view id) const;
    Vec2 waypoint(std::string_view name) const;

    /// Bounding box of every coordinate in the plan.
    Box bounds() const;
};

/// Parses a floorplan document (one JSON object). Throws PlanSyntaxError or
/// PlanSemanticError.
FloorPlan parse_floorplan(std::string_view text);
FloorPlan load_floorplan(const std::string &path);

/// Parses without enforcing invariants; pair with check_floorplan.
FloorPlan parse_floorplan_unchecked(std::string_view text);

/// Lists invariant violations; empty when the plan is valid.
std::vector<std::string> check_floorplan(const FloorPlan &plan);

nlohmann::json to_json(const FloorPlan &plan);

/// Stable 64-bit FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string plan_digest(const FloorPlan &plan);

} // namespace eva
