#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eva {

struct PlanReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    /// "ok", or one violation per line.
    std::string text() const;
};

/// Parses and checks a plan document: syntax, invariants, rasterization, and
/// reachability from E of the other waypoints, every exit and every sign.
/// Never throws for plan content; problems become report lines.
PlanReport validate_plan_text(std::string_view text, double cell_size = 0.5);
PlanReport validate_plan_file(const std::string &path, double cell_size = 0.5);

} // namespace eva
