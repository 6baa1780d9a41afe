#pragma once

#include "eva/floorplan.hpp"
#include "eva/labels.hpp"
#include "eva/log_entry.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace eva {

enum class DrillPhase : std::uint8_t { Briefing, EscortToWard, AlarmQuestion, Evacuation, Finished };

std::string to_string(DrillPhase p);
std::optional<DrillPhase> parse_drill_phase(std::string_view s);

namespace drill {
struct Spawned {};
struct ReachedWard {};
struct AlarmRaised {};
struct AnswerGiven {
    /// Empty when the player dismissed the question without choosing.
    std::optional<AlarmChoice> choice;
};
struct WheelchairGrabbed {};
struct WheelchairReleased {};
struct SafeZoneReached {
    std::string zone;
};
struct ExitReached {
    ExitLabel label;
};
struct Tick {
    double dt;
};
} // namespace drill

enum class DrillEventKind : std::uint8_t {
    Spawned,
    ReachedWard,
    AlarmRaised,
    AnswerGiven,
    WheelchairGrabbed,
    WheelchairReleased,
    SafeZoneReached,
    ExitReached,
    Tick,
};

inline constexpr std::size_t kDrillEventKindCount = 9;

struct DrillEvent {
    double t = 0.0;
    std::variant<drill::Spawned, drill::ReachedWard, drill::AlarmRaised, drill::AnswerGiven, drill::WheelchairGrabbed,
                 drill::WheelchairReleased, drill::SafeZoneReached, drill::ExitReached, drill::Tick>
        what;

    DrillEventKind kind() const { return static_cast<DrillEventKind>(what.index()); }
};

std::string to_string(DrillEventKind k);

struct ScenarioState {
    DrillPhase phase = DrillPhase::Briefing;
    std::optional<double> alarm_t;
    /// Choice made at answer_t; empty for a dismissed question.
    std::optional<AlarmChoice> answer;
    std::optional<double> answer_t;
    /// Was pushing the wheelchair when a safe zone or exit was first reached.
    bool rescued = false;
    std::optional<double> rescue_t;
    std::optional<ExitLabel> exit_label;
    std::optional<double> end_t;
    bool greeting_shown = false;
    /// Currently pushing the wheelchair.
    bool pushing = false;
    /// The rescue decision has been fixed by the first safe zone or exit.
    bool rescue_decided = false;

    bool operator==(const ScenarioState &) const = default;
};

struct AdvanceResult {
    ScenarioState state;
    std::vector<LogEntry> emitted;
};

/// Drill state machine. Events that are not legal in the current phase leave
/// the state unchanged and emit a single `warning` entry; Tick never emits.
AdvanceResult advance(const ScenarioState &state, const DrillEvent &event);

/// Whether `kind` has an effect in `phase` (the published transition table).
bool is_legal(DrillPhase phase, DrillEventKind kind);

/// Rebuilds the drill event carried by a log entry, if it is one.
std::optional<DrillEvent> event_from_entry(const LogEntry &entry);

struct AlarmOption {
    AlarmChoice choice;
    std::string text;
};

/// The four answers offered when the alarm sounds, in order a to d.
std::array<AlarmOption, 4> alarm_question();

/// Index of the safe zone containing `pos`, if any.
std::optional<std::size_t> safe_zone_at(const FloorPlan &plan, Vec2 pos);
bool in_safe_zone(const FloorPlan &plan, Vec2 pos);

/// Exit whose segment the motion prev -> next crosses first.
std::optional<ExitLabel> exit_hit(const FloorPlan &plan, Vec2 prev, Vec2 next);

/// A point `overshoot` metres past the middle of exit `label`, on the far
/// side from `from`. Steering there carries a walker across the exit line.
Vec2 point_beyond_exit(const FloorPlan &plan, ExitLabel label, Vec2 from, double overshoot = 1.0);

/// Distance from waypoint F at which the escort counts as arrived and the
/// alarm fires.
inline constexpr double kWardArrivalRadius = 2.0;

} // namespace eva
