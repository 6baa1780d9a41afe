#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace eva {

/// One timestamped line of a session log. `t` is seconds since session start.
struct LogEntry {
    double t = 0.0;
    std::string kind;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const LogEntry &) const = default;
};

// Event kinds written by the scenario, server and population modules.
namespace kinds {
inline constexpr const char *kSessionStart = "session_start";
inline constexpr const char *kSessionEnd = "session_end";
inline constexpr const char *kSpawned = "spawned";
inline constexpr const char *kReachedWard = "reached_ward";
inline constexpr const char *kAlarmRaised = "alarm_raised";
inline constexpr const char *kAnswerGiven = "answer_given";
inline constexpr const char *kInstruction = "instruction";
inline constexpr const char *kWheelchairGrabbed = "wheelchair_grabbed";
inline constexpr const char *kWheelchairReleased = "wheelchair_released";
inline constexpr const char *kSafeZoneReached = "safe_zone_reached";
inline constexpr const char *kGreeting = "greeting";
inline constexpr const char *kExitReached = "exit_reached";
inline constexpr const char *kEgressFailed = "egress_failed";
inline constexpr const char *kWarning = "warning";
inline constexpr const char *kTrack = "track";
inline constexpr const char *kDoor = "door";
// Client messages as received by the server, keyed by arrival tick.
inline constexpr const char *kClientInput = "client_input";
inline constexpr const char *kClientAnswer = "client_answer";
inline constexpr const char *kClientPost = "client_post_questionnaire";
} // namespace kinds

} // namespace eva
