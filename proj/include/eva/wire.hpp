#pragma once

#include "eva/dynamics.hpp"
#include "eva/labels.hpp"
#include "eva/scenario.hpp"
#include "eva/telemetry.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace eva {

// One JSON object per WebSocket text frame, discriminated by "type".

namespace wire {

struct Hello {
    std::string subject_id;
    bool operator==(const Hello &) const = default;
};
struct Input {
    InputCommand command;
    bool operator==(const Input &) const = default;
};
struct Answer {
    /// Null on the wire when the question was dismissed.
    std::optional<AlarmChoice> choice;
    bool operator==(const Answer &) const = default;
};
struct PostQuestionnaire {
    SubjectMeta answers;
    bool operator==(const PostQuestionnaire &) const = default;
};

struct Welcome {
    std::string session_id;
    std::string subject_id;
    std::string plan_digest;
    nlohmann::json plan;
    double tick_hz = 20.0;
    bool operator==(const Welcome &) const = default;
};
struct DoorState {
    std::string id;
    bool open = false;
    bool operator==(const DoorState &) const = default;
};
struct Snapshot {
    std::uint64_t seq = 0;
    double t = 0.0;
    DrillPhase phase = DrillPhase::Briefing;
    Vec2 avatar;
    double heading = 0.0;
    Vec2 wheelchair;
    bool attached = false;
    std::vector<DoorState> doors;
    bool operator==(const Snapshot &) const = default;
};
struct Question {
    std::vector<AlarmOption> options;
    bool operator==(const Question &o) const;
};
struct Instruction {
    std::string text;
    bool operator==(const Instruction &) const = default;
};
struct Greeting {
    std::string text;
    bool operator==(const Greeting &) const = default;
};
struct Finished {
    ExitLabel exit = ExitLabel::A;
    double total_time_s = 0.0;
    /// Post-drill questionnaire items to ask before sealing.
    std::vector<std::string> questions;
    bool operator==(const Finished &) const = default;
};
struct Rejected {
    std::string reason;
    bool operator==(const Rejected &) const = default;
};
struct Sealed {
    std::string session_id;
    bool operator==(const Sealed &) const = default;
};

} // namespace wire

using ClientMessage = std::variant<wire::Hello, wire::Input, wire::Answer, wire::PostQuestionnaire>;
using ServerMessage = std::variant<wire::Welcome, wire::Snapshot, wire::Question, wire::Instruction, wire::Greeting,
                                   wire::Finished, wire::Rejected, wire::Sealed>;

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ClientMessage &m);
nlohmann::json to_json(const ServerMessage &m);
/// Throws WireError on malformed JSON, an unknown type or a bad field.
ClientMessage parse_client_message(std::string_view frame);
ServerMessage parse_server_message(std::string_view frame);

std::string encode_frame(const ClientMessage &m);
std::string encode_frame(const ServerMessage &m);

nlohmann::json input_to_json(const InputCommand &c);
InputCommand input_from_json(const nlohmann::json &j);
nlohmann::json meta_to_json(const SubjectMeta &m);
SubjectMeta meta_from_json(const nlohmann::json &j);

} // namespace eva
