#pragma once

#include "eva/dynamics.hpp"
#include "eva/floorplan.hpp"
#include "eva/navgrid.hpp"
#include "eva/scenario.hpp"
#include "eva/telemetry.hpp"
#include "eva/wire.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace eva {

struct SessionConfig {
    /// Simulation rate; time is tick / tick_hz.
    int tick_hz = 20;
    int snapshot_every = 2;
    int track_every = 10;
    /// Reach of the interact key for doors and the wheelchair (m).
    double interact_radius = 1.0;
    /// Wheelchair position ahead of a pushing avatar (m).
    double wheelchair_offset = 0.7;
    double cell_size = 0.5;
    double wheelchair_factor = DynamicsParams{}.wheelchair_factor;
};

struct Wheelchair {
    Vec2 position;
    bool attached = true;
};

/// One player's drill. Deterministic: the log depends only on the sequence of
/// (tick, client message) pairs, never on wall-clock time.
class Session {
public:
    Session(std::shared_ptr<const FloorPlan> plan, std::string session_id, std::string subject_id,
            SessionConfig config = {});

    /// Logs session_start and spawns the avatar at E pushing the wheelchair.
    std::vector<ServerMessage> start();

    /// Queues a client message; it takes effect (and is logged) on the next tick.
    void receive(ClientMessage message);

    /// Advances one tick. Returns the messages to send to the client.
    std::vector<ServerMessage> tick();

    /// Writes session_end; later calls are no-ops.
    void seal(const std::string &reason);

    bool sealed() const { return sealed_; }
    bool finished() const { return scenario_.phase == DrillPhase::Finished; }
    std::uint64_t tick_count() const { return tick_; }
    double time() const { return static_cast<double>(tick_) / config_.tick_hz; }
    double dt() const { return 1.0 / config_.tick_hz; }

    const std::string &session_id() const { return log_.session_id; }
    const std::string &subject_id() const { return log_.subject_id; }
    const ScenarioState &scenario() const { return scenario_; }
    const AgentState &avatar() const { return avatar_; }
    const Wheelchair &wheelchair() const { return wheelchair_; }
    const NavGrid &grid() const { return grid_; }
    const FloorPlan &plan() const { return *plan_; }
    const SessionLog &log() const { return log_; }
    const SessionConfig &config() const { return config_; }
    wire::Welcome welcome() const;
    wire::Snapshot snapshot() const;

private:
    void fire(const DrillEvent &event, std::vector<ServerMessage> &out);
    void apply(const ClientMessage &message, std::vector<ServerMessage> &out);
    void interact(std::vector<ServerMessage> &out);
    void place_wheelchair();

    std::shared_ptr<const FloorPlan> plan_;
    SessionConfig config_;
    NavGrid grid_;
    ScenarioState scenario_;
    AgentState avatar_;
    Wheelchair wheelchair_;
    InputCommand held_;
    SessionLog log_;
    std::deque<ClientMessage> inbox_;
    std::optional<std::size_t> zone_;
    std::uint64_t tick_ = 0;
    std::uint64_t snapshot_seq_ = 0;
    bool sealed_ = false;
};

/// Owns live sessions and the one-run rule. Every subject that ever got a
/// session is written to `<log_dir>/subjects.registry` before the session
/// starts, so a restart keeps rejecting them.
class SessionHost {
public:
    SessionHost(std::shared_ptr<const FloorPlan> plan, std::string log_dir, SessionConfig config = {});

    struct Created {
        std::shared_ptr<Session> session;
        /// Set instead of `session` when the subject was turned away.
        std::optional<wire::Rejected> rejected;
    };

    Created create(const std::string &subject_id);
    bool has_played(const std::string &subject_id) const { return played_.contains(subject_id); }

    /// Seals the session (no-op if already sealed), writes its log file and
    /// drops it from the live set. Returns the log path.
    std::string close(Session &session, const std::string &reason);

    std::vector<std::shared_ptr<Session>> live() const;
    const std::string &log_dir() const { return log_dir_; }
    std::string registry_path() const;
    std::string log_path(const std::string &session_id) const;

private:
    std::shared_ptr<const FloorPlan> plan_;
    std::string log_dir_;
    SessionConfig config_;
    std::set<std::string> played_;
    std::map<std::string, std::shared_ptr<Session>> live_;
    std::uint64_t next_index_ = 1;
};

/// Reason written by the server when the player submits the questionnaire.
inline constexpr const char *kSealCompleted = "completed";
inline constexpr const char *kSealDisconnected = "disconnected";

/// Headless stand-in for a player: steers the avatar along grid routes by
/// producing the same InputCommands a keyboard would.
struct PilotScript {
    std::optional<AlarmChoice> answer = AlarmChoice::D;
    /// Ticks spent on the question before answering.
    int answer_delay_ticks = 40;
    ExitLabel exit = ExitLabel::B;
    /// Take the wheelchair into the nearest safe zone before leaving.
    bool rescue = false;
    /// Release the wheelchair this many ticks into the escort (then grab it
    /// again), exercising the interact key. Negative disables.
    int fumble_tick = -1;
    SubjectMeta questionnaire;
    /// Disconnect instead of finishing, after this many ticks. Negative disables.
    int quit_after_ticks = -1;
};

class Pilot {
public:
    Pilot(PilotScript script) : script_(std::move(script)) {}

    /// Messages to deliver before the next tick, given the session as the
    /// client would see it.
    std::vector<ClientMessage> next(const Session &session);
    bool wants_disconnect(const Session &session) const;

private:
    void plan_to(const Session &s, Vec2 goal);
    void plan_to_zone(const Session &s);
    void plan_to_exit(const Session &s);
    InputCommand follow(const Session &s);

    PilotScript script_;
    std::optional<Route> route_;
    std::size_t route_index_ = 0;
    std::optional<Vec2> beyond_;
    int stage_ = 0;
    int waited_ = 0;
    int ticks_ = 0;
    bool answered_ = false;
    bool submitted_ = false;
    bool fumbled_ = false;
    bool regrab_ = false;
    std::optional<InputCommand> last_sent_;
    Vec2 last_pos_{};
    int stuck_ = 0;
};

/// Drives a session with a pilot until it is sealed or `max_ticks` pass.
/// Returns every server message produced.
std::vector<ServerMessage> run_pilot(Session &session, Pilot &pilot, std::uint64_t max_ticks = 20 * 60 * 15);

struct ReplayVerdict {
    bool match = false;
    /// Summary of the recorded log, when it is complete enough.
    std::optional<DecisionRecord> record;
    /// Index into the events of the first entry that differs.
    std::optional<std::size_t> first_divergence;
    std::string detail;
    SessionLog replayed;
};

class ReplayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Re-runs a session from the client messages recorded in `log` and compares
/// the produced log byte for byte. Throws ReplayError when the log belongs to
/// a different plan or carries no usable session.
ReplayVerdict replay(const SessionLog &log, std::shared_ptr<const FloorPlan> plan, SessionConfig config = {});

} // namespace eva
