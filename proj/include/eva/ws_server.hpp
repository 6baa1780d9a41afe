#pragma once

#include "eva/session.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>

namespace eva {

struct ServerOptions {
    std::string address = "0.0.0.0";
    /// Zero picks a free port; see DrillServer::port().
    unsigned short port = 8080;
    /// Directory served over plain HTTP GET (the browser client).
    std::optional<std::string> ui_dir;
    /// Wall-clock period of one simulation tick. Simulated time is fixed at
    /// 1/tick_hz per tick regardless of this value.
    std::chrono::milliseconds tick_period{50};
    /// Stop cleanly on SIGINT/SIGTERM.
    bool handle_signals = false;
};

/// WebSocket front end (path /ws) for a SessionHost. Everything runs on one
/// thread: frames are queued into their session in arrival order and applied
/// on the next tick.
class DrillServer {
public:
    DrillServer(SessionHost &host, ServerOptions options);
    ~DrillServer();
    DrillServer(const DrillServer &) = delete;
    DrillServer &operator=(const DrillServer &) = delete;

    /// Port actually bound.
    unsigned short port() const;
    /// Serves until stop(). Live sessions are sealed as disconnected on exit.
    void run();
    /// Safe to call from any thread.
    void stop();

    struct Impl; // defined in the implementation file

private:
    std::unique_ptr<Impl> impl_;
};

} // namespace eva
