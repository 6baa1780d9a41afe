#pragma once

// Blocking WebSocket client that plays a drill against a running server,
// steering from snapshots only (it never sees the server's Session).

#include "eva/navgrid.hpp"
#include "eva/scenario.hpp"
#include "eva/wire.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace wsclient {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct Client {
    net::io_context ioc;
    websocket::stream<tcp::socket> ws{ioc};

    explicit Client(unsigned short port) {
        tcp::resolver r(ioc);
        net::connect(ws.next_layer(), r.resolve("127.0.0.1", std::to_string(port)));
        ws.handshake("127.0.0.1", "/ws");
    }
    void send(const eva::ClientMessage &m) { ws.write(net::buffer(eva::encode_frame(m))); }
    eva::ServerMessage read() {
        beast::flat_buffer b;
        ws.read(b);
        return eva::parse_server_message(beast::buffers_to_string(b.data()));
    }
    template <class T>
    T read_until() {
        for (;;) {
            eva::ServerMessage m = read();
            if (auto *t = std::get_if<T>(&m))
                return *t;
        }
    }
};

struct Outcome {
    eva::wire::Welcome welcome;
    std::optional<eva::wire::Finished> finished;
    std::optional<eva::wire::Sealed> sealed;
    std::optional<eva::wire::Rejected> rejected;
    std::optional<eva::wire::Snapshot> last;
};

struct Script {
    std::optional<eva::AlarmChoice> answer = eva::AlarmChoice::D;
    eva::ExitLabel exit = eva::ExitLabel::A;
    eva::SubjectMeta questionnaire;
    /// Give up after this many snapshots.
    int max_snapshots = 20000;
};

// Pure pursuit along a grid route, re-planned when progress stalls.
class Steer {
public:
    Steer(const eva::FloorPlan &plan, const eva::NavGrid &grid) : plan_(plan), grid_(grid) {}

    void to_point(eva::Vec2 from, eva::Vec2 goal) {
        goal_ = goal;
        exit_.reset();
        replan(from);
    }
    void to_exit(eva::Vec2 from, eva::ExitLabel l) {
        exit_ = l;
        replan(from);
    }

    eva::InputCommand command(eva::Vec2 at) {
        if (++since_plan_ > 60 && eva::distance(at, plan_at_) < 0.5)
            replan(at);
        eva::InputCommand c;
        if (points_.empty())
            return c;
        // resync with the closest route point in sight, then look ahead for
        // the furthest one that can be walked to in a straight line
        for (std::size_t k = next_ + 1; k < points_.size(); ++k)
            if (eva::distance(at, points_[k]) < eva::distance(at, points_[next_]) && visible(at, points_[k]))
                next_ = k;
        while (next_ + 1 < points_.size() && eva::distance(at, points_[next_]) < 0.6)
            ++next_;
        std::size_t aim = next_;
        for (std::size_t k = next_; k < points_.size(); ++k)
            if (eva::distance(at, points_[k]) < 4.0 && visible(at, points_[k]))
                aim = k;
        const eva::Vec2 d = points_[aim] - at;
        c.forward = true;
        c.look_yaw = std::atan2(d.y, d.x);
        return c;
    }

private:
    // Sampled every 10 cm, the way the avatar would actually walk it.
    bool visible(eva::Vec2 a, eva::Vec2 b) const {
        const int steps = std::max(1, static_cast<int>(std::ceil(eva::distance(a, b) / 0.1)));
        eva::Vec2 prev = a;
        for (int i = 1; i <= steps; ++i) {
            const eva::Vec2 p = a + (b - a) * (double(i) / steps);
            if (!grid_.walkable(p) || grid_.motion_blocked({prev, p}))
                return false;
            prev = p;
        }
        return true;
    }

    void replan(eva::Vec2 from) {
        std::optional<eva::Route> r = exit_ ? eva::plan_route_to_exit(grid_, from, *exit_) : eva::plan_route(grid_, from, goal_);
        points_.clear();
        next_ = 0;
        if (r) {
            points_ = r->points;
            if (exit_)
                points_.push_back(eva::point_beyond_exit(plan_, *exit_, points_.back()));
            else
                points_.push_back(goal_);
        }
        since_plan_ = 0;
        plan_at_ = from;
    }

    const eva::FloorPlan &plan_;
    const eva::NavGrid &grid_;
    eva::Vec2 goal_;
    std::optional<eva::ExitLabel> exit_;
    std::vector<eva::Vec2> points_;
    std::size_t next_ = 0;
    int since_plan_ = 0;
    eva::Vec2 plan_at_;
};

inline Outcome play(unsigned short port, const std::string &subject, const Script &script) {
    Client c(port);
    c.send(eva::wire::Hello{subject});
    Outcome out;
    {
        eva::ServerMessage first = c.read();
        if (auto *rej = std::get_if<eva::wire::Rejected>(&first)) {
            out.rejected = *rej;
            return out;
        }
        out.welcome = std::get<eva::wire::Welcome>(first);
    }
    const eva::FloorPlan plan = eva::parse_floorplan(out.welcome.plan.dump());
    const eva::NavGrid grid = eva::build_nav_grid(plan, 0.5);
    Steer steer(plan, grid);
    bool evacuating = false;
    bool started = false;
    double sent_yaw = 0.0;
    bool steering = false; // an input is in effect
    int snapshots = 0;
    while (!out.sealed) {
        eva::ServerMessage m = c.read();
        if (auto *snap = std::get_if<eva::wire::Snapshot>(&m)) {
            out.last = *snap;
            if (++snapshots > script.max_snapshots)
                break;
            if (snap->phase != eva::DrillPhase::EscortToWard && snap->phase != eva::DrillPhase::Evacuation)
                continue;
            if (!started) {
                steer.to_point(snap->avatar, plan.waypoint("F"));
                started = true;
            }
            if (snap->phase == eva::DrillPhase::Evacuation && !evacuating) {
                steer.to_exit(snap->avatar, script.exit);
                evacuating = true;
            }
            const eva::InputCommand cmd = steer.command(snap->avatar);
            if (!steering || std::abs(sent_yaw - cmd.look_yaw) > 1e-3) {
                c.send(eva::wire::Input{cmd});
                sent_yaw = cmd.look_yaw;
                steering = true;
            }
        } else if (std::holds_alternative<eva::wire::Question>(m)) {
            c.send(eva::wire::Answer{script.answer});
            steering = false;
        } else if (auto *f = std::get_if<eva::wire::Finished>(&m)) {
            out.finished = *f;
            c.send(eva::wire::PostQuestionnaire{script.questionnaire});
        } else if (auto *s = std::get_if<eva::wire::Sealed>(&m)) {
            out.sealed = *s;
        }
    }
    return out;
}

} // namespace wsclient
