#include "eva/ws_server.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace eva {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace fs = std::filesystem;
using tcp = asio::ip::tcp;

namespace {

std::string mime_type(const fs::path &p) {
    const std::string ext = p.extension().string();
    if (ext == ".html" || ext == ".htm")
        return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs")
        return "text/javascript; charset=utf-8";
    if (ext == ".css")
        return "text/css; charset=utf-8";
    if (ext == ".json")
        return "application/json";
    if (ext == ".svg")
        return "image/svg+xml";
    if (ext == ".png")
        return "image/png";
    if (ext == ".ico")
        return "image/x-icon";
    if (ext == ".map" || ext == ".txt")
        return "text/plain; charset=utf-8";
    return "application/octet-stream";
}

// Maps a request target onto a file under `root`; nothing for anything that
// would escape it.
std::optional<fs::path> resolve(const fs::path &root, std::string_view target) {
    if (auto q = target.find_first_of("?#"); q != std::string_view::npos)
        target = target.substr(0, q);
    if (target.empty() || target.front() != '/')
        return std::nullopt;
    fs::path rel = fs::path(std::string(target.substr(1))).lexically_normal();
    if (rel.empty() || rel == ".")
        rel = "index.html";
    for (const auto &part : rel)
        if (part == "..")
            return std::nullopt;
    fs::path full = root / rel;
    if (fs::is_directory(full))
        full /= "index.html";
    if (!fs::is_regular_file(full))
        return std::nullopt;
    return full;
}

} // namespace

struct DrillServer::Impl {
    class WsConnection;

    Impl(SessionHost &h, ServerOptions o) : host(h), options(std::move(o)), acceptor(ioc), timer(ioc), signals(ioc) {
        tcp::endpoint ep(asio::ip::make_address(options.address), options.port);
        acceptor.open(ep.protocol());
        acceptor.set_option(asio::socket_base::reuse_address(true));
        acceptor.bind(ep);
        acceptor.listen();
    }

    SessionHost &host;
    ServerOptions options;
    asio::io_context ioc;
    tcp::acceptor acceptor;
    asio::steady_timer timer;
    asio::signal_set signals;
    std::set<std::shared_ptr<WsConnection>> connections;
    bool stopping = false;

    void accept();
    void schedule_tick();
    void on_tick();
    void shutdown();
};

// Plain HTTP: static files and the WebSocket upgrade.
class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(DrillServer::Impl &server, tcp::socket socket) : server_(server), stream_(std::move(socket)) {}

    void run() { read(); }

private:
    void read() {
        request_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec);
    void respond(http::response<http::string_body> res) {
        res.set(http::field::server, "eva");
        res.keep_alive(request_.keep_alive());
        res.prepare_payload();
        auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
        http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
            if (!ec && sp->keep_alive())
                self->read();
            else
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        });
    }

    DrillServer::Impl &server_;
    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
};

class DrillServer::Impl::WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(Impl &server, tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

    void accept(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec)
                return self->drop();
            self->server_.connections.insert(self);
            self->read();
        });
    }

    // Called once per tick by the server loop.
    void tick() {
        if (!session_ || closing_)
            return;
        for (const auto &m : session_->tick())
            send(m);
        if (session_->sealed()) {
            server_.host.close(*session_, kSealCompleted);
            session_.reset();
            close();
        }
    }

    // Server shutdown: seal whatever is in progress.
    void abandon() {
        if (session_) {
            server_.host.close(*session_, kSealDisconnected);
            session_.reset();
        }
        close();
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec)
                return self->drop();
            const std::string frame = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->on_frame(frame);
            if (!self->closing_)
                self->read();
        });
    }

    void on_frame(const std::string &frame) {
        ClientMessage msg;
        try {
            msg = parse_client_message(frame);
        } catch (const WireError &e) {
            std::cerr << "eva: dropped malformed frame: " << e.what() << "\n";
            return;
        }
        if (const auto *hello = std::get_if<wire::Hello>(&msg)) {
            if (session_ || closing_)
                return;
            auto created = server_.host.create(hello->subject_id);
            if (created.rejected) {
                send(*created.rejected);
                close();
                return;
            }
            session_ = created.session;
            for (const auto &m : session_->start())
                send(m);
            return;
        }
        if (session_)
            session_->receive(std::move(msg));
    }

    void send(const ServerMessage &m) {
        outbox_.push_back(encode_frame(m));
        if (outbox_.size() == 1)
            write();
    }

    void write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec)
                return self->drop();
            self->outbox_.pop_front();
            if (!self->outbox_.empty())
                self->write();
            else if (self->closing_)
                self->finish_close();
        });
    }

    void close() {
        if (closing_)
            return;
        closing_ = true;
        if (outbox_.empty())
            finish_close();
    }

    void finish_close() {
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->drop(); });
    }

    // Connection gone: whatever session it had ends as a disconnect.
    void drop() {
        if (session_) {
            server_.host.close(*session_, kSealDisconnected);
            session_.reset();
        }
        closing_ = true;
        server_.connections.erase(shared_from_this());
    }

    Impl &server_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    std::shared_ptr<Session> session_;
    bool closing_ = false;
};

void HttpConnection::on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
    }
    if (ec)
        return;

    if (websocket::is_upgrade(request_)) {
        if (request_.target() != "/ws") {
            http::response<http::string_body> res{http::status::not_found, request_.version()};
            res.body() = "websocket endpoint is /ws\n";
            return respond(std::move(res));
        }
        stream_.expires_never();
        auto ws = std::make_shared<DrillServer::Impl::WsConnection>(server_, stream_.release_socket());
        ws->accept(std::move(request_));
        return;
    }

    if (request_.method() != http::verb::get && request_.method() != http::verb::head) {
        http::response<http::string_body> res{http::status::method_not_allowed, request_.version()};
        res.body() = "only GET is supported\n";
        return respond(std::move(res));
    }

    std::optional<fs::path> file;
    if (server_.options.ui_dir)
        file = resolve(*server_.options.ui_dir, std::string_view(request_.target().data(), request_.target().size()));
    if (!file) {
        http::response<http::string_body> res{http::status::not_found, request_.version()};
        res.set(http::field::content_type, "text/plain; charset=utf-8");
        res.body() = server_.options.ui_dir ? "not found\n" : "no UI is being served; connect a client to /ws\n";
        return respond(std::move(res));
    }
    std::ifstream in(*file, std::ios::binary);
    std::stringstream body;
    body << in.rdbuf();
    http::response<http::string_body> res{http::status::ok, request_.version()};
    res.set(http::field::content_type, mime_type(*file));
    if (request_.method() == http::verb::get)
        res.body() = body.str();
    respond(std::move(res));
}

void DrillServer::Impl::accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (stopping)
            return;
        if (!ec)
            std::make_shared<HttpConnection>(*this, std::move(socket))->run();
        accept();
    });
}

void DrillServer::Impl::schedule_tick() {
    timer.expires_after(options.tick_period);
    timer.async_wait([this](beast::error_code ec) {
        if (ec || stopping)
            return;
        on_tick();
        schedule_tick();
    });
}

void DrillServer::Impl::on_tick() {
    // Copy: a tick may close its connection.
    const auto snapshot = connections;
    for (const auto &c : snapshot)
        c->tick();
}

void DrillServer::Impl::shutdown() {
    if (stopping)
        return;
    stopping = true;
    beast::error_code ec;
    acceptor.close(ec);
    timer.cancel();
    signals.cancel();
    const auto snapshot = connections;
    for (const auto &c : snapshot)
        c->abandon();
    for (const auto &s : host.live())
        host.close(*s, kSealDisconnected);
}

DrillServer::DrillServer(SessionHost &host, ServerOptions options)
    : impl_(std::make_unique<Impl>(host, std::move(options))) {}

DrillServer::~DrillServer() = default;

unsigned short DrillServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void DrillServer::run() {
    Impl &s = *impl_;
    if (s.options.handle_signals) {
        s.signals.add(SIGINT);
        s.signals.add(SIGTERM);
        s.signals.async_wait([&s](beast::error_code ec, int) {
            if (!ec)
                s.shutdown();
        });
    }
    s.accept();
    s.schedule_tick();
    s.ioc.run();
}

void DrillServer::stop() {
    asio::post(impl_->ioc, [this] { impl_->shutdown(); });
}

} // namespace eva
