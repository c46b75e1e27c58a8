#include "mwb/server.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "httplib.h"

namespace mwb {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

int status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

std::string bearer(const httplib::Request& req) {
  const std::string h = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  return h.rfind(prefix, 0) == 0 ? h.substr(prefix.size()) : std::string();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

}  // namespace

struct CollabServer::Impl {
  struct Connection {
    websocket::stream<tcp::socket> ws;
    std::mutex write_mutex;
    explicit Connection(tcp::socket s) : ws(std::move(s)) {}
  };

  CollabService& service;
  std::string host;
  std::uint16_t http_port;
  std::uint16_t ws_port;
  httplib::Server http;
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread http_thread;
  std::thread ws_thread;
  std::mutex conn_mutex;
  std::map<std::string, std::shared_ptr<Connection>> connections;
  std::vector<std::thread> sessions;
  std::atomic<std::uint64_t> next_session{1};
  std::atomic<bool> running{false};
  std::mutex stop_mutex;
  std::condition_variable stopped;

  Impl(CollabService& s, std::uint16_t hp, std::uint16_t wp, std::string h)
      : service(s), host(std::move(h)), http_port(hp), ws_port(wp) {}

  void routes() {
    auto guarded = [this](auto body) {
      return [this, body](const httplib::Request& req, httplib::Response& res) {
        try {
          body(req, res);
        } catch (const Error& e) {
          send_json(res, status_of(e.code()),
                    {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}});
        } catch (const json::exception& e) {
          send_json(res, 400, {{"error", {{"code", std::string(to_string(ErrorCode::InvalidArgument))}, {"message", e.what()}}}});
        }
      };
    };
    http.Post("/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
                json body = req.body.empty() ? json::object() : json::parse(req.body);
                std::optional<json> doc;
                if (body.contains("document")) doc = body["document"];
                ProjectRecord r = service.create_project(bearer(req), body.value("name", "untitled"),
                                                         body.value("owner", ""), doc);
                send_json(res, 201, record_to_json(r));
              }));
    http.Get("/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
               json list = json::array();
               for (const ProjectRecord& r : service.list_projects(bearer(req))) list.push_back(record_to_json(r));
               send_json(res, 200, list);
             }));
    http.Get(R"(/projects/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto [r, doc] = service.get_project(bearer(req), req.matches[1]);
               send_json(res, 200, {{"record", record_to_json(r)}, {"document", doc}});
             }));
    http.Put(R"(/projects/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string base = req.get_header_value("X-Base-Revision");
               if (base.empty()) fail(ErrorCode::InvalidArgument, "missing X-Base-Revision header");
               std::uint64_t revision = 0;
               try {
                 revision = std::stoull(base);
               } catch (const std::exception&) {
                 fail(ErrorCode::InvalidArgument, "bad X-Base-Revision header");
               }
               ProjectRecord r = service.save_project(bearer(req), req.matches[1], revision, json::parse(req.body));
               send_json(res, 200, record_to_json(r));
             }));
  }

  void deliver(const std::vector<Outgoing>& out) {
    for (const Outgoing& o : out) {
      std::shared_ptr<Connection> c;
      {
        std::lock_guard lock(conn_mutex);
        auto it = connections.find(o.session);
        if (it == connections.end()) continue;
        c = it->second;
      }
      std::lock_guard lock(c->write_mutex);
      beast::error_code ec;
      c->ws.text(true);
      c->ws.write(asio::buffer(o.message.to_text()), ec);
    }
  }

  void serve_session(std::shared_ptr<Connection> c) {
    const std::string session = "s" + std::to_string(next_session++);
    beast::error_code ec;
    c->ws.accept(ec);
    if (ec) return;
    {
      std::lock_guard lock(conn_mutex);
      connections[session] = c;
    }
    while (running) {
      beast::flat_buffer buffer;
      c->ws.read(buffer, ec);
      if (ec) break;
      std::vector<Outgoing> out;
      try {
        out = service.handle(session, WireMessage::parse(beast::buffers_to_string(buffer.data())));
      } catch (const Error& e) {
        out = {{session, WireMessage{"ack", "", 0, {{"accepted", false}, {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}}}}};
      }
      deliver(out);
    }
    {
      std::lock_guard lock(conn_mutex);
      connections.erase(session);
    }
    deliver(service.disconnect(session));
  }

  void accept_loop() {
    while (running) {
      beast::error_code ec;
      tcp::socket socket(io);
      acceptor->accept(socket, ec);
      if (ec || !running) break;
      auto c = std::make_shared<Connection>(std::move(socket));
      std::lock_guard lock(conn_mutex);
      sessions.emplace_back([this, c] { serve_session(c); });
    }
  }
};

CollabServer::CollabServer(CollabService& service, std::uint16_t http_port, std::uint16_t ws_port, std::string host)
    : impl_(std::make_unique<Impl>(service, http_port, ws_port, std::move(host))) {}

CollabServer::~CollabServer() { stop(); }

void CollabServer::start() {
  Impl& s = *impl_;
  s.routes();
  if (s.http_port == 0) {
    int port = s.http.bind_to_any_port(s.host);
    if (port < 0) fail(ErrorCode::Io, "cannot bind an HTTP port");
    s.http_port = static_cast<std::uint16_t>(port);
  } else if (!s.http.bind_to_port(s.host, s.http_port)) {
    fail(ErrorCode::Io, "cannot bind HTTP port " + std::to_string(s.http_port));
  }
  beast::error_code ec;
  auto address = asio::ip::make_address(s.host, ec);
  if (ec) fail(ErrorCode::InvalidArgument, "bad host " + s.host);
  s.acceptor = std::make_unique<tcp::acceptor>(s.io);
  tcp::endpoint endpoint(address, s.ws_port);
  s.acceptor->open(endpoint.protocol(), ec);
  if (!ec) s.acceptor->set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor->bind(endpoint, ec);
  if (!ec) s.acceptor->listen(asio::socket_base::max_listen_connections, ec);
  if (ec) fail(ErrorCode::Io, "cannot bind socket port " + std::to_string(s.ws_port) + ": " + ec.message());
  s.ws_port = s.acceptor->local_endpoint().port();
  s.running = true;
  s.http_thread = std::thread([&s] { s.http.listen_after_bind(); });
  s.ws_thread = std::thread([&s] { s.accept_loop(); });
  s.http.wait_until_ready();
}

void CollabServer::stop() {
  Impl& s = *impl_;
  if (!s.running.exchange(false)) return;
  s.http.stop();
  beast::error_code ec;
  {
    // Wake the blocking accept.
    asio::io_context io;
    tcp::socket poke(io);
    poke.connect(s.acceptor->local_endpoint(), ec);
  }
  {
    std::lock_guard lock(s.conn_mutex);
    for (auto& [id, c] : s.connections) {
      beast::get_lowest_layer(c->ws).shutdown(tcp::socket::shutdown_both, ec);
    }
  }
  if (s.http_thread.joinable()) s.http_thread.join();
  if (s.ws_thread.joinable()) s.ws_thread.join();
  s.acceptor->close(ec);
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(s.conn_mutex);
    sessions.swap(s.sessions);
  }
  for (auto& t : sessions) t.join();
  std::lock_guard lock(s.stop_mutex);
  s.stopped.notify_all();
}

void CollabServer::wait() {
  Impl& s = *impl_;
  std::unique_lock lock(s.stop_mutex);
  s.stopped.wait(lock, [&s] { return !s.running; });
}

std::uint16_t CollabServer::http_port() const { return impl_->http_port; }
std::uint16_t CollabServer::ws_port() const { return impl_->ws_port; }

}  // namespace mwb
