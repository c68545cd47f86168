#include "dictate/server.hpp"

#include <sys/socket.h>

#include <chrono>
#include <list>
#include <optional>
#include <set>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace dictate {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

struct Server::Impl {
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  explicit Impl(Service& s) : service(s) {}

  Service& service;
  net::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex mu;
  std::set<int> open_fds;
  std::list<Worker> workers;

  void accept_loop();
  void serve(tcp::socket sock);
  void serve_socket(tcp::socket sock, const http::request<http::string_body>& req);
  void reap();
};

namespace {

// Keeps a connection's fd registered so stop() can shut it down from outside.
class FdGuard {
 public:
  FdGuard(std::mutex& mu, std::set<int>& fds, int fd) : mu_(mu), fds_(fds), fd_(fd) {
    std::lock_guard lock(mu_);
    fds_.insert(fd_);
  }
  ~FdGuard() {
    std::lock_guard lock(mu_);
    fds_.erase(fd_);
  }

 private:
  std::mutex& mu_;
  std::set<int>& fds_;
  int fd_;
};

}  // namespace

void Server::Impl::reap() {
  std::lock_guard lock(mu);
  for (auto it = workers.begin(); it != workers.end();) {
    if (*it->done) {
      it->thread.join();
      it = workers.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::Impl::accept_loop() {
  while (!stopping) {
    tcp::socket sock(ioc);
    beast::error_code ec;
    acceptor->accept(sock, ec);
    if (stopping) break;
    if (ec) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
      continue;
    }
    reap();
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::lock_guard lock(mu);
    workers.push_back({std::thread([this, done, s = std::move(sock)]() mutable {
                         serve(std::move(s));
                         *done = true;
                       }),
                       done});
  }
}

void Server::Impl::serve(tcp::socket sock) {
  FdGuard guard(mu, open_fds, sock.native_handle());
  if (stopping) return;
  beast::error_code ec;
  beast::flat_buffer buffer;
  for (;;) {
    http::request_parser<http::string_body> parser;
    parser.body_limit(64 * 1024 * 1024);
    http::read(sock, buffer, parser, ec);
    if (ec) break;
    auto req = parser.release();
    if (websocket::is_upgrade(req)) {
      serve_socket(std::move(sock), req);
      return;
    }
    auto reply = service.http(std::string(req.method_string()), std::string(req.target()), req.body());
    http::response<http::string_body> res{static_cast<http::status>(reply.status), req.version()};
    res.set(http::field::content_type, "application/json");
    res.keep_alive(req.keep_alive());
    res.body() = reply.body.dump();
    res.prepare_payload();
    http::write(sock, res, ec);
    if (ec || !res.keep_alive()) break;
  }
  sock.shutdown(tcp::socket::shutdown_send, ec);
}

void Server::Impl::serve_socket(tcp::socket sock, const http::request<http::string_body>& req) {
  websocket::stream<tcp::socket> ws(std::move(sock));
  beast::error_code ec;
  ws.accept(req, ec);
  if (ec) return;
  ws.text(true);

  json snapshot;
  std::shared_ptr<Session> session;
  try {
    session = service.open_socket(std::string(req.target()), snapshot);
  } catch (const std::exception& e) {
    auto err = error_json(e)["error"];
    err["type"] = "error";
    ws.write(net::buffer(err.dump()), ec);
    ws.close(websocket::close_code::policy_error, ec);
    return;
  }
  ws.write(net::buffer(snapshot.dump()), ec);
  while (!ec) {
    beast::flat_buffer buffer;
    ws.read(buffer, ec);
    if (ec) break;
    auto text = beast::buffers_to_string(buffer.data());
    auto msg = json::parse(text, nullptr, false);
    // Unparseable text still goes through the session so the rejection is
    // sequenced and logged like any other.
    if (msg.is_discarded()) msg = text;
    for (const auto& reply : session->handle(msg)) {
      ws.write(net::buffer(reply.dump()), ec);
      if (ec) break;
    }
  }
}

Server::Server(Service& service) : impl_(std::make_unique<Impl>(service)) {}

Server::~Server() { stop(); }

unsigned short Server::start(const std::string& address, unsigned short port) {
  tcp::endpoint ep(net::ip::make_address(address), port);
  impl_->acceptor.emplace(impl_->ioc);
  impl_->acceptor->open(ep.protocol());
  impl_->acceptor->set_option(net::socket_base::reuse_address(true));
  impl_->acceptor->bind(ep);
  impl_->acceptor->listen();
  impl_->stopping = false;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  return impl_->acceptor->local_endpoint().port();
}

void Server::stop() {
  if (!impl_->acceptor) return;
  impl_->stopping = true;
  ::shutdown(impl_->acceptor->native_handle(), SHUT_RDWR);
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  beast::error_code ec;
  impl_->acceptor->close(ec);
  impl_->acceptor.reset();

  std::list<Impl::Worker> workers;
  {
    std::lock_guard lock(impl_->mu);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) w.thread.join();
}

}  // namespace dictate
