#include "copilot/gateway_server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "copilot/log.hpp"

namespace copilot {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

json health_document(const SessionManager& manager) {
  return {{"status", "ok"}, {"active_sessions", manager.active_sessions()}, {"provider", manager.provider_kind()}};
}

namespace {

struct Shared {
  SessionManager& manager;
  CommandRouter router;
  const ServerConfig& config;
  net::thread_pool& workers;
};

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Shared& shared) : ws_(std::move(socket)), shared_(shared) {}

  template <class Body, class Allocator>
  void run(http::request<Body, http::basic_fields<Allocator>> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  // Thread-safe; called from session owners while they hold their lock.
  void send(std::string text) {
    if (closed_.load()) return;
    if (queued_.fetch_add(1) >= shared_.config.max_queued_messages) {
      log(LogLevel::warn, "client too slow; dropping connection");
      net::post(ws_.get_executor(), [self = shared_from_this()] { self->drop(); });
      return;
    }
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->outbox_.push_back(std::move(text));
      if (self->outbox_.size() == 1) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close_subscriptions();
      return;
    }
    auto text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    // Commands may block on the model; run them off the I/O threads, one at a
    // time per connection.
    net::post(shared_.workers, [self = shared_from_this(), text = std::move(text)] {
      auto result = self->shared_.router.handle_text(text);
      self->send(result.reply.dump());
      if (result.subscribe_to) self->subscribe(result.subscribe_to);
      net::post(self->ws_.get_executor(), [self] { self->read_next(); });
    });
  }

  void subscribe(const std::shared_ptr<SessionOwner>& owner) {
    {
      std::lock_guard lock(subs_mutex_);
      if (subscriptions_.contains(owner->session_id())) return;
    }
    std::weak_ptr<WsSession> weak = shared_from_this();
    Subscriber sub;
    sub.on_event = [weak](const EventEnvelope& e) {
      if (auto self = weak.lock()) {
        json msg = e;
        msg["type"] = "event";
        self->send(msg.dump());
      }
    };
    const auto session_id = owner->session_id();
    sub.on_partial = [weak, session_id](const TranscriptSegment& s) {
      if (auto self = weak.lock()) {
        self->send(json{{"type", "partial"}, {"session_id", session_id}, {"segment", s}}.dump());
      }
    };
    sub.on_fatal = [weak](const Error& e) {
      if (auto self = weak.lock()) self->send(CommandRouter::error_reply(e, "").dump());
    };
    const auto handle = owner->subscribe(std::move(sub));
    std::lock_guard lock(subs_mutex_);
    subscriptions_.emplace(session_id, std::make_pair(std::weak_ptr<SessionOwner>(owner), handle));
  }

  void close_subscriptions() {
    closed_ = true;
    std::map<std::string, std::pair<std::weak_ptr<SessionOwner>, std::size_t>> subs;
    {
      std::lock_guard lock(subs_mutex_);
      subs.swap(subscriptions_);
    }
    for (auto& [_, entry] : subs) {
      if (auto owner = entry.first.lock()) owner->unsubscribe(entry.second);
    }
  }

  void drop() {
    if (dropped_) return;
    dropped_ = true;
    close_subscriptions();
    outbox_.clear();
    beast::get_lowest_layer(ws_).socket().close();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close_subscriptions();
      outbox_.clear();
      return;
    }
    outbox_.pop_front();
    queued_.fetch_sub(1);
    if (!outbox_.empty()) write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Shared& shared_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::atomic<std::size_t> queued_{0};
  std::atomic<bool> closed_{false};
  bool dropped_ = false;
  std::mutex subs_mutex_;
  std::map<std::string, std::pair<std::weak_ptr<SessionOwner>, std::size_t>> subscriptions_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read_next, shared_from_this()));
  }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), shared_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>(respond());
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
      if (wec || res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->read_next();
    });
  }

  http::response<http::string_body> make(http::status status, std::string body, std::string_view type) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> respond() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return make(http::status::method_not_allowed, "method not allowed\n", "text/plain");
    }
    std::string target(req_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target == "/health") {
      return make(http::status::ok, health_document(shared_.manager).dump() + "\n", "application/json");
    }
    if (shared_.config.ui_dir && target.find("..") == std::string::npos) {
      auto rel = target == "/" ? std::string("index.html") : target.substr(1);
      const auto path = *shared_.config.ui_dir / rel;
      std::ifstream in(path, std::ios::binary);
      if (in && std::filesystem::is_regular_file(path)) {
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return make(http::status::ok, std::move(body), mime_type(path));
      }
    }
    return make(http::status::not_found, "not found\n", "text/plain");
  }

  beast::tcp_stream stream_;
  Shared& shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct GatewayServer::Impl {
  Impl(SessionManager& manager, ServerConfig cfg)
      : config(std::move(cfg)),
        workers(static_cast<std::size_t>(std::max(1, config.worker_threads))),
        shared{manager, CommandRouter(manager), config, workers},
        acceptor(io) {}

  void accept() {
    acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
        log(LogLevel::warn, std::string("accept failed: ") + ec.message());
      } else {
        std::make_shared<HttpSession>(std::move(socket), shared)->run();
      }
      accept();
    });
  }

  ServerConfig config;
  net::io_context io;
  net::thread_pool workers;
  Shared shared;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool running = false;
  bool stopped = false;
};

GatewayServer::GatewayServer(SessionManager& manager, ServerConfig config)
    : impl_(std::make_unique<Impl>(manager, std::move(config))) {}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::start() {
  auto& d = *impl_;
  beast::error_code ec;
  const auto address = net::ip::make_address(d.config.address, ec);
  if (ec) throw Error(ErrorCode::invalid_config, "bad listen address '" + d.config.address + "'");
  const tcp::endpoint endpoint{address, d.config.port};
  d.acceptor.open(endpoint.protocol(), ec);
  if (!ec) d.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) d.acceptor.bind(endpoint, ec);
  if (ec == net::error::address_in_use) {
    throw Error(ErrorCode::port_in_use, "port " + std::to_string(d.config.port) + " is already in use");
  }
  if (!ec) d.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::invalid_config, "cannot listen on " + d.config.address + ": " + ec.message());

  d.accept();
  d.running = true;
  for (int i = 0; i < std::max(1, d.config.io_threads); ++i) {
    d.threads.emplace_back([&d] { d.io.run(); });
  }
  log(LogLevel::info, "gateway listening on " + d.config.address + ":" + std::to_string(port()));
}

unsigned short GatewayServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->config.port : ep.port();
}

void GatewayServer::stop() {
  auto& d = *impl_;
  {
    std::lock_guard lock(d.mutex);
    if (d.stopped) return;
    d.stopped = true;
  }
  if (d.running) {
    net::post(d.io, [&d] {
      beast::error_code ignored;
      d.acceptor.close(ignored);
    });
    d.io.stop();
    for (auto& t : d.threads) {
      if (t.joinable()) t.join();
    }
  }
  d.workers.join();
  d.stopped_cv.notify_all();
}

void GatewayServer::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

}  // namespace copilot
