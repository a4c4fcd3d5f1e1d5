#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "copilot/gateway.hpp"

namespace copilot {

struct ServerConfig {
  std::string address = "127.0.0.1";
  // 0 binds an ephemeral port; see GatewayServer::port().
  unsigned short port = 8080;
  int io_threads = 2;
  int worker_threads = 2;
  // Serves static files (the web UI) for plain GET requests when set.
  std::optional<std::filesystem::path> ui_dir;
  // Outbound messages a slow client may have queued before it is dropped.
  std::size_t max_queued_messages = 4096;
};

// One port, two protocols: WebSocket upgrades carry the command/event
// protocol; plain HTTP serves GET /health and the optional UI directory.
class GatewayServer {
 public:
  GatewayServer(SessionManager& manager, ServerConfig config);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds and starts serving. Throws port_in_use or invalid_config.
  void start();
  unsigned short port() const;
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json health_document(const SessionManager& manager);

}  // namespace copilot
