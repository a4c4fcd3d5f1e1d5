#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/engine.hpp"

namespace copilot {

struct GatewayConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path profiles_dir = "profiles";
  EngineConfig engine;
  // fsync every event append.
  bool sync_log = true;
  // Also append every received command to <data_dir>/<session_id>.commands.jsonl.
  bool command_log = true;
};

// Owns the session owners of one gateway process. Sessions are created from
// profiles or reopened from their event logs on first reference.
class SessionManager {
 public:
  // `executor` runs skill evaluations and post-session summaries.
  SessionManager(GatewayConfig config, std::shared_ptr<ModelProvider> provider, const Clock& clock,
                 Executor executor = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // A string names <profiles_dir>/<ref>.json or a job_id found there; an
  // object is an inline profile. Throws invalid_profile, file_not_found.
  JobProfile resolve_profile(const nlohmann::json& ref) const;

  // Creates, starts and registers a session with a fresh id.
  std::shared_ptr<SessionOwner> start_session(JobProfile profile);
  // In memory, or restored from <data_dir>/<id>.events.jsonl. Throws unknown_session.
  std::shared_ptr<SessionOwner> open(const std::string& session_id);

  // Streams a replay file into a live session on a background thread. The
  // file is parsed before this returns, so malformed input fails here.
  void attach_replay(const std::shared_ptr<SessionOwner>& owner, const std::filesystem::path& replay, double speed);

  // Ends the session and schedules its summary on the executor.
  void end_session(const std::shared_ptr<SessionOwner>& owner);

  void record_command(const std::string& session_id, const nlohmann::json& message);

  std::size_t active_sessions() const;
  std::vector<std::string> session_ids() const;
  std::string provider_kind() const { return std::string(provider_->kind()); }
  const GatewayConfig& config() const noexcept { return config_; }

  // Stops replay threads; idempotent.
  void shutdown();

 private:
  SessionOwner::Deps deps_for(const std::string& session_id) const;
  void wait_interruptible(std::chrono::milliseconds d);

  GatewayConfig config_;
  std::shared_ptr<ModelProvider> provider_;
  const Clock& clock_;
  Executor executor_;
  UlidGenerator ids_;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionOwner>> sessions_;
  std::mutex command_log_mutex_;

  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  bool stopping_ = false;
  std::vector<std::jthread> replays_;
};

// Transport-independent handling of client messages. Replies are JSON
// objects of type "ack", "subscribed" or "error"; events travel separately
// through SessionOwner subscriptions.
class CommandRouter {
 public:
  explicit CommandRouter(SessionManager& manager) : manager_(manager) {}

  struct Result {
    nlohmann::json reply;
    // Set when the caller should now receive this session's events.
    std::shared_ptr<SessionOwner> subscribe_to;
  };

  Result handle(const nlohmann::json& message);
  // Parses raw text first; malformed JSON becomes an invalid-request error reply.
  Result handle_text(std::string_view text);

  static nlohmann::json error_reply(const Error& error, std::string_view command);

 private:
  Result dispatch(const nlohmann::json& message);

  SessionManager& manager_;
  std::atomic<std::uint64_t> segment_counter_{0};
};

}  // namespace copilot
