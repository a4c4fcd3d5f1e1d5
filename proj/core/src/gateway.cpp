#include "copilot/gateway.hpp"

#include <fstream>

#include "copilot/log.hpp"
#include "copilot/schema.hpp"

namespace copilot {

using nlohmann::json;

namespace {

bool safe_session_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.find("..") != std::string::npos) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

SessionManager::SessionManager(GatewayConfig config, std::shared_ptr<ModelProvider> provider, const Clock& clock,
                               Executor executor)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      clock_(clock),
      executor_(executor ? std::move(executor) : inline_executor()),
      ids_(clock) {
  if (!provider_) throw Error(ErrorCode::invalid_config, "gateway needs a model provider");
  std::error_code ec;
  std::filesystem::create_directories(config_.data_dir, ec);
  if (ec) {
    throw Error(ErrorCode::invalid_config, "cannot create data dir " + config_.data_dir.string() + ": " + ec.message());
  }
}

SessionManager::~SessionManager() { shutdown(); }

void SessionManager::shutdown() {
  {
    std::lock_guard lock(stop_mutex_);
    stopping_ = true;
  }
  stop_cv_.notify_all();
  std::vector<std::jthread> replays;
  {
    std::lock_guard lock(mutex_);
    replays.swap(replays_);
  }
  replays.clear();  // joins
}

void SessionManager::wait_interruptible(std::chrono::milliseconds d) {
  std::unique_lock lock(stop_mutex_);
  stop_cv_.wait_for(lock, d, [&] { return stopping_; });
}

JobProfile SessionManager::resolve_profile(const json& ref) const {
  if (ref.is_object()) {
    JobProfile profile;
    try {
      profile = ref.get<JobProfile>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_profile, std::string("inline profile: ") + e.what());
    }
    validate(profile);
    return profile;
  }
  if (!ref.is_string() || ref.get<std::string>().empty()) {
    throw Error(ErrorCode::invalid_request, "profile must be a profile name or an inline profile object");
  }
  const auto name = ref.get<std::string>();
  if (name.find('/') == std::string::npos && name.find("..") == std::string::npos) {
    const auto direct = config_.profiles_dir / (name + ".json");
    if (std::filesystem::exists(direct)) return load_profile(direct);
  }
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(config_.profiles_dir, ec)) {
    if (entry.path().extension() != ".json") continue;
    try {
      auto profile = load_profile(entry.path());
      if (profile.job_id == name) return profile;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(ErrorCode::file_not_found, "no profile '" + name + "' in " + config_.profiles_dir.string());
}

SessionOwner::Deps SessionManager::deps_for(const std::string& session_id) const {
  SessionOwner::Deps deps;
  deps.log = std::make_shared<JsonlEventLog>(event_log_path(config_.data_dir, session_id), config_.sync_log);
  deps.provider = provider_;
  deps.clock = &clock_;
  deps.executor = executor_;
  deps.config = config_.engine;
  return deps;
}

std::shared_ptr<SessionOwner> SessionManager::start_session(JobProfile profile) {
  validate(profile);
  const auto id = ids_.next();
  auto owner = SessionOwner::create(id, std::move(profile), deps_for(id));
  owner->start();
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, owner);
  return owner;
}

std::shared_ptr<SessionOwner> SessionManager::open(const std::string& session_id) {
  if (!safe_session_id(session_id)) throw Error(ErrorCode::unknown_session, "invalid session id '" + session_id + "'");
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(session_id); it != sessions_.end()) return it->second;
  const auto path = event_log_path(config_.data_dir, session_id);
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::unknown_session, "unknown session '" + session_id + "'");
  auto owner = SessionOwner::restore(deps_for(session_id));
  if (owner->session_id() != session_id) {
    throw Error(ErrorCode::corrupt_log, path.string() + " belongs to session " + owner->session_id());
  }
  sessions_.emplace(session_id, owner);
  return owner;
}

void SessionManager::attach_replay(const std::shared_ptr<SessionOwner>& owner, const std::filesystem::path& replay,
                                   double speed) {
  auto source = open_replay_source(replay, speed, [this](std::chrono::milliseconds d) { wait_interruptible(d); });
  std::shared_ptr<TranscriptSource> shared(std::move(source));
  std::lock_guard lock(mutex_);
  replays_.emplace_back([this, owner, shared] {
    try {
      while (true) {
        {
          std::lock_guard stop(stop_mutex_);
          if (stopping_) return;
        }
        auto segment = shared->next();
        if (!segment) break;
        owner->ingest(std::move(*segment));
      }
      log(LogLevel::info, "session " + owner->session_id() + ": replay finished");
    } catch (const std::exception& e) {
      log(LogLevel::warn, "session " + owner->session_id() + ": replay stopped: " + e.what());
    }
  });
}

void SessionManager::end_session(const std::shared_ptr<SessionOwner>& owner) {
  owner->end();
  executor_([owner] {
    try {
      owner->summarize();
    } catch (const std::exception& e) {
      log(LogLevel::error, "session " + owner->session_id() + ": summary failed: " + e.what());
    }
  });
}

void SessionManager::record_command(const std::string& session_id, const json& message) {
  if (!config_.command_log || !safe_session_id(session_id)) return;
  json entry{{"at", clock_.now_ms()}, {"message", message}};
  std::lock_guard lock(command_log_mutex_);
  std::ofstream out(config_.data_dir / (session_id + ".commands.jsonl"), std::ios::app);
  out << entry.dump() << '\n';
}

std::size_t SessionManager::active_sessions() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [_, owner] : sessions_) {
    if (owner->state() == SessionState::live && !owner->failed()) ++n;
  }
  return n;
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

json CommandRouter::error_reply(const Error& error, std::string_view command) {
  json reply{{"type", "error"}, {"class", error.class_name()}, {"message", error.what()}, {"command", command}};
  if (const auto* pf = dynamic_cast<const ProviderFailure*>(&error)) {
    reply["failure_class"] = to_string(pf->failure_class());
  }
  return reply;
}

CommandRouter::Result CommandRouter::handle_text(std::string_view text) {
  json message;
  try {
    message = json::parse(text);
  } catch (const json::parse_error& e) {
    return {error_reply(Error(ErrorCode::invalid_request, std::string("message is not JSON: ") + e.what()), ""), {}};
  }
  return handle(message);
}

CommandRouter::Result CommandRouter::handle(const json& message) {
  std::string command;
  if (message.is_object()) {
    if (auto it = message.find("kind"); it != message.end() && it->is_string()) {
      command = it->get<std::string>();
    } else if (auto t = message.find("type"); t != message.end() && t->is_string()) {
      command = t->get<std::string>();
    }
  }
  try {
    if (auto problem = SchemaRegistry::builtin().validate("command.v1", message)) {
      throw Error(ErrorCode::invalid_request, "malformed message: " + *problem);
    }
    return dispatch(message);
  } catch (const Error& e) {
    return {error_reply(e, command), {}};
  } catch (const json::exception& e) {
    return {error_reply(Error(ErrorCode::invalid_request, e.what()), command), {}};
  }
}

CommandRouter::Result CommandRouter::dispatch(const json& message) {
  const auto type = message.at("type").get<std::string>();
  if (type == "subscribe") {
    auto owner = manager_.open(message.at("session_id").get<std::string>());
    return {{{"type", "subscribed"}, {"session_id", owner->session_id()}}, owner};
  }

  const auto kind = message.at("kind").get<std::string>();
  const auto& payload = message.at("payload");
  json ack{{"type", "ack"}, {"command", kind}};

  if (kind == "start_session") {
    if (!payload.contains("profile")) throw Error(ErrorCode::invalid_request, "start_session needs a profile");
    auto profile = manager_.resolve_profile(payload.at("profile"));
    const double speed = payload.value("speed", 1.0);
    std::optional<std::filesystem::path> replay;
    if (auto it = payload.find("replay"); it != payload.end() && !it->is_null()) {
      replay = it->get<std::string>();
      // Parse up front so a bad file fails the command before a session exists.
      (void)open_replay_source(*replay, speed);
    }
    auto owner = manager_.start_session(std::move(profile));
    manager_.record_command(owner->session_id(), message);
    if (replay) manager_.attach_replay(owner, *replay, speed);
    ack["session_id"] = owner->session_id();
    return {ack, owner};
  }

  if (!message.contains("session_id")) throw Error(ErrorCode::invalid_request, kind + " needs a session_id");
  auto owner = manager_.open(message.at("session_id").get<std::string>());
  manager_.record_command(owner->session_id(), message);
  ack["session_id"] = owner->session_id();

  if (kind == "ingest_segment") {
    auto segment_json = payload;
    if (!segment_json.contains("segment_id")) {
      segment_json["segment_id"] = "g" + std::to_string(++segment_counter_);
    }
    auto segment = parse_replay_line(segment_json.dump(), 0);
    auto result = owner->ingest(std::move(segment));
    ack["outcome"] = to_string(result.outcome);
    ack["out_of_order"] = result.out_of_order;
    if (result.seq) ack["seq"] = *result.seq;
    if (!result.reason.empty()) ack["reason"] = result.reason;
  } else if (kind == "add_note") {
    if (!payload.contains("text") || !payload.at("text").is_string()) {
      throw Error(ErrorCode::invalid_request, "add_note needs a text string");
    }
    ack["note"] = owner->add_note(payload.at("text").get<std::string>());
  } else if (kind == "request_question") {
    QuestionRequest request;
    try {
      request = payload.get<QuestionRequest>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_request, std::string("question request: ") + e.what());
    }
    auto outcome = owner->request_question(std::move(request));
    ack["suggestion"] = outcome.suggestion;
    ack["cached"] = outcome.cached;
  } else if (kind == "end_session") {
    manager_.end_session(owner);
  }
  return {ack, {}};
}

}  // namespace copilot
