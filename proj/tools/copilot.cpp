#include <openssl/evp.h>
#include <pthread.h>

#include <CLI11.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/thread_pool.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "copilot/engine.hpp"
#include "copilot/error.hpp"
#include "copilot/gateway.hpp"
#include "copilot/gateway_server.hpp"
#include "copilot/log.hpp"
#include "copilot/replay.hpp"

namespace fs = std::filesystem;
using namespace copilot;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

// Failure at a named stage; printed as "error: <stage>: <class>: <message>".
struct StageError {
  std::string stage;
  std::string cls;
  std::string message;
  int exit_code;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_profile:
    case ErrorCode::file_not_found:
    case ErrorCode::port_in_use:
      return kConfigError;
    default:
      return kRuntimeError;
  }
}

template <class F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageError{std::string(name), std::string(e.class_name()), e.what(), exit_code_for(e.code())};
  } catch (const std::exception& e) {
    throw StageError{std::string(name), "internal", e.what(), kRuntimeError};
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorCode::storage_failure, "cannot write " + path.string());
}

// Same inputs, same id: reruns overwrite their own artifacts.
std::string derived_session_id(const JobProfile& profile, const std::string& replay_bytes) {
  const auto material = nlohmann::json(profile).dump() + '\n' + replay_bytes;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::invalid_config, "sha256 unavailable");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string id = "replay-";
  for (unsigned int i = 0; i < 8; ++i) {
    id += hex[digest[i] >> 4];
    id += hex[digest[i] & 0xf];
  }
  return id;
}

std::shared_ptr<ModelProvider> provider_from(const std::string& kind) {
  auto settings = provider_settings_from_env([](const char* name) { return std::getenv(name); });
  settings.kind = kind;
  return make_provider(settings);
}

struct ServeOptions {
  unsigned short port = 8080;
  std::string address = "127.0.0.1";
  std::string data_dir = "data";
  std::string profiles_dir = "profiles";
  std::string provider = "mock";
  int threads = 2;
  std::string ui_dir;
};

int cmd_serve(const ServeOptions& o) {
  // Signals are collected by sigwait below; every thread started later inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto provider = stage("config", [&] { return provider_from(o.provider); });
  if (o.threads < 1) throw StageError{"config", "invalid-config", "--threads must be at least 1", kConfigError};

  boost::asio::thread_pool pool(static_cast<std::size_t>(o.threads));
  Executor executor = [&pool](std::function<void()> job) { boost::asio::post(pool, std::move(job)); };
  SystemClock clock;

  GatewayConfig gc;
  gc.data_dir = o.data_dir;
  gc.profiles_dir = o.profiles_dir;
  auto manager = stage("config", [&] { return std::make_unique<SessionManager>(gc, provider, clock, executor); });

  ServerConfig sc;
  sc.address = o.address;
  sc.port = o.port;
  sc.io_threads = o.threads;
  sc.worker_threads = o.threads;
  if (!o.ui_dir.empty()) sc.ui_dir = o.ui_dir;
  GatewayServer server(*manager, sc);
  stage("serve", [&] { server.start(); });
  log(LogLevel::info, "listening on " + o.address + ":" + std::to_string(server.port()) + " provider=" +
                          manager->provider_kind() + " data_dir=" + o.data_dir);

  int sig = 0;
  sigwait(&signals, &sig);
  log(LogLevel::info, "shutting down");
  server.stop();
  manager->shutdown();
  pool.join();
  return 0;
}

struct ReplayOptions {
  std::string profile;
  std::string replay;
  double speed = 1.0;
  std::string out = "out";
  std::string provider = "mock";
  std::string session_id;
};

int cmd_run_replay(const ReplayOptions& o) {
  auto provider = stage("config", [&] { return provider_from(o.provider); });
  const auto profile = stage("profile", [&] { return load_profile(o.profile); });
  const auto replay_bytes = stage("ingestion", [&] { return read_file(o.replay); });
  auto source = stage("ingestion", [&] { return open_replay_source(o.replay, o.speed); });

  const fs::path out = o.out;
  const auto id = o.session_id.empty() ? derived_session_id(profile, replay_bytes) : o.session_id;
  const auto log_path = event_log_path(out, id);
  stage("storage", [&] {
    fs::create_directories(out);
    fs::remove(log_path);
  });

  SystemClock clock;
  SessionOwner::Deps deps;
  deps.log = stage("storage", [&] { return std::make_shared<JsonlEventLog>(log_path); });
  deps.provider = provider;
  deps.clock = &clock;
  auto owner = stage("session", [&] { return SessionOwner::create(id, profile, deps); });
  owner->subscribe({[](const EventEnvelope& e) {
                      if (e.kind == EventKind::degraded) {
                        log(LogLevel::warn, "degraded: " + e.payload.dump());
                      }
                    },
                    {},
                    {}});

  stage("ingestion", [&] {
    owner->start();
    pump(*source, *owner);
  });
  stage("evaluation", [&] { owner->end(); });
  const auto report = stage("summary", [&] { return owner->summarize(); });

  stage("output", [&] {
    write_file(out / "summary.json", render_summary(report, ReportFormat::json));
    const auto snap = owner->snapshot();
    write_file(out / "graph.json", export_graph(snap->graph(), snap->profile()).dump(2) + "\n");
  });
  std::cout << "session " << id << ": " << (out / "summary.json").string() << ", " << (out / "graph.json").string()
            << ", " << log_path.string() << "\n";
  return 0;
}

struct ExportOptions {
  std::string session;
  std::string data_dir = "data";
  std::string format = "json";
  std::string out;
};

int cmd_export(const ExportOptions& o) {
  const auto format = stage("config", [&] {
    try {
      return parse_report_format(o.format);
    } catch (const Error& e) {
      throw Error(ErrorCode::invalid_config, e.what());
    }
  });
  const auto rendered = stage("export", [&] {
    const auto session = replay_log(read_event_log(event_log_path(o.data_dir, o.session)));
    if (!session.summary()) {
      throw Error(ErrorCode::session_not_summarized, "session " + o.session + " has no summary yet");
    }
    return render_summary(*session.summary(), format);
  });
  if (o.out.empty()) {
    std::cout << rendered;
  } else {
    stage("output", [&] { write_file(o.out, rendered); });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interview copilot: gateway, headless replay and report export"};
  app.require_subcommand(1);

  ServeOptions serve;
  auto* s = app.add_subcommand("serve", "Run the gateway (WebSocket + /health)");
  s->add_option("--port", serve.port, "Listen port; 0 picks a free one")->envname("COPILOT_PORT")->capture_default_str();
  s->add_option("--address", serve.address, "Bind address")->envname("COPILOT_ADDRESS")->capture_default_str();
  s->add_option("--data-dir", serve.data_dir, "Event log directory")->envname("COPILOT_DATA_DIR")->capture_default_str();
  s->add_option("--profiles", serve.profiles_dir, "Job profile directory")
      ->envname("COPILOT_PROFILES_DIR")
      ->capture_default_str();
  s->add_option("--provider", serve.provider, "mock | http")->envname("MODEL_PROVIDER")->capture_default_str();
  s->add_option("--threads", serve.threads, "I/O and worker threads")->envname("COPILOT_THREADS")->capture_default_str();
  s->add_option("--ui-dir", serve.ui_dir, "Static files served for plain GET requests")->envname("COPILOT_UI_DIR");

  ReplayOptions replay;
  auto* r = app.add_subcommand("run-replay", "Drive one session from a replay file and write its artifacts");
  r->add_option("--profile", replay.profile, "Job profile JSON")->required();
  r->add_option("--replay", replay.replay, "Replay JSONL")->required();
  r->add_option("--speed", replay.speed, "Playback speed; 0 = as fast as possible")
      ->envname("COPILOT_REPLAY_SPEED")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  r->add_option("--out", replay.out, "Output directory")->capture_default_str();
  r->add_option("--provider", replay.provider, "mock | http")->envname("MODEL_PROVIDER")->capture_default_str();
  r->add_option("--session-id", replay.session_id, "Defaults to an id derived from the inputs");

  ExportOptions exp;
  auto* e = app.add_subcommand("export", "Render the summary of a finished session");
  e->add_option("--session", exp.session, "Session id")->required();
  e->add_option("--data-dir", exp.data_dir, "Event log directory")->envname("COPILOT_DATA_DIR")->capture_default_str();
  e->add_option("--format", exp.format, "json | markdown")->capture_default_str();
  e->add_option("--out", exp.out, "Output file; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);
    std::cerr << "error: config: invalid-config: " << err.what() << "\n";
    return kConfigError;
  }

  try {
    if (s->parsed()) return cmd_serve(serve);
    if (r->parsed()) return cmd_run_replay(replay);
    return cmd_export(exp);
  } catch (const StageError& err) {
    std::cerr << "error: " << err.stage << ": " << err.cls << ": " << err.message << "\n";
    return err.exit_code;
  }
}
