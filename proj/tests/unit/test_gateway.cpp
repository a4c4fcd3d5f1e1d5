#include <gtest/gtest.h>

#include <fstream>

#include "copilot/error.hpp"
#include "copilot/gateway.hpp"
#include "copilot/gateway_server.hpp"
#include "copilot/schema.hpp"
#include "fixtures.hpp"

using namespace copilot;
using nlohmann::json;

namespace {

struct Gateway {
  testkit::TempDir dir;
  ManualClock clock{1'700'000'000'000};
  std::unique_ptr<SessionManager> manager;
  std::unique_ptr<CommandRouter> router;

  Gateway() { reset(); }
  void reset() {
    router.reset();
    if (manager) manager->shutdown();
    GatewayConfig cfg;
    cfg.data_dir = dir.path() / "data";
    cfg.profiles_dir = testkit::data_dir() / "profiles";
    cfg.sync_log = false;
    manager = std::make_unique<SessionManager>(cfg, std::make_shared<MockProvider>(), clock);
    router = std::make_unique<CommandRouter>(*manager);
  }

  json command(std::string kind, json payload, std::optional<std::string> session = std::nullopt) {
    json m{{"type", "command"}, {"kind", std::move(kind)}, {"payload", std::move(payload)}};
    if (session) m["session_id"] = *session;
    return router->handle(m).reply;
  }

  std::string start() {
    const auto reply = command("start_session", {{"profile", "backend_engineer"}});
    EXPECT_EQ(reply.at("type"), "ack") << reply.dump();
    return reply.at("session_id").get<std::string>();
  }
};

}  // namespace

TEST(Gateway, FullFlowOverCommands) {
  Gateway g;
  const auto id = g.start();

  auto ack = g.command("ingest_segment",
                       {{"speaker", "candidate"}, {"text", "I tuned sql on postgres"}, {"t_start", 0}, {"t_end", 900}},
                       id);
  EXPECT_EQ(ack.at("outcome"), "accepted");
  EXPECT_EQ(ack.at("seq"), 1);
  EXPECT_EQ(ack.at("out_of_order"), false);

  ack = g.command("add_note", {{"text", "knows databases"}}, id);
  EXPECT_EQ(ack.at("note").at("note_id"), "n-0001");

  ack = g.command("request_question", {{"mode", "targeted"}, {"target_skill_id", "sql"}}, id);
  ASSERT_EQ(ack.at("type"), "ack") << ack.dump();
  EXPECT_EQ(ack.at("cached"), false);
  EXPECT_FALSE(SchemaRegistry::builtin().validate("question.v1", ack.at("suggestion")));

  ack = g.command("end_session", json::object(), id);
  EXPECT_EQ(ack.at("type"), "ack");
  auto owner = g.manager->open(id);
  const auto events = owner->events();
  EXPECT_EQ(events.back().kind, EventKind::summary_ready);
  for (const auto& e : events) EXPECT_FALSE(SchemaRegistry::builtin().validate("event_envelope.v1", json(e)));

  // The log on disk mirrors memory and every command was recorded.
  EXPECT_EQ(read_event_log(event_log_path(g.manager->config().data_dir, id)), events);
  std::ifstream commands(g.manager->config().data_dir / (id + ".commands.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(commands, line);) ++lines;
  EXPECT_EQ(lines, 5);
}

TEST(Gateway, ErrorClasses) {
  Gateway g;
  const auto id = g.start();
  const auto cls = [](const json& reply) { return reply.at("class").get<std::string>(); };

  EXPECT_EQ(cls(g.router->handle_text("{nope").reply), "invalid-request");
  EXPECT_EQ(cls(g.router->handle(json{{"type", "command"}, {"kind", "explode"}, {"payload", {}}}).reply),
            "invalid-request");
  EXPECT_EQ(cls(g.command("add_note", {{"text", "x"}})), "invalid-request");
  EXPECT_EQ(cls(g.command("add_note", {{"text", "x"}}, "no-such-session")), "unknown-session");
  EXPECT_EQ(cls(g.command("add_note", {{"text", "x"}}, "../etc/passwd")), "unknown-session");
  EXPECT_EQ(cls(g.command("add_note", {{"text", "   "}}, id)), "empty-text");
  EXPECT_EQ(cls(g.command("request_question", {{"mode", "deep"}, {"target_segment_seq", 7}}, id)),
            "unknown-segment");
  EXPECT_EQ(cls(g.command("request_question", {{"mode", "targeted"}, {"target_skill_id", "cobol"}}, id)),
            "unknown-skill");
  EXPECT_EQ(cls(g.command("start_session", {{"profile", "nope"}})), "file-not-found");
  EXPECT_EQ(cls(g.command("start_session", {{"profile", {{"job_id", "x"}}}})), "invalid-profile");
  EXPECT_EQ(cls(g.command("start_session", {{"profile", "backend_engineer"},
                                             {"replay", (testkit::data_dir() / "replays" / "malformed.jsonl").string()}})),
            "malformed-line");
  EXPECT_EQ(g.manager->session_ids().size(), 1u);

  const auto reply = g.command("add_note", {{"text", "x"}}, "no-such-session");
  EXPECT_EQ(reply.at("command"), "add_note");
  EXPECT_FALSE(reply.at("message").get<std::string>().empty());

  g.command("end_session", json::object(), id);
  EXPECT_EQ(cls(g.command("add_note", {{"text", "x"}}, id)), "session-not-live");
}

TEST(Gateway, ProfileByJobIdAndInline) {
  Gateway g;
  EXPECT_EQ(g.manager->resolve_profile("backend-engineer").title, "Backend Engineer");
  const auto inline_profile = testkit::backend_profile();
  EXPECT_EQ(g.manager->resolve_profile(json(inline_profile)), inline_profile);
}

TEST(Gateway, SubscribeReplaysAndRestoresFromDisk) {
  Gateway g;
  const auto id = g.start();
  g.command("ingest_segment", {{"speaker", "candidate"}, {"text", "pytest everywhere"}, {"t_start", 0}, {"t_end", 1}},
            id);
  const auto before = g.manager->open(id)->events();

  g.reset();  // a new process with the same data directory
  auto result = g.router->handle(json{{"type", "subscribe"}, {"session_id", id}});
  EXPECT_EQ(result.reply.at("type"), "subscribed");
  ASSERT_TRUE(result.subscribe_to);
  EXPECT_EQ(result.subscribe_to->events(), before);
  EXPECT_EQ(g.manager->active_sessions(), 1u);

  EXPECT_EQ(g.router->handle(json{{"type", "subscribe"}, {"session_id", "missing"}}).reply.at("class"),
            "unknown-session");
}

TEST(Gateway, ReplayAttachStreamsIntoSession) {
  Gateway g;
  const auto reply = g.command("start_session", {{"profile", "backend_engineer"},
                                                 {"replay", (testkit::data_dir() / "replays" / "backend_short.jsonl").string()},
                                                 {"speed", 0}});
  ASSERT_EQ(reply.at("type"), "ack") << reply.dump();
  auto owner = g.manager->open(reply.at("session_id").get<std::string>());
  for (int i = 0; i < 200 && owner->snapshot()->segments().size() < 9; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  EXPECT_EQ(owner->snapshot()->segments().size(), 9u);
}

TEST(Gateway, HealthDocument) {
  Gateway g;
  auto doc = health_document(*g.manager);
  EXPECT_EQ(doc.at("status"), "ok");
  EXPECT_EQ(doc.at("active_sessions"), 0);
  EXPECT_EQ(doc.at("provider"), "mock");
  const auto id = g.start();
  EXPECT_EQ(health_document(*g.manager).at("active_sessions"), 1);
  g.command("end_session", json::object(), id);
  EXPECT_EQ(health_document(*g.manager).at("active_sessions"), 0);
}

TEST(Gateway, DataDirMustBeUsable) {
  testkit::TempDir dir;
  const auto file = dir.path() / "plain";
  std::ofstream(file) << "x";
  GatewayConfig cfg;
  cfg.data_dir = file / "sub";
  ManualClock clock;
  try {
    SessionManager m(cfg, std::make_shared<MockProvider>(), clock);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_config);
  }
}
