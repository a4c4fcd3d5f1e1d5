// Acceptance suite: one PASS/FAIL line per primary criterion, all with the
// mock provider. Exit status is non-zero when any criterion fails.

#include <boost/asio/post.hpp>
#include <boost/asio/thread_pool.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "copilot/error.hpp"
#include "copilot/log.hpp"
#include "copilot/replay.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace copilot;
using Steady = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr int kEquivalenceSessions = 200;
constexpr int kMinSegments = 20;
constexpr int kMaxSegments = 80;
constexpr double kEquivalenceBudgetS = 60.0;
constexpr int kReplaySessions = 50;
constexpr double kReplayBudgetS = 10.0;
constexpr int kSummarySessions = 50;
constexpr double kSummaryBudgetS = 30.0;
constexpr int kQuestionRequests = 100;
constexpr int kLatencySegments = 50;
constexpr int kLatencySessions = 10;
constexpr double kLatencyP95Ms = 200.0;
constexpr double kLatencyBudgetS = 30.0;
constexpr double kFaultRate = 0.30;
constexpr int kFaultSessions = 50;

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(std::string why) {
    pass = false;
    if (problems.size() < 5) problems.push_back(std::move(why));
  }
};

double seconds_since(Steady::time_point t0) { return std::chrono::duration<double>(Steady::now() - t0).count(); }

void report(int n, std::string_view title, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " (" << v.detail << ")";
  for (const auto& p : v.problems) std::cout << " [" << p << "]";
  std::cout << std::endl;
}

std::set<Seq> seqs_of(const Session& s) {
  std::set<Seq> out;
  for (const auto& seg : s.segments()) out.insert(seg.seq);
  return out;
}

// Folds events as they are emitted and checks graph invariants after every
// delta and coverage monotonicity after every event.
struct Folder {
  std::optional<Session> state;
  std::set<Seq> persisted;
  std::map<std::string, int> rank;
  std::vector<std::string> graph_issues;
  std::vector<std::string> coverage_issues;
  int deltas = 0;

  void operator()(const EventEnvelope& e) {
    apply_event(state, e);
    if (e.kind == EventKind::segment_final) persisted.insert(e.payload.at("segment").at("seq").get<Seq>());
    if (e.kind == EventKind::graph_delta) {
      ++deltas;
      for (auto& p : testkit::graph_problems(state->graph(), persisted)) {
        graph_issues.push_back("event " + std::to_string(e.event_seq) + ": " + p);
      }
    }
    for (const auto& c : coverage(state->graph(), state->profile())) {
      const int r = testkit::status_rank(c.status);
      if (r < rank[c.skill_id]) {
        coverage_issues.push_back(c.skill_id + " regressed at event " + std::to_string(e.event_seq));
      }
      rank[c.skill_id] = r;
    }
  }
};

std::vector<TranscriptSegment> script_for(std::uint64_t seed, const JobProfile& profile) {
  std::mt19937_64 rng(seed);
  const int n = std::uniform_int_distribution<int>(kMinSegments, kMaxSegments)(rng);
  return testkit::random_script(rng, profile, n);
}

// Criteria 1, 2 and 4 share one set of sessions.
void run_equivalence(Verdict& c1, Verdict& c2, Verdict& c4) {
  const auto t0 = Steady::now();
  const auto profile = testkit::backend_profile();
  MockProvider mock;
  int mismatches = 0;
  long deltas = 0;
  long events = 0;
  for (int i = 0; i < kEquivalenceSessions; ++i) {
    const auto script = script_for(1000 + i, profile);
    testkit::OwnerHarness h(profile, "acc-" + std::to_string(i));
    Folder fold;
    h.owner->subscribe({[&](const EventEnvelope& e) { fold(e); }, {}, {}});
    h.owner->start();
    for (const auto& s : script) h.owner->ingest(s);
    h.owner->end();
    const auto live = h.owner->snapshot();
    events += static_cast<long>(h.owner->events().size());
    deltas += fold.deltas;

    auto batch = KnowledgeGraph::seeded(profile);
    const auto ev = evaluate_transcript(batch, profile, live->segments(), mock, {});
    const auto persisted = seqs_of(*live);
    batch.apply(ev.delta, [&](Seq s) { return persisted.contains(s); });
    ++deltas;
    for (auto& p : testkit::graph_problems(batch, persisted)) c2.fail("batch session " + std::to_string(i) + ": " + p);

    if (export_graph(live->graph(), profile) != export_graph(batch, profile) || !ev.failures.empty()) {
      ++mismatches;
      c1.fail("session " + std::to_string(i) + " exports differ");
    }
    for (auto& p : fold.graph_issues) c2.fail("session " + std::to_string(i) + " " + p);
    for (auto& p : fold.coverage_issues) c4.fail("session " + std::to_string(i) + " " + p);
  }
  const double secs = seconds_since(t0);
  if (secs >= kEquivalenceBudgetS) {
    c1.fail("took " + std::to_string(secs) + " s");
    c2.fail("took " + std::to_string(secs) + " s");
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d sessions, %d mismatches, %.1f s", kEquivalenceSessions, mismatches, secs);
  c1.detail = buf;
  std::snprintf(buf, sizeof buf, "%ld delta applications checked, %.1f s", deltas, secs);
  c2.detail = buf;
  std::snprintf(buf, sizeof buf, "%ld event prefixes checked", events);
  c4.detail = buf;
}

// A full session: segments, notes, questions, end and summary.
void drive_full_session(SessionOwner& owner, const std::vector<TranscriptSegment>& script, std::mt19937_64& rng) {
  owner.start();
  std::bernoulli_distribution note(0.15);
  std::bernoulli_distribution ask(0.1);
  int i = 0;
  for (const auto& s : script) {
    owner.ingest(s);
    if (note(rng)) owner.add_note("note " + std::to_string(++i) + " on " + s.segment_id);
    if (ask(rng)) {
      try {
        owner.request_question({QuestionMode::contextual, std::nullopt, std::nullopt, 0});
      } catch (const ProviderFailure&) {
      }
    }
  }
  owner.end();
  owner.summarize();
}

Verdict run_replay_determinism() {
  Verdict v;
  const auto t0 = Steady::now();
  const auto profile = testkit::backend_profile();
  testkit::TempDir dir;
  int crashes = 0;
  for (int i = 0; i < kReplaySessions; ++i) {
    std::mt19937_64 rng(5000 + i);
    const auto script = script_for(5000 + i, profile);
    testkit::OwnerHarness h(profile, "rep-" + std::to_string(i));
    drive_full_session(*h.owner, script, rng);
    const auto logged = h.log->read_all();
    if (canonical_string(replay_log(logged)) != canonical_string(*h.owner->snapshot())) {
      v.fail("session " + std::to_string(i) + ": replay differs from live state");
    }

    // Crash after a random prefix: the log stops, a torn line is left behind.
    const auto k = std::uniform_int_distribution<std::int64_t>(1, static_cast<std::int64_t>(logged.size()))(rng);
    const auto path = event_log_path(dir.path(), "crash-" + std::to_string(i));
    ManualClock clock(1'700'000'000'000);
    SessionOwner::Deps deps;
    deps.log = std::make_shared<FailingEventLog>(std::make_shared<JsonlEventLog>(path, false), k + 1);
    deps.provider = std::make_shared<MockProvider>();
    deps.clock = &clock;
    auto crashed = SessionOwner::create("crash-" + std::to_string(i), profile, deps);
    std::mt19937_64 rng2(5000 + i);
    try {
      drive_full_session(*crashed, script, rng2);
    } catch (const Error&) {
      ++crashes;
    }
    if (k < static_cast<std::int64_t>(logged.size()) && !crashed->failed()) {
      v.fail("session " + std::to_string(i) + ": crash was not injected");
      continue;
    }
    {
      std::ofstream torn(path, std::ios::app);
      torn << R"({"event_seq":)" << k + 1 << R"(,"session_id":"crash)";
    }
    try {
      const auto recovered = read_event_log(path);
      if (static_cast<std::int64_t>(recovered.size()) != k) v.fail("session " + std::to_string(i) + ": wrong prefix");
      if (canonical_string(replay_log(recovered)) != canonical_string(*crashed->snapshot())) {
        v.fail("session " + std::to_string(i) + ": recovered state is not the live prefix");
      }
      SessionOwner::Deps again = deps;
      again.log = std::make_shared<JsonlEventLog>(path, false);
      auto restored = SessionOwner::restore(again);
      const auto restored_events = restored->events();
      if (!std::equal(recovered.begin(), recovered.end(), restored_events.begin())) {
        v.fail("session " + std::to_string(i) + ": restore rewrote history");
      }
      if (restored->state() == SessionState::live) {
        restored->end();
        const auto r = restored->summarize();
        if (!testkit::report_problems(r, *restored->snapshot()).empty()) {
          v.fail("session " + std::to_string(i) + ": resumed session produced a bad report");
        }
      }
    } catch (const std::exception& e) {
      v.fail("session " + std::to_string(i) + ": " + e.what());
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kReplayBudgetS) v.fail("took " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d sessions replayed, %d crash injections, %.1f s", kReplaySessions, crashes, secs);
  v.detail = buf;
  return v;
}

Verdict run_summary_completeness() {
  Verdict v;
  const auto t0 = Steady::now();
  const auto profile = testkit::backend_profile();
  int notes = 0;
  for (int i = 0; i < kSummarySessions; ++i) {
    std::mt19937_64 rng(9000 + i);
    testkit::OwnerHarness h(profile, "sum-" + std::to_string(i));
    drive_full_session(*h.owner, script_for(9000 + i, profile), rng);
    const auto snap = h.owner->snapshot();
    notes += static_cast<int>(snap->notes().size());
    if (!snap->summary()) {
      v.fail("session " + std::to_string(i) + " has no summary");
      continue;
    }
    for (auto& p : testkit::report_problems(*snap->summary(), *snap)) v.fail("session " + std::to_string(i) + ": " + p);
  }
  const double secs = seconds_since(t0);
  if (secs >= kSummaryBudgetS) v.fail("took " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d reports, %d notes, %.1f s", kSummarySessions, notes, secs);
  v.detail = buf;
  return v;
}

Verdict run_question_contracts() {
  Verdict v;
  const auto profile = testkit::backend_profile();
  std::mt19937_64 rng(777);
  int cached_ok = 0;
  int deep = 0;
  int done = 0;
  for (int session = 0; done < kQuestionRequests; ++session) {
    testkit::OwnerHarness h(profile, "q-" + std::to_string(session));
    h.owner->start();
    auto script = testkit::random_script(rng, profile, 60);
    std::size_t cursor = 0;
    for (; cursor < 10; ++cursor) h.owner->ingest(script[cursor]);
    for (int r = 0; r < 20 && done < kQuestionRequests; ++r, ++done) {
      const auto snap = h.owner->snapshot();
      QuestionRequest req;
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0:
          req.mode = QuestionMode::deep;
          req.target_segment_seq = std::uniform_int_distribution<Seq>(1, snap->last_seq())(rng);
          ++deep;
          break;
        case 1:
          req.mode = QuestionMode::targeted;
          req.target_skill_id =
              profile.skills[std::uniform_int_distribution<std::size_t>(0, profile.skills.size() - 1)(rng)].skill_id;
          break;
        default: req.mode = QuestionMode::contextual;
      }
      QuestionRequest prepared = req;
      prepared.issued_at_seq = snap->last_seq();
      try {
        const auto first = h.owner->request_question(req);
        for (auto& p : testkit::suggestion_problems(first.suggestion, prepared)) v.fail(p);
        const auto repeat = h.owner->request_question(req);
        if (!repeat.cached || repeat.suggestion != first.suggestion) {
          v.fail("repeat request " + std::to_string(done) + " was not served from cache");
        } else {
          ++cached_ok;
        }
      } catch (const std::exception& e) {
        v.fail(std::string("request failed: ") + e.what());
      }
      if (cursor < script.size() && std::bernoulli_distribution(0.5)(rng)) h.owner->ingest(script[cursor++]);
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d requests, %d deep, %d cached repeats", kQuestionRequests, deep, cached_ok);
  v.detail = buf;
  return v;
}

Verdict run_latency() {
  Verdict v;
  const auto t0 = Steady::now();
  const auto profile = testkit::backend_profile();
  std::vector<double> samples;
  for (int i = 0; i < kLatencySessions; ++i) {
    boost::asio::thread_pool pool(2);
    SystemClock clock;
    SessionOwner::Deps deps;
    deps.log = std::make_shared<MemoryEventLog>();
    deps.provider = std::make_shared<MockProvider>();
    deps.clock = &clock;
    deps.executor = [&pool](std::function<void()> job) { boost::asio::post(pool, std::move(job)); };
    auto owner = SessionOwner::create("lat-" + std::to_string(i), profile, deps);

    std::mutex m;
    std::map<Seq, Steady::time_point> ingested;
    std::map<Seq, Steady::time_point> delta_at;
    owner->subscribe({[&](const EventEnvelope& e) {
                        const auto now = Steady::now();
                        std::lock_guard lock(m);
                        if (e.kind == EventKind::graph_delta) {
                          delta_at[e.payload.at("delta").at("basis_seq").get<Seq>()] = now;
                        }
                      },
                      {},
                      {}});
    owner->start();
    std::mt19937_64 rng(31337 + i);
    ReplaySource source(testkit::random_script(rng, profile, kLatencySegments), 0.0);
    while (auto seg = source.next()) {
      const auto before = Steady::now();
      const auto r = owner->ingest(*seg);
      if (r.seq && seg->speaker == Speaker::candidate) {
        std::lock_guard lock(m);
        ingested[*r.seq] = before;
      }
    }
    owner->end();
    pool.join();
    for (const auto& [seq, t] : ingested) {
      auto it = delta_at.find(seq);
      if (it == delta_at.end()) {
        v.fail("seq " + std::to_string(seq) + " never produced a graph_delta");
        continue;
      }
      samples.push_back(std::chrono::duration<double, std::milli>(it->second - t).count());
    }
  }
  std::sort(samples.begin(), samples.end());
  const double p95 = samples.empty() ? 0.0 : samples[static_cast<std::size_t>(0.95 * (samples.size() - 1))];
  const double secs = seconds_since(t0);
  if (samples.empty()) v.fail("no samples");
  if (p95 >= kLatencyP95Ms) v.fail("p95 too high");
  if (secs >= kLatencyBudgetS) v.fail("took " + std::to_string(secs) + " s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "p95 %.3f ms over %zu segments, limit %.0f ms, %.1f s", p95, samples.size(),
                kLatencyP95Ms, secs);
  v.detail = buf;
  return v;
}

Verdict run_degraded_mode() {
  Verdict v;
  const auto profile = testkit::backend_profile();
  int degraded = 0;
  int fallbacks = 0;
  for (int i = 0; i < kFaultSessions; ++i) {
    auto provider = std::make_shared<FaultInjectingProvider>(std::make_shared<MockProvider>(), kFaultRate, 400 + i);
    testkit::OwnerHarness h(profile, "fault-" + std::to_string(i), provider);
    Folder fold;
    h.owner->subscribe({[&](const EventEnvelope& e) { fold(e); }, {}, {}});
    std::mt19937_64 rng(400 + i);
    try {
      drive_full_session(*h.owner, script_for(400 + i, profile), rng);
    } catch (const std::exception& e) {
      v.fail("session " + std::to_string(i) + " did not complete: " + e.what());
      continue;
    }
    const auto snap = h.owner->snapshot();
    if (snap->state() != SessionState::summarized || !snap->summary()) {
      v.fail("session " + std::to_string(i) + " has no summary");
      continue;
    }
    for (auto& p : fold.graph_issues) v.fail("session " + std::to_string(i) + " " + p);
    for (auto& p : testkit::report_problems(*snap->summary(), *snap)) v.fail("session " + std::to_string(i) + ": " + p);
    for (const auto& e : h.owner->events()) degraded += e.kind == EventKind::degraded ? 1 : 0;
    for (const auto& sec : snap->summary()->skill_sections) {
      if (!sec.narrative_fallback) continue;
      ++fallbacks;
      const auto expected = fallback_section_narrative(*profile.find_skill(sec.skill_id), sec.evidence_citations);
      if (sec.narrative != expected) v.fail("section " + sec.skill_id + " fallback text is wrong");
    }
  }
  if (degraded == 0) v.fail("fault injection produced no degraded events");
  if (fallbacks == 0) v.fail("no fallback narratives were exercised");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d sessions at %.0f%% faults, %d degraded events, %d fallback sections",
                kFaultSessions, kFaultRate * 100, degraded, fallbacks);
  v.detail = buf;
  return v;
}

}  // namespace

int main() {
  set_log_sink([](LogLevel, std::string_view) {});
  Verdict c1, c2, c4;
  run_equivalence(c1, c2, c4);
  const auto c3 = run_replay_determinism();
  const auto c5 = run_summary_completeness();
  const auto c6 = run_question_contracts();
  const auto c7 = run_latency();
  const auto c8 = run_degraded_mode();

  report(1, "incremental/batch equivalence", c1);
  report(2, "graph invariants after every delta", c2);
  report(3, "replay determinism and crash recovery", c3);
  report(4, "coverage monotonicity", c4);
  report(5, "summary completeness", c5);
  report(6, "question mode contracts and caching", c6);
  report(7, "ingest to graph_delta latency", c7);
  report(8, "degraded-mode totality", c8);
  const bool all = c1.pass && c2.pass && c3.pass && c4.pass && c5.pass && c6.pass && c7.pass && c8.pass;
  return all ? 0 : 1;
}
