#include <benchmark/benchmark.h>

#include "copilot/engine.hpp"
#include "copilot/log.hpp"
#include "copilot/replay.hpp"

using namespace copilot;

namespace {

JobProfile bench_profile() {
  return {"bench",
          "Backend Engineer",
          "Builds services",
          {{"python", "Python", std::nullopt, {"python", "django"}},
           {"rest", "REST APIs", std::nullopt, {"rest", "api", "endpoint"}},
           {"sql", "SQL", std::nullopt, {"sql", "postgres", "query"}},
           {"testing", "Testing", std::nullopt, {"pytest", "coverage"}},
           {"leadership", "Leadership", std::nullopt, {"mentored", "led"}}}};
}

std::vector<TranscriptSegment> script(int n) {
  static const char* lines[] = {
      "I built a REST api in Python with django and tuned every postgres query.",
      "So what happened next?",
      "We had pytest suites with high coverage and I mentored two juniors.",
      "Honestly I enjoy hiking on weekends.",
  };
  std::vector<TranscriptSegment> out;
  for (int i = 0; i < n; ++i) {
    const auto* text = lines[i % 4];
    out.push_back({"b" + std::to_string(i), 0, i % 4 == 1 ? Speaker::interviewer : Speaker::candidate, text,
                   i * 1000, i * 1000 + 800, Finality::final});
  }
  return out;
}

struct Quiet {
  Quiet() { set_log_sink([](LogLevel, std::string_view) {}); }
} quiet;

// One final segment through ingestion, evaluation and event emission.
void BM_IngestSegment(benchmark::State& state) {
  const auto segments = script(4096);
  ManualClock clock;
  SessionOwner::Deps deps;
  deps.provider = std::make_shared<MockProvider>();
  deps.clock = &clock;
  std::shared_ptr<SessionOwner> owner;
  std::size_t i = segments.size();
  for (auto _ : state) {
    if (i == segments.size()) {
      state.PauseTiming();
      deps.log = std::make_shared<MemoryEventLog>();
      owner = SessionOwner::create("bench", bench_profile(), deps);
      owner->start();
      i = 0;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(owner->ingest(segments[i++]));
  }
}
BENCHMARK(BM_IngestSegment);

void BM_MockSkillEval(benchmark::State& state) {
  const auto profile = bench_profile();
  const auto graph = KnowledgeGraph::seeded(profile);
  auto seg = script(1).front();
  seg.seq = 7;
  MockProvider mock;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_segment(graph, profile, seg, {}, mock, {}));
}
BENCHMARK(BM_MockSkillEval);

void BM_ReplayLog(benchmark::State& state) {
  ManualClock clock;
  SessionOwner::Deps deps;
  deps.log = std::make_shared<MemoryEventLog>();
  deps.provider = std::make_shared<MockProvider>();
  deps.clock = &clock;
  auto owner = SessionOwner::create("bench", bench_profile(), deps);
  owner->start();
  for (const auto& s : script(static_cast<int>(state.range(0)))) owner->ingest(s);
  owner->end();
  owner->summarize();
  const auto events = owner->events();
  for (auto _ : state) benchmark::DoNotOptimize(replay_log(events));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_ReplayLog)->Arg(50)->Arg(500);

}  // namespace
BENCHMARK_MAIN();
