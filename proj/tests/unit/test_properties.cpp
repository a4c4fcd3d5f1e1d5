#include <gtest/gtest.h>

#include "copilot/replay.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace copilot;

// Randomized sessions checked against independent oracles.
class RandomSession : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomSession, MockEvidenceMatchesRegexOracle) {
  std::mt19937_64 rng(GetParam());
  testkit::OwnerHarness h(testkit::backend_profile(), "p" + std::to_string(GetParam()));
  h.owner->start();

  std::set<Seq> persisted;
  std::vector<std::string> problems;
  h.owner->subscribe({[&](const EventEnvelope& e) {
                        // Runs under the owner's lock after the event is applied.
                        if (e.kind == EventKind::segment_final) {
                          persisted.insert(e.payload.at("segment").at("seq").get<Seq>());
                        }
                      },
                      {},
                      {}});

  const auto script = testkit::random_script(rng, h.owner->snapshot()->profile(), 50);
  for (const auto& s : script) {
    h.owner->ingest(s);
    const auto snap = h.owner->snapshot();
    for (auto& p : testkit::graph_problems(snap->graph(), persisted)) problems.push_back(p);
  }
  h.owner->end();
  EXPECT_TRUE(problems.empty()) << problems.front();

  const auto snap = h.owner->snapshot();
  EXPECT_EQ(testkit::observed_evidence(snap->graph()),
            testkit::expected_mock_evidence(snap->profile(), snap->segments()));
}

TEST_P(RandomSession, CoverageNeverRegressesOverPrefixes) {
  std::mt19937_64 rng(GetParam() + 1000);
  testkit::OwnerHarness h(testkit::backend_profile());
  h.owner->start();
  for (const auto& s : testkit::random_script(rng, h.owner->snapshot()->profile(), 40)) h.owner->ingest(s);
  h.owner->end();
  const auto events = h.owner->events();

  std::map<std::string, int> best;
  for (std::size_t n = 1; n <= events.size(); ++n) {
    const auto s = replay_log(std::span(events).first(n));
    for (const auto& c : coverage(s.graph(), s.profile())) {
      const int rank = testkit::status_rank(c.status);
      EXPECT_GE(rank, best[c.skill_id]) << c.skill_id << " at prefix " << n;
      best[c.skill_id] = rank;
    }
  }
}

TEST_P(RandomSession, ReplayReproducesFinalState) {
  std::mt19937_64 rng(GetParam() + 2000);
  testkit::OwnerHarness h(testkit::backend_profile());
  h.owner->start();
  for (const auto& s : testkit::random_script(rng, h.owner->snapshot()->profile(), 30)) h.owner->ingest(s);
  h.owner->add_note("mid");
  h.owner->request_question({QuestionMode::contextual, std::nullopt, std::nullopt, 0});
  h.owner->end();
  h.owner->summarize();
  EXPECT_EQ(canonical_string(replay_log(h.log->read_all())), canonical_string(*h.owner->snapshot()));
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomSession, ::testing::Range<std::uint64_t>(1, 9));
