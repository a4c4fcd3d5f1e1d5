#include <gtest/gtest.h>

#include "copilot/error.hpp"
#include "copilot/replay.hpp"
#include "fixtures.hpp"

using namespace copilot;

namespace {

std::vector<EventEnvelope> sample_log() {
  testkit::OwnerHarness h(testkit::backend_profile(), "s1");
  h.owner->start();
  Millis t = 0;
  for (const char* text : {"I built a REST service in Python.", "We tuned postgres queries with sql."}) {
    h.owner->ingest({"u" + std::to_string(t), 0, Speaker::candidate, text, t, t + 500, Finality::final});
    t += 1000;
  }
  h.owner->add_note("solid");
  h.owner->end();
  return h.owner->events();
}

}  // namespace

TEST(Replay, RebuildsFinalState) {
  testkit::OwnerHarness h(testkit::backend_profile(), "s1");
  h.owner->start();
  h.owner->ingest({"a", 0, Speaker::candidate, "pytest coverage for the django api", 0, 10, Finality::final});
  h.owner->end();
  const auto events = h.owner->events();
  EXPECT_EQ(canonical_string(replay_log(events)), canonical_string(*h.owner->snapshot()));
}

TEST(Replay, EveryPrefixIsValid) {
  const auto events = sample_log();
  ASSERT_GT(events.size(), 5u);
  for (std::size_t n = 1; n <= events.size(); ++n) {
    EXPECT_NO_THROW(replay_log(std::span(events).first(n))) << n;
  }
}

TEST(Replay, RejectsGapsAndMissingStart) {
  auto events = sample_log();
  EXPECT_THROW(replay_log(std::span(events).subspan(1)), Error);
  auto gapped = events;
  gapped.erase(gapped.begin() + 2);
  try {
    replay_log(gapped);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::corrupt_log);
  }
  EXPECT_THROW(replay_log({}), Error);
}

TEST(Replay, RejectsTamperedPayload) {
  auto events = sample_log();
  for (auto& e : events) {
    if (e.kind == EventKind::segment_final) {
      e.payload["segment"]["speaker"] = "narrator";
      break;
    }
  }
  try {
    replay_log(events);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::corrupt_log);
  }
}
