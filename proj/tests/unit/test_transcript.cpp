#include <gtest/gtest.h>

#include <thread>

#include "copilot/error.hpp"
#include "copilot/transcript.hpp"
#include "fixtures.hpp"

using namespace copilot;

namespace {

TranscriptSegment seg(std::string id, Millis start, Millis end, Finality f = Finality::final,
                      Speaker sp = Speaker::candidate) {
  return TranscriptSegment{std::move(id), 0, sp, "text", start, end, f};
}

ErrorCode code_of(std::string_view line) {
  try {
    parse_replay_line(line, 7);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
    return e.code();
  }
  return ErrorCode::provider_failure;
}

}  // namespace

TEST(ReplayLine, ParsesRequiredFields) {
  auto s = parse_replay_line(R"({"speaker":"candidate","text":"hi","t_start":5,"t_end":9})", 3);
  EXPECT_EQ(s.segment_id, "u3");
  EXPECT_EQ(s.speaker, Speaker::candidate);
  EXPECT_EQ(s.text, "hi");
  EXPECT_EQ(s.t_start, 5);
  EXPECT_EQ(s.t_end, 9);
  EXPECT_TRUE(s.is_final());
  EXPECT_EQ(s.seq, 0);
}

TEST(ReplayLine, OptionalFinalityAndId) {
  auto s = parse_replay_line(
      R"({"speaker":"interviewer","text":"hi","t_start":0,"t_end":0,"finality":"partial","segment_id":"x"})", 1);
  EXPECT_FALSE(s.is_final());
  EXPECT_EQ(s.segment_id, "x");
}

TEST(ReplayLine, MalformedLinesNameTheLine) {
  EXPECT_EQ(code_of("{not json"), ErrorCode::malformed_line);
  EXPECT_EQ(code_of("[1,2]"), ErrorCode::malformed_line);
  EXPECT_EQ(code_of(R"({"speaker":"robot","text":"x","t_start":0,"t_end":1})"), ErrorCode::malformed_line);
  EXPECT_EQ(code_of(R"({"speaker":"candidate","t_start":0,"t_end":1})"), ErrorCode::malformed_line);
  EXPECT_EQ(code_of(R"({"speaker":"candidate","text":"x","t_start":5,"t_end":1})"), ErrorCode::malformed_line);
}

TEST(ReplaySource, ReadsFileAndSkipsBlankLines) {
  auto src = open_replay_source(testkit::data_dir() / "replays" / "backend_short.jsonl", 0);
  EXPECT_EQ(src->size(), 9u);
  int n = 0;
  while (src->next()) ++n;
  EXPECT_EQ(n, 9);
}

TEST(ReplaySource, MalformedFileFailsBeforeEmitting) {
  try {
    open_replay_source(testkit::data_dir() / "replays" / "malformed.jsonl", 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_line);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ReplaySource, MissingFile) {
  try {
    open_replay_source("/no/such/file.jsonl", 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::file_not_found);
  }
}

TEST(ReplaySource, PacesBySpeed) {
  std::vector<std::chrono::milliseconds> sleeps;
  ReplaySource src({seg("a", 0, 1000), seg("b", 1000, 3000)}, 2.0,
                   [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  while (src.next()) {
  }
  ASSERT_FALSE(sleeps.empty());
  EXPECT_LE(sleeps.back().count(), 1500);
  EXPECT_GE(sleeps.back().count(), 1000);
}

TEST(ReplaySource, NegativeSpeedIsConfigError) {
  try {
    ReplaySource src({}, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_config);
  }
}

TEST(PushSource, DeliversAcrossThreads) {
  PushTranscriptSource src;
  std::thread producer([&] {
    for (int i = 0; i < 5; ++i) src.push(seg("p" + std::to_string(i), i, i + 1));
    src.close();
  });
  int n = 0;
  while (src.next()) ++n;
  producer.join();
  EXPECT_EQ(n, 5);
}

TEST(LiveTranscript, PartialsAreSupersededThenFinalized) {
  LiveTranscript lt;
  auto p1 = seg("u1", 0, 500, Finality::partial);
  EXPECT_EQ(lt.classify(p1).outcome, IngestOutcome::accepted);
  lt.commit_partial(p1);
  auto p2 = seg("u1", 0, 900, Finality::partial);
  EXPECT_EQ(lt.classify(p2).outcome, IngestOutcome::superseded_partial);
  lt.commit_partial(p2);
  EXPECT_EQ(lt.view().size(), 1u);

  auto f = seg("u1", 0, 1000);
  f.seq = 1;
  EXPECT_EQ(lt.classify(f).outcome, IngestOutcome::accepted);
  lt.commit_final(f);
  EXPECT_TRUE(lt.partials().empty());
  EXPECT_EQ(lt.view().size(), 1u);
  EXPECT_TRUE(lt.view()[0].is_final());

  EXPECT_EQ(lt.classify(seg("u1", 0, 1100, Finality::partial)).outcome, IngestOutcome::rejected);
  EXPECT_EQ(lt.classify(seg("u1", 0, 1100)).outcome, IngestOutcome::rejected);
}

TEST(LiveTranscript, OutOfOrderBeyondTolerance) {
  LiveTranscript lt(2000);
  auto a = seg("a", 10'000, 11'000);
  a.seq = 1;
  lt.commit_final(a);
  EXPECT_FALSE(lt.classify(seg("b", 8'500, 9'000)).out_of_order);
  auto late = lt.classify(seg("c", 7'000, 7'500));
  EXPECT_EQ(late.outcome, IngestOutcome::accepted);
  EXPECT_TRUE(late.out_of_order);
}

TEST(LiveTranscript, RejectsInvertedTimes) {
  LiveTranscript lt;
  EXPECT_EQ(lt.classify(seg("a", 10, 5)).outcome, IngestOutcome::rejected);
}
