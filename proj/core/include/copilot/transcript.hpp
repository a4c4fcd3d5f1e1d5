#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/clock.hpp"

namespace copilot {

using Seq = std::int64_t;

enum class Speaker { interviewer, candidate };
enum class Finality { partial, final };

std::string_view to_string(Speaker s) noexcept;
std::string_view to_string(Finality f) noexcept;
Speaker parse_speaker(std::string_view s);
Finality parse_finality(std::string_view s);

struct TranscriptSegment {
  // Utterance identity: partials and the final for one utterance share it.
  std::string segment_id;
  // 0 until the segment is finalized and persisted.
  Seq seq = 0;
  Speaker speaker = Speaker::candidate;
  std::string text;
  Millis t_start = 0;
  Millis t_end = 0;
  Finality finality = Finality::final;

  bool is_final() const noexcept { return finality == Finality::final; }
  bool operator==(const TranscriptSegment&) const = default;
};

void to_json(nlohmann::json& j, const TranscriptSegment& s);
void from_json(const nlohmann::json& j, TranscriptSegment& s);

// Pull-based stream of segments. next() blocks until a segment is available
// (pacing sources sleep) and returns nullopt at end of stream.
class TranscriptSource {
 public:
  virtual ~TranscriptSource() = default;
  virtual std::optional<TranscriptSegment> next() = 0;
};

// One parsed line of a replay file.
TranscriptSegment parse_replay_line(std::string_view line, std::size_t line_number);

class ReplaySource final : public TranscriptSource {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // speed 0 emits as fast as consumed; speed s > 0 waits until the recorded
  // t_end / s has elapsed since the first next() call.
  ReplaySource(std::vector<TranscriptSegment> segments, double speed, Sleeper sleeper = {});

  std::optional<TranscriptSegment> next() override;
  std::size_t size() const noexcept { return segments_.size(); }

 private:
  std::vector<TranscriptSegment> segments_;
  std::size_t cursor_ = 0;
  double speed_;
  Sleeper sleeper_;
  std::optional<std::chrono::steady_clock::time_point> started_;
};

// Parses the whole file up front so that malformed lines surface before any
// segment is emitted. Throws file_not_found, malformed_line, invalid_config.
std::unique_ptr<ReplaySource> open_replay_source(const std::filesystem::path& path, double speed,
                                                 ReplaySource::Sleeper sleeper = {});

// Stand-in for a vendor streaming speech-to-text client. Segments are pushed
// by the vendor callback thread and pulled by the session pump.
class PushTranscriptSource final : public TranscriptSource {
 public:
  PushTranscriptSource();
  ~PushTranscriptSource() override;
  void push(TranscriptSegment segment);
  void close();
  std::optional<TranscriptSegment> next() override;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

enum class IngestOutcome { accepted, superseded_partial, rejected };
std::string_view to_string(IngestOutcome o) noexcept;

// Partial-hypothesis bookkeeping for one session. Finals are persisted by the
// session; this tracks what the live view shows and classifies arrivals.
class LiveTranscript {
 public:
  struct Classification {
    IngestOutcome outcome;
    bool out_of_order = false;
    std::string reason;
  };

  explicit LiveTranscript(Millis out_of_order_tolerance_ms = 2000)
      : tolerance_ms_(out_of_order_tolerance_ms) {}

  // Does not mutate; call commit_* once the caller decides to proceed.
  Classification classify(const TranscriptSegment& segment) const;
  void commit_partial(const TranscriptSegment& segment);
  void commit_final(const TranscriptSegment& segment);

  // Persisted finals followed by any open partials (ordered by segment_id).
  std::vector<TranscriptSegment> view() const;
  const std::map<std::string, TranscriptSegment>& partials() const noexcept { return partials_; }

 private:
  Millis tolerance_ms_;
  std::vector<TranscriptSegment> finals_;
  std::map<std::string, TranscriptSegment> partials_;
  std::map<std::string, Seq> finalized_ids_;
  std::optional<Millis> last_final_start_;
};

}  // namespace copilot
