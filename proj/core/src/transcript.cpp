#include "copilot/transcript.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>

#include "copilot/error.hpp"
#include "copilot/text.hpp"

namespace copilot {

std::string_view to_string(Speaker s) noexcept {
  return s == Speaker::interviewer ? "interviewer" : "candidate";
}

std::string_view to_string(Finality f) noexcept {
  return f == Finality::partial ? "partial" : "final";
}

Speaker parse_speaker(std::string_view s) {
  if (s == "interviewer") return Speaker::interviewer;
  if (s == "candidate") return Speaker::candidate;
  throw Error(ErrorCode::invalid_request, "unknown speaker '" + std::string(s) + "'");
}

Finality parse_finality(std::string_view s) {
  if (s == "partial") return Finality::partial;
  if (s == "final") return Finality::final;
  throw Error(ErrorCode::invalid_request, "unknown finality '" + std::string(s) + "'");
}

std::string_view to_string(IngestOutcome o) noexcept {
  switch (o) {
    case IngestOutcome::accepted: return "accepted";
    case IngestOutcome::superseded_partial: return "superseded_partial";
    case IngestOutcome::rejected: return "rejected";
  }
  return "rejected";
}

void to_json(nlohmann::json& j, const TranscriptSegment& s) {
  j = nlohmann::json{{"segment_id", s.segment_id}, {"seq", s.seq},
                     {"speaker", to_string(s.speaker)}, {"text", s.text},
                     {"t_start", s.t_start}, {"t_end", s.t_end},
                     {"finality", to_string(s.finality)}};
}

void from_json(const nlohmann::json& j, TranscriptSegment& s) {
  j.at("segment_id").get_to(s.segment_id);
  s.seq = j.value("seq", Seq{0});
  s.speaker = parse_speaker(j.at("speaker").get<std::string>());
  j.at("text").get_to(s.text);
  j.at("t_start").get_to(s.t_start);
  j.at("t_end").get_to(s.t_end);
  s.finality = parse_finality(j.value("finality", std::string("final")));
}

TranscriptSegment parse_replay_line(std::string_view line, std::size_t line_number) {
  auto malformed = [&](const std::string& why) {
    return Error(ErrorCode::malformed_line,
                 "line " + std::to_string(line_number) + ": " + why);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw malformed(std::string("invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw malformed("expected a JSON object");
  TranscriptSegment seg;
  try {
    seg.speaker = parse_speaker(j.at("speaker").get<std::string>());
    j.at("text").get_to(seg.text);
    seg.t_start = j.at("t_start").get<Millis>();
    seg.t_end = j.at("t_end").get<Millis>();
    if (auto it = j.find("finality"); it != j.end()) seg.finality = parse_finality(it->get<std::string>());
    seg.segment_id = j.value("segment_id", "u" + std::to_string(line_number));
  } catch (const nlohmann::json::exception& e) {
    throw malformed(e.what());
  } catch (const Error& e) {
    throw malformed(e.what());
  }
  if (seg.t_start > seg.t_end) throw malformed("t_start is after t_end");
  return seg;
}

ReplaySource::ReplaySource(std::vector<TranscriptSegment> segments, double speed, Sleeper sleeper)
    : segments_(std::move(segments)), speed_(speed), sleeper_(std::move(sleeper)) {
  if (speed_ < 0) throw Error(ErrorCode::invalid_config, "replay speed must be >= 0");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::optional<TranscriptSegment> ReplaySource::next() {
  if (cursor_ >= segments_.size()) return std::nullopt;
  auto seg = segments_[cursor_++];
  if (speed_ > 0) {
    const auto now = std::chrono::steady_clock::now();
    if (!started_) started_ = now;
    const auto due = *started_ + std::chrono::milliseconds(
                                     static_cast<std::int64_t>(static_cast<double>(seg.t_end) / speed_));
    if (due > now) {
      sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(due - now));
    }
  }
  return seg;
}

std::unique_ptr<ReplaySource> open_replay_source(const std::filesystem::path& path, double speed,
                                                 ReplaySource::Sleeper sleeper) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open replay file " + path.string());
  std::vector<TranscriptSegment> segments;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (text::trim(line).empty()) continue;
    segments.push_back(parse_replay_line(line, line_number));
  }
  return std::make_unique<ReplaySource>(std::move(segments), speed, std::move(sleeper));
}

struct PushTranscriptSource::State {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<TranscriptSegment> queue;
  bool closed = false;
};

PushTranscriptSource::PushTranscriptSource() : state_(std::make_unique<State>()) {}
PushTranscriptSource::~PushTranscriptSource() = default;

void PushTranscriptSource::push(TranscriptSegment segment) {
  {
    std::lock_guard lock(state_->mutex);
    if (state_->closed) return;
    state_->queue.push_back(std::move(segment));
  }
  state_->cv.notify_one();
}

void PushTranscriptSource::close() {
  {
    std::lock_guard lock(state_->mutex);
    state_->closed = true;
  }
  state_->cv.notify_all();
}

std::optional<TranscriptSegment> PushTranscriptSource::next() {
  std::unique_lock lock(state_->mutex);
  state_->cv.wait(lock, [&] { return state_->closed || !state_->queue.empty(); });
  if (state_->queue.empty()) return std::nullopt;
  auto seg = std::move(state_->queue.front());
  state_->queue.pop_front();
  return seg;
}

LiveTranscript::Classification LiveTranscript::classify(const TranscriptSegment& segment) const {
  if (segment.t_start > segment.t_end) {
    return {IngestOutcome::rejected, false, "t_start is after t_end"};
  }
  if (finalized_ids_.contains(segment.segment_id)) {
    return {IngestOutcome::rejected, false,
            "utterance '" + segment.segment_id + "' is already final"};
  }
  if (!segment.is_final()) {
    const bool replaces = partials_.contains(segment.segment_id);
    return {replaces ? IngestOutcome::superseded_partial : IngestOutcome::accepted, false, {}};
  }
  const bool out_of_order =
      last_final_start_ && segment.t_start + tolerance_ms_ < *last_final_start_;
  return {IngestOutcome::accepted, out_of_order, {}};
}

void LiveTranscript::commit_partial(const TranscriptSegment& segment) {
  partials_[segment.segment_id] = segment;
}

void LiveTranscript::commit_final(const TranscriptSegment& segment) {
  partials_.erase(segment.segment_id);
  finalized_ids_[segment.segment_id] = segment.seq;
  last_final_start_ = segment.t_start;
  finals_.push_back(segment);
}

std::vector<TranscriptSegment> LiveTranscript::view() const {
  auto out = finals_;
  for (const auto& [id, seg] : partials_) out.push_back(seg);
  return out;
}

}  // namespace copilot
