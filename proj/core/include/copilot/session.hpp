#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/clock.hpp"
#include "copilot/graph.hpp"
#include "copilot/profile.hpp"
#include "copilot/question.hpp"
#include "copilot/summary.hpp"
#include "copilot/transcript.hpp"

namespace copilot {

enum class SessionState { created, live, ended, summarized };
std::string_view to_string(SessionState s) noexcept;
SessionState parse_session_state(std::string_view s);

struct Note {
  std::string note_id;
  std::string text;
  // Milliseconds since the session started.
  Millis wall_time = 0;
  // Seq of the most recent final segment when the note was taken.
  std::optional<Seq> anchor_seq;

  bool operator==(const Note&) const = default;
};

void to_json(nlohmann::json& j, const Note& n);
void from_json(const nlohmann::json& j, Note& n);

// Aggregate root for one interview. Every mutator enforces the lifecycle
// created -> live -> ended -> summarized and the append-only lists; a failed
// call leaves the session unchanged.
class Session {
 public:
  // Throws invalid_profile. The graph is seeded with one node per skill.
  static Session create(std::string session_id, JobProfile profile);

  const std::string& id() const noexcept { return id_; }
  const JobProfile& profile() const noexcept { return profile_; }
  SessionState state() const noexcept { return state_; }
  Millis started_at() const noexcept { return started_at_; }
  const std::vector<TranscriptSegment>& segments() const noexcept { return segments_; }
  const std::vector<Note>& notes() const noexcept { return notes_; }
  const KnowledgeGraph& graph() const noexcept { return graph_; }
  const std::vector<QuestionSuggestion>& suggestions() const noexcept { return suggestions_; }
  const std::optional<SummaryReport>& summary() const noexcept { return summary_; }

  // 0 when nothing has been finalized yet.
  Seq last_seq() const noexcept { return segments_.empty() ? 0 : segments_.back().seq; }
  const TranscriptSegment* find_segment(Seq seq) const noexcept;
  SeqExists seq_exists() const;

  // created -> live; `at` is wall-clock epoch ms.
  void start(Millis at);
  // Appends a final segment and assigns it seq = last_seq() + 1.
  const TranscriptSegment& append_final(TranscriptSegment segment);
  // Trimmed text; anchor is the current last_seq() (absent before any final).
  const Note& add_note(std::string note_id, std::string_view text, Millis wall_time);
  void apply_graph_delta(const GraphDelta& delta);
  const QuestionSuggestion& append_suggestion(QuestionSuggestion suggestion);
  // live -> ended
  void end();
  // ended -> summarized
  void attach_summary(SummaryReport report);

  bool operator==(const Session&) const = default;

 private:
  void require_live(std::string_view what) const;

  std::string id_;
  JobProfile profile_;
  SessionState state_ = SessionState::created;
  Millis started_at_ = 0;
  std::vector<TranscriptSegment> segments_;
  std::vector<Note> notes_;
  KnowledgeGraph graph_;
  std::vector<QuestionSuggestion> suggestions_;
  std::optional<SummaryReport> summary_;
};

// Canonical serialization: stable key order, graph in export form.
nlohmann::json to_canonical_json(const Session& session);
std::string canonical_string(const Session& session);

}  // namespace copilot
