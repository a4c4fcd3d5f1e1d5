#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "copilot/clock.hpp"
#include "copilot/session.hpp"

namespace copilot {

enum class EventKind {
  segment_final,
  graph_delta,
  skills_progress,
  question_ready,
  note_added,
  session_started,
  session_ended,
  summary_ready,
  degraded,
};

std::string_view to_string(EventKind k) noexcept;
EventKind parse_event_kind(std::string_view s);

// The unit of the session log and of the push protocol.
struct EventEnvelope {
  std::int64_t event_seq = 0;
  std::string session_id;
  EventKind kind = EventKind::degraded;
  Millis at = 0;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const EventEnvelope&) const = default;
};

void to_json(nlohmann::json& j, const EventEnvelope& e);
void from_json(const nlohmann::json& j, EventEnvelope& e);

// Throws invalid_request when the envelope or its kind-specific payload is
// malformed.
void validate(const EventEnvelope& envelope);

// Payload builders.
namespace payload {
nlohmann::json session_started(const JobProfile& profile);
nlohmann::json segment_final(const TranscriptSegment& segment, bool out_of_order);
nlohmann::json graph_delta(const GraphDelta& delta);
nlohmann::json skills_progress(const std::vector<SkillCoverage>& coverage);
nlohmann::json question_ready(const QuestionSuggestion& suggestion, bool cached);
nlohmann::json note_added(const Note& note);
nlohmann::json session_ended();
nlohmann::json summary_ready(const SummaryReport& report);
// stage: skill_eval | question_gen | summarize; `seq` is the affected segment, 0 if none.
nlohmann::json degraded(std::string_view stage, std::string_view failure_class, std::string_view message, Seq seq);
}  // namespace payload

// Folds one event into session state. session_started must be applied to an
// empty optional; every other kind requires an existing session. Events that
// carry no state change (skills_progress, degraded) are still validated.
void apply_event(std::optional<Session>& session, const EventEnvelope& envelope);

}  // namespace copilot
