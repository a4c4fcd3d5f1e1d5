#include "copilot/session.hpp"

#include "copilot/error.hpp"
#include "copilot/text.hpp"

namespace copilot {

std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::created: return "created";
    case SessionState::live: return "live";
    case SessionState::ended: return "ended";
    case SessionState::summarized: return "summarized";
  }
  return "created";
}

SessionState parse_session_state(std::string_view s) {
  if (s == "created") return SessionState::created;
  if (s == "live") return SessionState::live;
  if (s == "ended") return SessionState::ended;
  if (s == "summarized") return SessionState::summarized;
  throw Error(ErrorCode::invalid_request, "unknown session state '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const Note& n) {
  j = nlohmann::json{{"note_id", n.note_id}, {"text", n.text}, {"wall_time", n.wall_time},
                     {"anchor_seq", nullptr}};
  if (n.anchor_seq) j["anchor_seq"] = *n.anchor_seq;
}

void from_json(const nlohmann::json& j, Note& n) {
  j.at("note_id").get_to(n.note_id);
  j.at("text").get_to(n.text);
  j.at("wall_time").get_to(n.wall_time);
  n.anchor_seq.reset();
  if (auto it = j.find("anchor_seq"); it != j.end() && !it->is_null()) n.anchor_seq = it->get<Seq>();
}

Session Session::create(std::string session_id, JobProfile profile) {
  validate(profile);
  if (session_id.empty()) throw Error(ErrorCode::invalid_request, "empty session id");
  Session s;
  s.id_ = std::move(session_id);
  s.graph_ = KnowledgeGraph::seeded(profile);
  s.profile_ = std::move(profile);
  return s;
}

const TranscriptSegment* Session::find_segment(Seq seq) const noexcept {
  // seqs are gap-free from 1, so the index is seq - 1.
  if (seq < 1 || seq > static_cast<Seq>(segments_.size())) return nullptr;
  return &segments_[static_cast<std::size_t>(seq - 1)];
}

SeqExists Session::seq_exists() const {
  return [this](Seq s) { return find_segment(s) != nullptr; };
}

void Session::require_live(std::string_view what) const {
  if (state_ != SessionState::live) {
    throw Error(ErrorCode::session_not_live,
                std::string(what) + " requires a live session (state is " + std::string(to_string(state_)) + ")");
  }
}

void Session::start(Millis at) {
  if (state_ != SessionState::created) {
    throw Error(ErrorCode::wrong_state, "cannot start a session in state " + std::string(to_string(state_)));
  }
  started_at_ = at;
  state_ = SessionState::live;
}

const TranscriptSegment& Session::append_final(TranscriptSegment segment) {
  require_live("ingest");
  if (!segment.is_final()) throw Error(ErrorCode::invalid_request, "only final segments are persisted");
  if (segment.t_start > segment.t_end) throw Error(ErrorCode::invalid_request, "t_start is after t_end");
  segment.seq = last_seq() + 1;
  segments_.push_back(std::move(segment));
  return segments_.back();
}

const Note& Session::add_note(std::string note_id, std::string_view text, Millis wall_time) {
  require_live("add_note");
  const auto trimmed = text::trim(text);
  if (trimmed.empty()) throw Error(ErrorCode::empty_text, "note text is empty");
  if (!notes_.empty() && wall_time < notes_.back().wall_time) {
    throw Error(ErrorCode::invalid_request, "note wall_time went backwards");
  }
  Note note{std::move(note_id), std::string(trimmed), wall_time, std::nullopt};
  if (!segments_.empty()) note.anchor_seq = last_seq();
  notes_.push_back(std::move(note));
  return notes_.back();
}

void Session::apply_graph_delta(const GraphDelta& delta) {
  require_live("graph update");
  for (const auto& node : delta.evidence) {
    for (Seq s : node.supporting_seqs) {
      const auto* seg = find_segment(s);
      if (seg && seg->speaker != Speaker::candidate) {
        throw Error(ErrorCode::invalid_request,
                    "evidence cites interviewer segment " + std::to_string(s));
      }
    }
  }
  graph_.apply(delta, seq_exists());
}

const QuestionSuggestion& Session::append_suggestion(QuestionSuggestion suggestion) {
  require_live("request_question");
  if (auto err = check_invariants(suggestion)) throw Error(ErrorCode::invalid_request, *err);
  suggestions_.push_back(std::move(suggestion));
  return suggestions_.back();
}

void Session::end() {
  if (state_ != SessionState::live) {
    throw Error(ErrorCode::wrong_state, "cannot end a session in state " + std::string(to_string(state_)));
  }
  state_ = SessionState::ended;
}

void Session::attach_summary(SummaryReport report) {
  if (state_ != SessionState::ended) {
    throw Error(ErrorCode::wrong_state, "cannot summarize a session in state " + std::string(to_string(state_)));
  }
  summary_ = std::move(report);
  state_ = SessionState::summarized;
}

nlohmann::json to_canonical_json(const Session& session) {
  nlohmann::json j{{"session_id", session.id()},
                   {"profile", session.profile()},
                   {"state", to_string(session.state())},
                   {"started_at", session.started_at()},
                   {"segments", session.segments()},
                   {"notes", session.notes()},
                   {"graph", export_graph(session.graph(), session.profile())},
                   {"suggestions", session.suggestions()},
                   {"summary", nullptr}};
  if (session.summary()) j["summary"] = *session.summary();
  return j;
}

std::string canonical_string(const Session& session) { return to_canonical_json(session).dump(); }

}  // namespace copilot
