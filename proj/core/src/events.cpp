#include "copilot/events.hpp"

#include "copilot/error.hpp"

namespace copilot {

using nlohmann::json;

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::segment_final: return "segment_final";
    case EventKind::graph_delta: return "graph_delta";
    case EventKind::skills_progress: return "skills_progress";
    case EventKind::question_ready: return "question_ready";
    case EventKind::note_added: return "note_added";
    case EventKind::session_started: return "session_started";
    case EventKind::session_ended: return "session_ended";
    case EventKind::summary_ready: return "summary_ready";
    case EventKind::degraded: return "degraded";
  }
  return "degraded";
}

EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::segment_final, EventKind::graph_delta, EventKind::skills_progress,
                 EventKind::question_ready, EventKind::note_added, EventKind::session_started,
                 EventKind::session_ended, EventKind::summary_ready, EventKind::degraded}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::invalid_request, "unknown event kind '" + std::string(s) + "'");
}

void to_json(json& j, const EventEnvelope& e) {
  j = json{{"event_seq", e.event_seq}, {"session_id", e.session_id}, {"kind", to_string(e.kind)},
           {"at", e.at}, {"payload", e.payload}};
}

void from_json(const json& j, EventEnvelope& e) {
  j.at("event_seq").get_to(e.event_seq);
  j.at("session_id").get_to(e.session_id);
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  j.at("at").get_to(e.at);
  e.payload = j.at("payload");
}

namespace payload {

json session_started(const JobProfile& profile) { return {{"profile", profile}}; }

json segment_final(const TranscriptSegment& segment, bool out_of_order) {
  return {{"segment", segment}, {"out_of_order", out_of_order}};
}

json graph_delta(const GraphDelta& delta) { return {{"delta", delta}}; }

json skills_progress(const std::vector<SkillCoverage>& coverage) { return {{"coverage", coverage}}; }

json question_ready(const QuestionSuggestion& suggestion, bool cached) {
  return {{"suggestion", suggestion}, {"cached", cached}};
}

json note_added(const Note& note) { return {{"note", note}}; }

json session_ended() { return json::object(); }

json summary_ready(const SummaryReport& report) { return {{"report", report}}; }

json degraded(std::string_view stage, std::string_view failure_class, std::string_view message, Seq seq) {
  return {{"stage", stage}, {"failure_class", failure_class}, {"message", message}, {"seq", seq}};
}

}  // namespace payload

namespace {

// Decodes the kind-specific payload; throws json exceptions or Error on mismatch.
void decode_payload(const EventEnvelope& e) {
  const auto& p = e.payload;
  if (!p.is_object()) throw Error(ErrorCode::invalid_request, "payload is not an object");
  switch (e.kind) {
    case EventKind::session_started: (void)p.at("profile").get<JobProfile>(); break;
    case EventKind::segment_final: {
      auto seg = p.at("segment").get<TranscriptSegment>();
      (void)p.at("out_of_order").get<bool>();
      if (!seg.is_final() || seg.seq < 1) throw Error(ErrorCode::invalid_request, "segment_final without final seq");
      break;
    }
    case EventKind::graph_delta: (void)p.at("delta").get<GraphDelta>(); break;
    case EventKind::skills_progress: (void)p.at("coverage").get<std::vector<SkillCoverage>>(); break;
    case EventKind::question_ready:
      (void)p.at("suggestion").get<QuestionSuggestion>();
      (void)p.at("cached").get<bool>();
      break;
    case EventKind::note_added: (void)p.at("note").get<Note>(); break;
    case EventKind::session_ended: break;
    case EventKind::summary_ready: (void)p.at("report").get<SummaryReport>(); break;
    case EventKind::degraded:
      (void)p.at("stage").get<std::string>();
      (void)p.at("failure_class").get<std::string>();
      (void)p.at("message").get<std::string>();
      (void)p.at("seq").get<Seq>();
      break;
  }
}

}  // namespace

void validate(const EventEnvelope& envelope) {
  if (envelope.event_seq < 1) throw Error(ErrorCode::invalid_request, "event_seq must be >= 1");
  if (envelope.session_id.empty()) throw Error(ErrorCode::invalid_request, "event without session_id");
  try {
    decode_payload(envelope);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::invalid_request,
                std::string(to_string(envelope.kind)) + " payload: " + ex.what());
  }
}

void apply_event(std::optional<Session>& session, const EventEnvelope& e) {
  validate(e);
  if (e.kind == EventKind::session_started) {
    if (session) throw Error(ErrorCode::invalid_request, "session_started for an existing session");
    auto s = Session::create(e.session_id, e.payload.at("profile").get<JobProfile>());
    s.start(e.at);
    session = std::move(s);
    return;
  }
  if (!session) throw Error(ErrorCode::invalid_request, "event before session_started");
  if (session->id() != e.session_id) {
    throw Error(ErrorCode::invalid_request, "event for session " + e.session_id + " in log of " + session->id());
  }
  auto& s = *session;
  const auto& p = e.payload;
  switch (e.kind) {
    case EventKind::segment_final: {
      auto seg = p.at("segment").get<TranscriptSegment>();
      if (seg.seq != s.last_seq() + 1) {
        throw Error(ErrorCode::invalid_request, "segment seq " + std::to_string(seg.seq) + " out of sequence");
      }
      s.append_final(std::move(seg));
      break;
    }
    case EventKind::graph_delta: s.apply_graph_delta(p.at("delta").get<GraphDelta>()); break;
    case EventKind::skills_progress:
      if (p.at("coverage").get<std::vector<SkillCoverage>>() != coverage(s.graph(), s.profile())) {
        throw Error(ErrorCode::invalid_request, "skills_progress disagrees with the graph");
      }
      break;
    case EventKind::question_ready: {
      auto suggestion = p.at("suggestion").get<QuestionSuggestion>();
      if (p.at("cached").get<bool>()) {
        bool found = false;
        for (const auto& existing : s.suggestions()) found = found || existing == suggestion;
        if (!found) throw Error(ErrorCode::invalid_request, "cached suggestion was never issued");
      } else {
        s.append_suggestion(std::move(suggestion));
      }
      break;
    }
    case EventKind::note_added: {
      const auto note = p.at("note").get<Note>();
      const auto anchor = s.segments().empty() ? std::nullopt : std::optional<Seq>(s.last_seq());
      if (note.anchor_seq != anchor) {
        throw Error(ErrorCode::invalid_request, "note " + note.note_id + " does not match its anchor");
      }
      s.add_note(note.note_id, note.text, note.wall_time);
      break;
    }
    case EventKind::session_ended: s.end(); break;
    case EventKind::summary_ready: s.attach_summary(p.at("report").get<SummaryReport>()); break;
    case EventKind::degraded: break;
    case EventKind::session_started: break;
  }
}

}  // namespace copilot
