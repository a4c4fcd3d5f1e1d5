#include "copilot/question_engine.hpp"

#include <algorithm>
#include <set>

#include "copilot/skill_mapper.hpp"

namespace copilot {

using nlohmann::json;

QuestionRequest prepare_request(const Session& session, QuestionRequest request) {
  if (session.state() != SessionState::live) {
    throw Error(ErrorCode::session_not_live, "questions can only be requested during a live session");
  }
  validate(request);
  if (request.target_skill_id && !session.profile().find_skill(*request.target_skill_id)) {
    throw Error(ErrorCode::unknown_skill, "skill '" + *request.target_skill_id + "' is not in the job profile");
  }
  if (request.target_segment_seq && !session.find_segment(*request.target_segment_seq)) {
    throw Error(ErrorCode::unknown_segment,
                "no finalized segment with seq " + std::to_string(*request.target_segment_seq));
  }
  request.issued_at_seq = session.last_seq();
  return request;
}

const QuestionSuggestion* find_cached(const Session& session, const QuestionRequest& prepared) {
  for (const auto& s : session.suggestions()) {
    if (s.answers(prepared)) return &s;
  }
  return nullptr;
}

namespace {

json brief(const TranscriptSegment& s) {
  return {{"seq", s.seq}, {"speaker", to_string(s.speaker)}, {"text", s.text}};
}

json briefs(const std::vector<TranscriptSegment>& segs) {
  json out = json::array();
  for (const auto& s : segs) out.push_back(brief(s));
  return out;
}

std::vector<TranscriptSegment> recent(const Session& session, Seq upto, std::size_t n) {
  return context_window(session.segments(), upto + 1, n);
}

}  // namespace

json question_context(const Session& session, const QuestionRequest& prepared, const QuestionConfig& config) {
  json ctx{{"mode", to_string(prepared.mode)}};
  switch (prepared.mode) {
    case QuestionMode::deep: {
      const auto* target = session.find_segment(*prepared.target_segment_seq);
      ctx["target_segment"] = brief(*target);
      ctx["context"] = briefs(context_window(session.segments(), target->seq, config.context_window));
      break;
    }
    case QuestionMode::contextual: {
      json cov = json::array();
      for (const auto& c : coverage(session.graph(), session.profile())) {
        cov.push_back({{"skill_id", c.skill_id}, {"name", session.profile().find_skill(c.skill_id)->name},
                       {"status", to_string(c.status)}, {"evidence_count", c.evidence_count}});
      }
      ctx["coverage"] = std::move(cov);
      ctx["context"] = briefs(recent(session, prepared.issued_at_seq, config.contextual_k));
      break;
    }
    case QuestionMode::targeted: {
      const auto* skill = session.profile().find_skill(*prepared.target_skill_id);
      ctx["target_skill"] = *skill;
      json evidence = json::array();
      for (const auto* e : session.graph().evidence_for(skill->skill_id)) evidence.push_back(*e);
      ctx["evidence"] = std::move(evidence);
      ctx["context"] = briefs(recent(session, prepared.issued_at_seq, config.context_window));
      break;
    }
  }
  return ctx;
}

QuestionSuggestion generate_question(const Session& session, const QuestionRequest& prepared,
                                     ModelProvider& provider, const InvokePolicy& policy,
                                     const QuestionConfig& config, std::string suggestion_id) {
  const bool deep = prepared.mode == QuestionMode::deep;
  ProviderRequest request{Agent::question_gen, question_context(session, prepared, config),
                          deep ? "question_deep.v1" : "question.v1"};
  const auto response = invoke(provider, request, policy);

  QuestionSuggestion s;
  s.suggestion_id = std::move(suggestion_id);
  s.mode = prepared.mode;
  s.text = response.parsed.at("text").get<std::string>();
  s.rationale = response.parsed.at("rationale").get<std::string>();
  if (deep) {
    std::set<StarTag> tags;
    for (const auto& t : response.parsed.at("star_tags")) tags.insert(parse_star_tag(t.get<std::string>()));
    s.star_tags.assign(tags.begin(), tags.end());
  }
  s.target_skill_id = prepared.target_skill_id;
  s.target_segment_seq = prepared.target_segment_seq;
  s.issued_at_seq = prepared.issued_at_seq;

  std::set<Seq> provenance;
  switch (prepared.mode) {
    case QuestionMode::deep:
      provenance.insert(*prepared.target_segment_seq);
      break;
    case QuestionMode::contextual:
      for (const auto& seg : recent(session, prepared.issued_at_seq, config.contextual_k)) provenance.insert(seg.seq);
      break;
    case QuestionMode::targeted:
      for (const auto* e : session.graph().evidence_for(*prepared.target_skill_id)) {
        provenance.insert(e->supporting_seqs.begin(), e->supporting_seqs.end());
      }
      for (const auto& seg : recent(session, prepared.issued_at_seq, config.context_window)) provenance.insert(seg.seq);
      break;
  }
  for (Seq p : provenance) {
    if (p <= s.issued_at_seq) s.provenance_seqs.push_back(p);
  }
  return s;
}

SuggestOutcome suggest(const Session& session, QuestionRequest request, ModelProvider& provider,
                       const InvokePolicy& policy, const QuestionConfig& config, std::string suggestion_id) {
  const auto prepared = prepare_request(session, std::move(request));
  if (const auto* hit = find_cached(session, prepared)) return {*hit, true};
  return {generate_question(session, prepared, provider, policy, config, std::move(suggestion_id)), false};
}

}  // namespace copilot
