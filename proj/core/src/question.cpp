#include "copilot/question.hpp"

#include <algorithm>

#include "copilot/error.hpp"
#include "copilot/text.hpp"

namespace copilot {

std::string_view to_string(QuestionMode m) noexcept {
  switch (m) {
    case QuestionMode::deep: return "deep";
    case QuestionMode::contextual: return "contextual";
    case QuestionMode::targeted: return "targeted";
  }
  return "contextual";
}

QuestionMode parse_question_mode(std::string_view s) {
  if (s == "deep") return QuestionMode::deep;
  if (s == "contextual") return QuestionMode::contextual;
  if (s == "targeted") return QuestionMode::targeted;
  throw Error(ErrorCode::invalid_request, "unknown question mode '" + std::string(s) + "'");
}

std::string_view to_string(StarTag t) noexcept {
  switch (t) {
    case StarTag::Situation: return "Situation";
    case StarTag::Task: return "Task";
    case StarTag::Action: return "Action";
    case StarTag::Result: return "Result";
  }
  return "Situation";
}

StarTag parse_star_tag(std::string_view s) {
  if (s == "Situation") return StarTag::Situation;
  if (s == "Task") return StarTag::Task;
  if (s == "Action") return StarTag::Action;
  if (s == "Result") return StarTag::Result;
  throw Error(ErrorCode::invalid_request, "unknown STAR tag '" + std::string(s) + "'");
}

void validate(const QuestionRequest& request) {
  const bool has_segment = request.target_segment_seq.has_value();
  const bool has_skill = request.target_skill_id.has_value();
  switch (request.mode) {
    case QuestionMode::deep:
      if (!has_segment || has_skill) {
        throw Error(ErrorCode::invalid_request, "deep requests need target_segment_seq and nothing else");
      }
      break;
    case QuestionMode::targeted:
      if (!has_skill || has_segment) {
        throw Error(ErrorCode::invalid_request, "targeted requests need target_skill_id and nothing else");
      }
      break;
    case QuestionMode::contextual:
      if (has_skill || has_segment) {
        throw Error(ErrorCode::invalid_request, "contextual requests take no target");
      }
      break;
  }
}

bool QuestionSuggestion::answers(const QuestionRequest& request) const noexcept {
  return mode == request.mode && issued_at_seq == request.issued_at_seq &&
         target_skill_id == request.target_skill_id && target_segment_seq == request.target_segment_seq;
}

std::optional<std::string> check_invariants(const QuestionSuggestion& s) {
  if (text::trim(s.text).empty()) return "empty question text";
  if ((s.mode == QuestionMode::deep) == s.star_tags.empty()) {
    return "star_tags must be non-empty exactly for deep mode";
  }
  if (!std::is_sorted(s.star_tags.begin(), s.star_tags.end()) ||
      std::adjacent_find(s.star_tags.begin(), s.star_tags.end()) != s.star_tags.end()) {
    return "star_tags must be a set in S-T-A-R order";
  }
  if ((s.mode == QuestionMode::targeted) != s.target_skill_id.has_value()) {
    return "target_skill_id must be present exactly for targeted mode";
  }
  if ((s.mode == QuestionMode::deep) != s.target_segment_seq.has_value()) {
    return "target_segment_seq must be present exactly for deep mode";
  }
  for (Seq p : s.provenance_seqs) {
    if (p > s.issued_at_seq) return "provenance seq " + std::to_string(p) + " after issued_at_seq";
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const QuestionRequest& r) {
  j = nlohmann::json{{"mode", to_string(r.mode)}, {"issued_at_seq", r.issued_at_seq}};
  if (r.target_segment_seq) j["target_segment_seq"] = *r.target_segment_seq;
  if (r.target_skill_id) j["target_skill_id"] = *r.target_skill_id;
}

void from_json(const nlohmann::json& j, QuestionRequest& r) {
  r.mode = parse_question_mode(j.at("mode").get<std::string>());
  r.target_segment_seq.reset();
  r.target_skill_id.reset();
  if (auto it = j.find("target_segment_seq"); it != j.end() && !it->is_null()) r.target_segment_seq = it->get<Seq>();
  if (auto it = j.find("target_skill_id"); it != j.end() && !it->is_null()) {
    r.target_skill_id = it->get<std::string>();
  }
  r.issued_at_seq = j.value("issued_at_seq", Seq{0});
}

void to_json(nlohmann::json& j, const QuestionSuggestion& s) {
  nlohmann::json tags = nlohmann::json::array();
  for (auto t : s.star_tags) tags.push_back(to_string(t));
  j = nlohmann::json{{"suggestion_id", s.suggestion_id}, {"mode", to_string(s.mode)},
                     {"text", s.text}, {"rationale", s.rationale},
                     {"star_tags", std::move(tags)}, {"provenance_seqs", s.provenance_seqs},
                     {"issued_at_seq", s.issued_at_seq}};
  if (s.target_skill_id) j["target_skill_id"] = *s.target_skill_id;
  if (s.target_segment_seq) j["target_segment_seq"] = *s.target_segment_seq;
}

void from_json(const nlohmann::json& j, QuestionSuggestion& s) {
  j.at("suggestion_id").get_to(s.suggestion_id);
  s.mode = parse_question_mode(j.at("mode").get<std::string>());
  j.at("text").get_to(s.text);
  j.at("rationale").get_to(s.rationale);
  s.star_tags.clear();
  for (const auto& t : j.at("star_tags")) s.star_tags.push_back(parse_star_tag(t.get<std::string>()));
  s.target_skill_id.reset();
  s.target_segment_seq.reset();
  if (auto it = j.find("target_skill_id"); it != j.end()) s.target_skill_id = it->get<std::string>();
  if (auto it = j.find("target_segment_seq"); it != j.end()) s.target_segment_seq = it->get<Seq>();
  j.at("provenance_seqs").get_to(s.provenance_seqs);
  j.at("issued_at_seq").get_to(s.issued_at_seq);
}

}  // namespace copilot
