#include "copilot/summary.hpp"

namespace copilot {

void to_json(nlohmann::json& j, const EvidenceCitation& c) {
  j = nlohmann::json{{"evidence_id", c.evidence_id}, {"supporting_seqs", c.supporting_seqs},
                     {"summary", c.summary}, {"relevance", to_string(c.relevance)}};
}

void from_json(const nlohmann::json& j, EvidenceCitation& c) {
  j.at("evidence_id").get_to(c.evidence_id);
  j.at("supporting_seqs").get_to(c.supporting_seqs);
  j.at("summary").get_to(c.summary);
  c.relevance = parse_relevance(j.at("relevance").get<std::string>());
}

void to_json(nlohmann::json& j, const SkillSection& s) {
  j = nlohmann::json{{"skill_id", s.skill_id}, {"skill_name", s.skill_name},
                     {"status", to_string(s.status)}, {"narrative", s.narrative},
                     {"narrative_fallback", s.narrative_fallback},
                     {"evidence_citations", s.evidence_citations}};
}

void from_json(const nlohmann::json& j, SkillSection& s) {
  j.at("skill_id").get_to(s.skill_id);
  j.at("skill_name").get_to(s.skill_name);
  s.status = parse_coverage_status(j.at("status").get<std::string>());
  j.at("narrative").get_to(s.narrative);
  j.at("narrative_fallback").get_to(s.narrative_fallback);
  j.at("evidence_citations").get_to(s.evidence_citations);
}

void to_json(nlohmann::json& j, const NoteDigestEntry& n) {
  j = nlohmann::json{{"note_id", n.note_id}, {"text", n.text}, {"anchor_seq", nullptr}};
  if (n.anchor_seq) j["anchor_seq"] = *n.anchor_seq;
}

void from_json(const nlohmann::json& j, NoteDigestEntry& n) {
  j.at("note_id").get_to(n.note_id);
  j.at("text").get_to(n.text);
  n.anchor_seq.reset();
  if (auto it = j.find("anchor_seq"); it != j.end() && !it->is_null()) n.anchor_seq = it->get<Seq>();
}

void to_json(nlohmann::json& j, const SummaryStats& s) {
  j = nlohmann::json{{"segment_count", s.segment_count}, {"evidence_count", s.evidence_count},
                     {"covered_count", s.covered_count}};
}

void from_json(const nlohmann::json& j, SummaryStats& s) {
  j.at("segment_count").get_to(s.segment_count);
  j.at("evidence_count").get_to(s.evidence_count);
  j.at("covered_count").get_to(s.covered_count);
}

void to_json(nlohmann::json& j, const SummaryReport& r) {
  j = nlohmann::json{{"session_id", r.session_id}, {"job_title", r.job_title},
                     {"generated_at", r.generated_at}, {"skill_sections", r.skill_sections},
                     {"notes_digest", r.notes_digest}, {"overall", r.overall},
                     {"overall_fallback", r.overall_fallback}, {"stats", r.stats}};
}

void from_json(const nlohmann::json& j, SummaryReport& r) {
  j.at("session_id").get_to(r.session_id);
  j.at("job_title").get_to(r.job_title);
  j.at("generated_at").get_to(r.generated_at);
  j.at("skill_sections").get_to(r.skill_sections);
  j.at("notes_digest").get_to(r.notes_digest);
  j.at("overall").get_to(r.overall);
  j.at("overall_fallback").get_to(r.overall_fallback);
  j.at("stats").get_to(r.stats);
}

}  // namespace copilot
