#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/clock.hpp"
#include "copilot/graph.hpp"

namespace copilot {

struct EvidenceCitation {
  std::string evidence_id;
  std::vector<Seq> supporting_seqs;
  // Copied from the evidence node for rendering.
  std::string summary;
  Relevance relevance = Relevance::medium;

  bool operator==(const EvidenceCitation&) const = default;
};

struct SkillSection {
  std::string skill_id;
  std::string skill_name;
  CoverageStatus status = CoverageStatus::not_covered;
  std::string narrative;
  // The narrative came from the deterministic fallback, not the provider.
  bool narrative_fallback = false;
  std::vector<EvidenceCitation> evidence_citations;

  bool operator==(const SkillSection&) const = default;
};

struct NoteDigestEntry {
  std::string note_id;
  std::string text;
  std::optional<Seq> anchor_seq;

  bool operator==(const NoteDigestEntry&) const = default;
};

struct SummaryStats {
  int segment_count = 0;
  int evidence_count = 0;
  int covered_count = 0;

  bool operator==(const SummaryStats&) const = default;
};

struct SummaryReport {
  std::string session_id;
  std::string job_title;
  Millis generated_at = 0;
  std::vector<SkillSection> skill_sections;
  std::vector<NoteDigestEntry> notes_digest;
  std::string overall;
  bool overall_fallback = false;
  SummaryStats stats;

  bool operator==(const SummaryReport&) const = default;
};

void to_json(nlohmann::json& j, const EvidenceCitation& c);
void from_json(const nlohmann::json& j, EvidenceCitation& c);
void to_json(nlohmann::json& j, const SkillSection& s);
void from_json(const nlohmann::json& j, SkillSection& s);
void to_json(nlohmann::json& j, const NoteDigestEntry& n);
void from_json(const nlohmann::json& j, NoteDigestEntry& n);
void to_json(nlohmann::json& j, const SummaryStats& s);
void from_json(const nlohmann::json& j, SummaryStats& s);
void to_json(nlohmann::json& j, const SummaryReport& r);
void from_json(const nlohmann::json& j, SummaryReport& r);

}  // namespace copilot
