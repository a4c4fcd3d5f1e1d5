#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/profile.hpp"
#include "copilot/transcript.hpp"

namespace copilot {

// Ordered so that std::max picks the stronger relevance.
enum class Relevance { medium, high };
std::string_view to_string(Relevance r) noexcept;
Relevance parse_relevance(std::string_view s);

enum class CoverageStatus { not_covered, partially_covered, covered };
std::string_view to_string(CoverageStatus s) noexcept;
CoverageStatus parse_coverage_status(std::string_view s);

struct EvidenceNode {
  std::string evidence_id;
  std::string skill_id;
  std::string summary;
  Relevance relevance = Relevance::medium;
  // Sorted, unique, non-empty.
  std::vector<Seq> supporting_seqs;
  Seq basis_seq = 0;

  bool operator==(const EvidenceNode&) const = default;
};

// (skill_id, sorted supporting seqs, case-folded whitespace-normalized summary)
std::string dedup_key(std::string_view skill_id, std::span<const Seq> supporting_seqs,
                      std::string_view summary);
std::string dedup_key(const EvidenceNode& node);
// Evidence ids are derived from the dedup key so that re-deriving the same
// evidence yields the same id on every run and every replay.
std::string evidence_id_for(std::string_view key);

struct SkillCoverage {
  std::string skill_id;
  CoverageStatus status = CoverageStatus::not_covered;
  int evidence_count = 0;

  bool operator==(const SkillCoverage&) const = default;
};

struct CoverageChange {
  std::string skill_id;
  CoverageStatus from = CoverageStatus::not_covered;
  CoverageStatus to = CoverageStatus::not_covered;

  bool operator==(const CoverageChange&) const = default;
};

struct GraphDelta {
  Seq basis_seq = 0;
  std::vector<EvidenceNode> evidence;
  // Grey nodes this delta introduces (informational; apply_delta derives them).
  std::vector<Seq> transcript_nodes;
  std::vector<CoverageChange> coverage_changes;

  bool empty() const noexcept { return evidence.empty(); }
  bool operator==(const GraphDelta&) const = default;
};

using SeqExists = std::function<bool(Seq)>;

class KnowledgeGraph {
 public:
  using SkillEvidenceEdge = std::pair<std::string, std::string>;
  using EvidenceTranscriptEdge = std::pair<std::string, Seq>;

  KnowledgeGraph() = default;
  // One blue node per profile skill, nothing else.
  static KnowledgeGraph seeded(const JobProfile& profile);

  const std::vector<std::string>& skill_nodes() const noexcept { return skills_; }
  const std::map<std::string, EvidenceNode>& evidence_nodes() const noexcept { return evidence_; }
  const std::set<Seq>& transcript_nodes() const noexcept { return transcripts_; }
  const std::set<SkillEvidenceEdge>& skill_evidence_edges() const noexcept { return skill_edges_; }
  const std::set<EvidenceTranscriptEdge>& evidence_transcript_edges() const noexcept {
    return transcript_edges_;
  }

  bool has_skill(std::string_view skill_id) const noexcept;
  const EvidenceNode* find_by_key(const std::string& key) const;
  std::vector<const EvidenceNode*> evidence_for(std::string_view skill_id) const;
  Seq max_basis_seq() const noexcept { return max_basis_; }

  // Adds or merges every evidence node of `delta`. Nodes whose dedup key is
  // already present merge by keeping the higher relevance. Idempotent.
  // Throws dangling_reference when a supporting seq fails `exists` or a node
  // names a skill outside the graph; the graph is untouched on error.
  void apply(const GraphDelta& delta, const SeqExists& exists);

  bool operator==(const KnowledgeGraph&) const = default;

 private:
  std::vector<std::string> skills_;
  std::map<std::string, EvidenceNode> evidence_;
  std::map<std::string, std::string> key_to_id_;
  std::set<Seq> transcripts_;
  std::set<SkillEvidenceEdge> skill_edges_;
  std::set<EvidenceTranscriptEdge> transcript_edges_;
  Seq max_basis_ = 0;
};

KnowledgeGraph apply_delta(KnowledgeGraph graph, const GraphDelta& delta, const SeqExists& exists);

// One entry per profile skill, in profile order.
std::vector<SkillCoverage> coverage(const KnowledgeGraph& graph, const JobProfile& profile);

// Human-readable descriptions of every violated structural invariant; empty
// when the graph is well formed. `exists` checks transcript references.
std::vector<std::string> check_invariants(const KnowledgeGraph& graph, const SeqExists& exists);

// Folds several deltas into one, merging dedup-key collisions.
GraphDelta merge_deltas(std::span<const GraphDelta> deltas);

// {skills:[{skill_id,name}], evidence:[...], transcript_nodes:[seq...]} with
// evidence ordered by (skill_id, dedup key).
nlohmann::json export_graph(const KnowledgeGraph& graph, const JobProfile& profile);

void to_json(nlohmann::json& j, const EvidenceNode& e);
void from_json(const nlohmann::json& j, EvidenceNode& e);
void to_json(nlohmann::json& j, const SkillCoverage& c);
void from_json(const nlohmann::json& j, SkillCoverage& c);
void to_json(nlohmann::json& j, const CoverageChange& c);
void from_json(const nlohmann::json& j, CoverageChange& c);
void to_json(nlohmann::json& j, const GraphDelta& d);
void from_json(const nlohmann::json& j, GraphDelta& d);

}  // namespace copilot
