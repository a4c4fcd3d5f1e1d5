#include "copilot/graph.hpp"

#include <algorithm>

#include "copilot/error.hpp"
#include "copilot/text.hpp"

namespace copilot {

std::string_view to_string(Relevance r) noexcept { return r == Relevance::high ? "high" : "medium"; }

Relevance parse_relevance(std::string_view s) {
  if (s == "high") return Relevance::high;
  if (s == "medium") return Relevance::medium;
  throw Error(ErrorCode::invalid_request, "relevance must be high or medium, got '" + std::string(s) + "'");
}

std::string_view to_string(CoverageStatus s) noexcept {
  switch (s) {
    case CoverageStatus::not_covered: return "not_covered";
    case CoverageStatus::partially_covered: return "partially_covered";
    case CoverageStatus::covered: return "covered";
  }
  return "not_covered";
}

CoverageStatus parse_coverage_status(std::string_view s) {
  if (s == "not_covered") return CoverageStatus::not_covered;
  if (s == "partially_covered") return CoverageStatus::partially_covered;
  if (s == "covered") return CoverageStatus::covered;
  throw Error(ErrorCode::invalid_request, "unknown coverage status '" + std::string(s) + "'");
}

namespace {

std::vector<Seq> normalized_seqs(std::vector<Seq> seqs) {
  std::sort(seqs.begin(), seqs.end());
  seqs.erase(std::unique(seqs.begin(), seqs.end()), seqs.end());
  return seqs;
}

}  // namespace

std::string dedup_key(std::string_view skill_id, std::span<const Seq> supporting_seqs,
                      std::string_view summary) {
  std::vector<Seq> seqs(supporting_seqs.begin(), supporting_seqs.end());
  seqs = normalized_seqs(std::move(seqs));
  std::string key(skill_id);
  key.push_back('\x1f');
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (i > 0) key.push_back(',');
    key += std::to_string(seqs[i]);
  }
  key.push_back('\x1f');
  key += text::normalize(summary);
  return key;
}

std::string dedup_key(const EvidenceNode& node) {
  return dedup_key(node.skill_id, node.supporting_seqs, node.summary);
}

std::string evidence_id_for(std::string_view key) { return "ev-" + text::hex64(text::fnv1a64(key)); }

KnowledgeGraph KnowledgeGraph::seeded(const JobProfile& profile) {
  KnowledgeGraph g;
  for (const auto& s : profile.skills) g.skills_.push_back(s.skill_id);
  return g;
}

bool KnowledgeGraph::has_skill(std::string_view skill_id) const noexcept {
  return std::find(skills_.begin(), skills_.end(), skill_id) != skills_.end();
}

const EvidenceNode* KnowledgeGraph::find_by_key(const std::string& key) const {
  auto it = key_to_id_.find(key);
  if (it == key_to_id_.end()) return nullptr;
  return &evidence_.at(it->second);
}

std::vector<const EvidenceNode*> KnowledgeGraph::evidence_for(std::string_view skill_id) const {
  std::vector<const EvidenceNode*> out;
  for (const auto& [id, node] : evidence_) {
    if (node.skill_id == skill_id) out.push_back(&node);
  }
  std::sort(out.begin(), out.end(), [](const EvidenceNode* a, const EvidenceNode* b) {
    return std::tie(a->basis_seq, a->evidence_id) < std::tie(b->basis_seq, b->evidence_id);
  });
  return out;
}

void KnowledgeGraph::apply(const GraphDelta& delta, const SeqExists& exists) {
  for (const auto& node : delta.evidence) {
    if (!has_skill(node.skill_id)) {
      throw Error(ErrorCode::dangling_reference, "evidence cites unknown skill '" + node.skill_id + "'");
    }
    if (node.supporting_seqs.empty()) {
      throw Error(ErrorCode::dangling_reference, "evidence without supporting segments");
    }
    if (text::trim(node.summary).empty()) {
      throw Error(ErrorCode::invalid_request, "evidence with empty summary");
    }
    for (Seq s : node.supporting_seqs) {
      if (!exists(s)) {
        throw Error(ErrorCode::dangling_reference, "evidence cites unknown segment seq " + std::to_string(s));
      }
      if (s > node.basis_seq) {
        throw Error(ErrorCode::invalid_request, "supporting seq " + std::to_string(s) + " exceeds basis_seq");
      }
    }
  }

  for (const auto& incoming : delta.evidence) {
    EvidenceNode node = incoming;
    node.supporting_seqs = normalized_seqs(node.supporting_seqs);
    const auto key = dedup_key(node);
    if (auto it = key_to_id_.find(key); it != key_to_id_.end()) {
      auto& existing = evidence_.at(it->second);
      existing.relevance = std::max(existing.relevance, node.relevance);
      continue;
    }
    auto id = evidence_id_for(key);
    for (int n = 1; evidence_.contains(id); ++n) id = evidence_id_for(key) + "-" + std::to_string(n);
    node.evidence_id = id;
    for (Seq s : node.supporting_seqs) {
      transcripts_.insert(s);
      transcript_edges_.emplace(id, s);
    }
    skill_edges_.emplace(node.skill_id, id);
    max_basis_ = std::max(max_basis_, node.basis_seq);
    key_to_id_.emplace(key, id);
    evidence_.emplace(id, std::move(node));
  }
}

KnowledgeGraph apply_delta(KnowledgeGraph graph, const GraphDelta& delta, const SeqExists& exists) {
  graph.apply(delta, exists);
  return graph;
}

std::vector<SkillCoverage> coverage(const KnowledgeGraph& graph, const JobProfile& profile) {
  std::vector<SkillCoverage> out;
  out.reserve(profile.skills.size());
  for (const auto& skill : profile.skills) {
    SkillCoverage c{skill.skill_id, CoverageStatus::not_covered, 0};
    bool any_high = false;
    for (const auto* node : graph.evidence_for(skill.skill_id)) {
      ++c.evidence_count;
      any_high = any_high || node->relevance == Relevance::high;
    }
    if (any_high) {
      c.status = CoverageStatus::covered;
    } else if (c.evidence_count > 0) {
      c.status = CoverageStatus::partially_covered;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> check_invariants(const KnowledgeGraph& graph, const SeqExists& exists) {
  std::vector<std::string> violations;
  const auto& nodes = graph.evidence_nodes();
  std::set<Seq> referenced;
  std::map<std::string, int> skill_edge_count;

  for (const auto& [skill, ev] : graph.skill_evidence_edges()) {
    if (!graph.has_skill(skill)) violations.push_back("skill edge from unknown skill " + skill);
    if (!nodes.contains(ev)) violations.push_back("skill edge to unknown evidence " + ev);
    ++skill_edge_count[ev];
  }
  for (const auto& [ev, seq] : graph.evidence_transcript_edges()) {
    if (!nodes.contains(ev)) violations.push_back("transcript edge from unknown evidence " + ev);
    if (!graph.transcript_nodes().contains(seq)) {
      violations.push_back("transcript edge to missing node " + std::to_string(seq));
    }
  }
  for (const auto& [id, node] : nodes) {
    if (id != node.evidence_id) violations.push_back("evidence keyed under wrong id " + id);
    const int skill_edges = skill_edge_count.contains(id) ? skill_edge_count.at(id) : 0;
    if (skill_edges != 1) {
      violations.push_back("evidence " + id + " has " + std::to_string(skill_edges) + " skill edges");
    }
    if (!graph.skill_evidence_edges().contains({node.skill_id, id})) {
      violations.push_back("evidence " + id + " not linked to its own skill");
    }
    int transcript_edges = 0;
    for (Seq s : node.supporting_seqs) {
      if (graph.evidence_transcript_edges().contains({id, s})) ++transcript_edges;
      referenced.insert(s);
      if (s > node.basis_seq) violations.push_back("evidence " + id + " cites seq beyond its basis");
    }
    if (transcript_edges < 1 || static_cast<std::size_t>(transcript_edges) != node.supporting_seqs.size()) {
      violations.push_back("evidence " + id + " transcript edges do not match supporting seqs");
    }
    if (node.relevance != Relevance::high && node.relevance != Relevance::medium) {
      violations.push_back("evidence " + id + " has relevance outside {high, medium}");
    }
    if (text::trim(node.summary).empty()) violations.push_back("evidence " + id + " has empty summary");
  }
  for (Seq s : graph.transcript_nodes()) {
    if (!referenced.contains(s)) violations.push_back("orphan transcript node " + std::to_string(s));
    if (exists && !exists(s)) violations.push_back("transcript node for unpersisted seq " + std::to_string(s));
  }
  return violations;
}

GraphDelta merge_deltas(std::span<const GraphDelta> deltas) {
  GraphDelta out;
  std::map<std::string, std::size_t> by_key;
  std::set<Seq> grey;
  for (const auto& d : deltas) {
    out.basis_seq = std::max(out.basis_seq, d.basis_seq);
    for (const auto& node : d.evidence) {
      const auto key = dedup_key(node);
      if (auto it = by_key.find(key); it != by_key.end()) {
        auto& kept = out.evidence[it->second];
        kept.relevance = std::max(kept.relevance, node.relevance);
        continue;
      }
      by_key.emplace(key, out.evidence.size());
      out.evidence.push_back(node);
    }
    grey.insert(d.transcript_nodes.begin(), d.transcript_nodes.end());
  }
  out.transcript_nodes.assign(grey.begin(), grey.end());
  return out;
}

nlohmann::json export_graph(const KnowledgeGraph& graph, const JobProfile& profile) {
  nlohmann::json skills = nlohmann::json::array();
  for (const auto& s : profile.skills) skills.push_back({{"skill_id", s.skill_id}, {"name", s.name}});

  std::vector<std::pair<std::string, const EvidenceNode*>> ordered;
  for (const auto& [id, node] : graph.evidence_nodes()) ordered.emplace_back(dedup_key(node), &node);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second->skill_id, a.first) < std::tie(b.second->skill_id, b.first);
  });
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& [key, node] : ordered) evidence.push_back(*node);

  return {{"skills", std::move(skills)},
          {"evidence", std::move(evidence)},
          {"transcript_nodes", graph.transcript_nodes()}};
}

void to_json(nlohmann::json& j, const EvidenceNode& e) {
  j = nlohmann::json{{"evidence_id", e.evidence_id}, {"skill_id", e.skill_id},
                     {"summary", e.summary}, {"relevance", to_string(e.relevance)},
                     {"supporting_seqs", e.supporting_seqs}, {"basis_seq", e.basis_seq}};
}

void from_json(const nlohmann::json& j, EvidenceNode& e) {
  j.at("evidence_id").get_to(e.evidence_id);
  j.at("skill_id").get_to(e.skill_id);
  j.at("summary").get_to(e.summary);
  e.relevance = parse_relevance(j.at("relevance").get<std::string>());
  j.at("supporting_seqs").get_to(e.supporting_seqs);
  j.at("basis_seq").get_to(e.basis_seq);
}

void to_json(nlohmann::json& j, const SkillCoverage& c) {
  j = nlohmann::json{{"skill_id", c.skill_id}, {"status", to_string(c.status)},
                     {"evidence_count", c.evidence_count}};
}

void from_json(const nlohmann::json& j, SkillCoverage& c) {
  j.at("skill_id").get_to(c.skill_id);
  c.status = parse_coverage_status(j.at("status").get<std::string>());
  j.at("evidence_count").get_to(c.evidence_count);
}

void to_json(nlohmann::json& j, const CoverageChange& c) {
  j = nlohmann::json{{"skill_id", c.skill_id}, {"from", to_string(c.from)}, {"to", to_string(c.to)}};
}

void from_json(const nlohmann::json& j, CoverageChange& c) {
  j.at("skill_id").get_to(c.skill_id);
  c.from = parse_coverage_status(j.at("from").get<std::string>());
  c.to = parse_coverage_status(j.at("to").get<std::string>());
}

void to_json(nlohmann::json& j, const GraphDelta& d) {
  j = nlohmann::json{{"basis_seq", d.basis_seq}, {"evidence", d.evidence},
                     {"transcript_nodes", d.transcript_nodes},
                     {"coverage_changes", d.coverage_changes}};
}

void from_json(const nlohmann::json& j, GraphDelta& d) {
  j.at("basis_seq").get_to(d.basis_seq);
  j.at("evidence").get_to(d.evidence);
  d.transcript_nodes = j.value("transcript_nodes", std::vector<Seq>{});
  d.coverage_changes = j.value("coverage_changes", std::vector<CoverageChange>{});
}

}  // namespace copilot
