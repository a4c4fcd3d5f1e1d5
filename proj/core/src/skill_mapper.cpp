#include "copilot/skill_mapper.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "copilot/log.hpp"
#include "copilot/text.hpp"

namespace copilot {

using nlohmann::json;

std::vector<TranscriptSegment> context_window(std::span<const TranscriptSegment> finals, Seq before_seq,
                                              std::size_t n) {
  std::vector<TranscriptSegment> out;
  for (auto it = finals.rbegin(); it != finals.rend() && out.size() < n; ++it) {
    if (it->seq < before_seq) out.push_back(*it);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

json segment_brief(const TranscriptSegment& s) {
  return {{"seq", s.seq}, {"speaker", to_string(s.speaker)}, {"text", s.text}};
}

}  // namespace

json skill_eval_context(const JobProfile& profile, const TranscriptSegment& segment,
                        std::span<const TranscriptSegment> context) {
  json skills = json::array();
  for (const auto& s : profile.skills) {
    json entry{{"skill_id", s.skill_id}, {"name", s.name}, {"keywords", s.keywords}};
    if (s.description) entry["description"] = *s.description;
    skills.push_back(std::move(entry));
  }
  json ctx = json::array();
  for (const auto& c : context) ctx.push_back(segment_brief(c));
  return {{"skills", std::move(skills)}, {"segment", segment_brief(segment)}, {"context", std::move(ctx)}};
}

Extraction extract_evidence(const JobProfile& profile, const TranscriptSegment& segment,
                            std::span<const TranscriptSegment> context, ModelProvider& provider,
                            const InvokePolicy& policy) {
  if (!segment.is_final() || segment.speaker != Speaker::candidate || segment.seq < 1) {
    throw Error(ErrorCode::invalid_request, "skill evaluation needs a persisted final candidate segment");
  }
  Extraction out;
  out.basis_seq = segment.seq;

  ProviderRequest request{Agent::skill_eval, skill_eval_context(profile, segment, context),
                          std::string(schema_for(Agent::skill_eval))};
  ProviderResponse response;
  try {
    response = invoke(provider, request, policy);
  } catch (const ProviderFailure& f) {
    out.failure = FailureInfo{f.failure_class(), f.what()};
    return out;
  }
  out.latency_ms = response.latency_ms;

  std::set<Seq> citable{segment.seq};
  for (const auto& c : context) {
    if (c.speaker == Speaker::candidate && c.is_final() && c.seq < segment.seq) citable.insert(c.seq);
  }

  for (const auto& m : response.parsed.at("mappings")) {
    const auto relevance = m.at("relevance").get<std::string>();
    if (relevance != "high" && relevance != "medium") continue;
    const auto skill_id = m.at("skill_id").get<std::string>();
    if (!profile.find_skill(skill_id)) {
      log(LogLevel::warn, "skill_eval mapped seq " + std::to_string(segment.seq) + " to unknown skill '" +
                              skill_id + "'; dropped");
      out.dropped.push_back(skill_id);
      continue;
    }
    std::vector<Seq> supporting;
    const auto& sup = m.at("supporting");
    if (sup.is_array()) {
      for (const auto& s : sup) {
        if (citable.contains(s.get<Seq>())) supporting.push_back(s.get<Seq>());
      }
    }
    if (supporting.empty()) supporting.push_back(segment.seq);
    std::sort(supporting.begin(), supporting.end());
    supporting.erase(std::unique(supporting.begin(), supporting.end()), supporting.end());

    EvidenceNode node;
    node.skill_id = skill_id;
    node.summary = std::string(text::trim(m.at("summary").get<std::string>()));
    node.relevance = parse_relevance(relevance);
    node.supporting_seqs = std::move(supporting);
    node.basis_seq = segment.seq;
    node.evidence_id = evidence_id_for(dedup_key(node));
    out.candidates.push_back(std::move(node));
  }
  return out;
}

GraphDelta finalize_delta(const KnowledgeGraph& graph, const JobProfile& profile, const Extraction& extraction) {
  GraphDelta delta;
  delta.basis_seq = extraction.basis_seq;

  std::map<std::string, std::size_t> in_batch;
  for (const auto& node : extraction.candidates) {
    const auto key = dedup_key(node);
    if (const auto* existing = graph.find_by_key(key); existing && existing->relevance >= node.relevance) {
      continue;
    }
    if (auto it = in_batch.find(key); it != in_batch.end()) {
      auto& kept = delta.evidence[it->second];
      kept.relevance = std::max(kept.relevance, node.relevance);
      continue;
    }
    in_batch.emplace(key, delta.evidence.size());
    delta.evidence.push_back(node);
  }
  if (delta.evidence.empty()) return delta;

  std::set<Seq> grey;
  for (const auto& node : delta.evidence) {
    for (Seq s : node.supporting_seqs) {
      if (!graph.transcript_nodes().contains(s)) grey.insert(s);
    }
  }
  delta.transcript_nodes.assign(grey.begin(), grey.end());

  const auto before = coverage(graph, profile);
  const auto after = coverage(apply_delta(graph, delta, [](Seq) { return true; }), profile);
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].status != after[i].status) {
      delta.coverage_changes.push_back({before[i].skill_id, before[i].status, after[i].status});
    }
  }
  return delta;
}

Evaluation evaluate_segment(const KnowledgeGraph& graph, const JobProfile& profile,
                            const TranscriptSegment& segment, std::span<const TranscriptSegment> context,
                            ModelProvider& provider, const InvokePolicy& policy) {
  auto extraction = extract_evidence(profile, segment, context, provider, policy);
  Evaluation out;
  out.failure = extraction.failure;
  out.dropped = extraction.dropped;
  if (!extraction.failure) out.delta = finalize_delta(graph, profile, extraction);
  out.delta.basis_seq = segment.seq;
  return out;
}

BatchEvaluation evaluate_transcript(const KnowledgeGraph& graph, const JobProfile& profile,
                                   std::span<const TranscriptSegment> finals, ModelProvider& provider,
                                   const InvokePolicy& policy, const MapperConfig& config) {
  BatchEvaluation out;
  Extraction combined;
  for (const auto& seg : finals) {
    combined.basis_seq = std::max(combined.basis_seq, seg.seq);
    if (seg.speaker != Speaker::candidate) continue;
    const auto ctx = context_window(finals, seg.seq, config.context_window);
    auto one = extract_evidence(profile, seg, ctx, provider, policy);
    if (one.failure) {
      out.failures.emplace_back(seg.seq, *one.failure);
      continue;
    }
    for (auto& c : one.candidates) combined.candidates.push_back(std::move(c));
  }
  out.delta = finalize_delta(graph, profile, combined);
  out.delta.basis_seq = combined.basis_seq;
  return out;
}

}  // namespace copilot
