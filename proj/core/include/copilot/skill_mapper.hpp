#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copilot/graph.hpp"
#include "copilot/profile.hpp"
#include "copilot/provider.hpp"
#include "copilot/transcript.hpp"

namespace copilot {

struct MapperConfig {
  // Finalized segments (both speakers) handed to the provider as context.
  std::size_t context_window = 6;
  // Candidate finals collected before evaluation is dispatched; 1 = every final.
  std::size_t batch_window = 1;
};

// The `n` finals immediately preceding `before_seq`, oldest first.
std::vector<TranscriptSegment> context_window(std::span<const TranscriptSegment> finals, Seq before_seq,
                                              std::size_t n);

// Provider half of an evaluation: schema-valid mappings converted into
// evidence candidates. Independent of graph state, so it may run off the
// session owner's thread.
struct Extraction {
  Seq basis_seq = 0;
  std::vector<EvidenceNode> candidates;
  // Mappings naming skills outside the profile; dropped and logged.
  std::vector<std::string> dropped;
  std::optional<FailureInfo> failure;
  Millis latency_ms = 0;
};

// Throws invalid_request unless `segment` is a final, persisted candidate segment.
Extraction extract_evidence(const JobProfile& profile, const TranscriptSegment& segment,
                            std::span<const TranscriptSegment> context, ModelProvider& provider,
                            const InvokePolicy& policy);

// Graph half: drops candidates already present at equal or higher relevance,
// collapses in-batch duplicates and computes the coverage changes the delta
// would cause. Evidence ids derive from dedup keys.
GraphDelta finalize_delta(const KnowledgeGraph& graph, const JobProfile& profile, const Extraction& extraction);

struct Evaluation {
  GraphDelta delta;
  std::optional<FailureInfo> failure;
  std::vector<std::string> dropped;
};

// extract_evidence followed by finalize_delta against `graph`.
Evaluation evaluate_segment(const KnowledgeGraph& graph, const JobProfile& profile,
                            const TranscriptSegment& segment, std::span<const TranscriptSegment> context,
                            ModelProvider& provider, const InvokePolicy& policy);

// Whole-transcript mode: every candidate final is evaluated and the results
// are folded into a single delta against `graph`. Segments whose evaluation
// failed contribute nothing and are listed in `failures`.
struct BatchEvaluation {
  GraphDelta delta;
  std::vector<std::pair<Seq, FailureInfo>> failures;
};
BatchEvaluation evaluate_transcript(const KnowledgeGraph& graph, const JobProfile& profile,
                                   std::span<const TranscriptSegment> finals, ModelProvider& provider,
                                   const InvokePolicy& policy, const MapperConfig& config = {});

nlohmann::json skill_eval_context(const JobProfile& profile, const TranscriptSegment& segment,
                                  std::span<const TranscriptSegment> context);

}  // namespace copilot
