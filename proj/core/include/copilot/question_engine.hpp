#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "copilot/provider.hpp"
#include "copilot/question.hpp"
#include "copilot/session.hpp"

namespace copilot {

struct QuestionConfig {
  // Finals handed to deep and targeted requests as dialogue context.
  std::size_t context_window = 6;
  // Finals considered by contextual probing.
  std::size_t contextual_k = 10;
};

// Checks the session is live and the target resolves, then stamps
// issued_at_seq with the latest finalized seq. Throws session_not_live,
// invalid_request, unknown_skill, unknown_segment.
QuestionRequest prepare_request(const Session& session, QuestionRequest request);

// A stored suggestion answering the prepared request, if any. Identical
// requests are served from here until a new final segment moves issued_at_seq.
const QuestionSuggestion* find_cached(const Session& session, const QuestionRequest& prepared);

nlohmann::json question_context(const Session& session, const QuestionRequest& prepared,
                                const QuestionConfig& config);

// Calls the question agent for a prepared request. Throws ProviderFailure.
QuestionSuggestion generate_question(const Session& session, const QuestionRequest& prepared,
                                     ModelProvider& provider, const InvokePolicy& policy,
                                     const QuestionConfig& config, std::string suggestion_id);

struct SuggestOutcome {
  QuestionSuggestion suggestion;
  bool cached = false;
};

// prepare_request + cache lookup + generate_question. Does not modify the
// session; the caller appends non-cached suggestions.
SuggestOutcome suggest(const Session& session, QuestionRequest request, ModelProvider& provider,
                       const InvokePolicy& policy, const QuestionConfig& config, std::string suggestion_id);

}  // namespace copilot
