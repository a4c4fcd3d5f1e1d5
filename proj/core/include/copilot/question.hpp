#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/transcript.hpp"

namespace copilot {

enum class QuestionMode { deep, contextual, targeted };
std::string_view to_string(QuestionMode m) noexcept;
QuestionMode parse_question_mode(std::string_view s);

enum class StarTag { Situation, Task, Action, Result };
std::string_view to_string(StarTag t) noexcept;
StarTag parse_star_tag(std::string_view s);

struct QuestionRequest {
  QuestionMode mode = QuestionMode::contextual;
  std::optional<Seq> target_segment_seq;       // deep only
  std::optional<std::string> target_skill_id;  // targeted only
  // Latest finalized seq when the request was issued; stamped by the engine.
  Seq issued_at_seq = 0;

  bool operator==(const QuestionRequest&) const = default;
};

// Throws invalid_request unless exactly the mode-required target is present.
void validate(const QuestionRequest& request);

struct QuestionSuggestion {
  std::string suggestion_id;
  QuestionMode mode = QuestionMode::contextual;
  std::string text;
  std::string rationale;
  // Canonical S-T-A-R order; non-empty iff mode is deep.
  std::vector<StarTag> star_tags;
  std::optional<std::string> target_skill_id;
  std::optional<Seq> target_segment_seq;
  std::vector<Seq> provenance_seqs;
  Seq issued_at_seq = 0;

  // True when this suggestion answers `request` (same mode, target, issued_at_seq).
  bool answers(const QuestionRequest& request) const noexcept;
  bool operator==(const QuestionSuggestion&) const = default;
};

// Empty when the suggestion satisfies its type invariants; otherwise the reason.
std::optional<std::string> check_invariants(const QuestionSuggestion& s);

void to_json(nlohmann::json& j, const QuestionRequest& r);
void from_json(const nlohmann::json& j, QuestionRequest& r);
void to_json(nlohmann::json& j, const QuestionSuggestion& s);
void from_json(const nlohmann::json& j, QuestionSuggestion& s);

}  // namespace copilot
