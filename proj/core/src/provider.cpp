#include "copilot/provider.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "copilot/schema.hpp"
#include "copilot/text.hpp"

namespace copilot {

using nlohmann::json;

std::string_view to_string(Agent a) noexcept {
  switch (a) {
    case Agent::skill_eval: return "skill_eval";
    case Agent::question_gen: return "question_gen";
    case Agent::summarize: return "summarize";
  }
  return "skill_eval";
}

std::string_view schema_for(Agent a) noexcept {
  switch (a) {
    case Agent::skill_eval: return "skill_eval.v1";
    case Agent::question_gen: return "question.v1";
    case Agent::summarize: return "summary.v1";
  }
  return "skill_eval.v1";
}

std::string_view to_string(FailureClass c) noexcept {
  switch (c) {
    case FailureClass::timeout: return "timeout";
    case FailureClass::malformed_output: return "malformed-output";
    case FailureClass::transport: return "transport";
  }
  return "transport";
}

namespace {

// Models like to wrap JSON in markdown fences.
std::string_view strip_fences(std::string_view raw) {
  raw = text::trim(raw);
  if (raw.starts_with("```")) {
    const auto first_nl = raw.find('\n');
    const auto last_fence = raw.rfind("```");
    if (first_nl != std::string_view::npos && last_fence > first_nl) {
      raw = text::trim(raw.substr(first_nl + 1, last_fence - first_nl - 1));
    }
  }
  return raw;
}

}  // namespace

ProviderResponse invoke(ModelProvider& provider, const ProviderRequest& request, const InvokePolicy& policy) {
  using clock = std::chrono::steady_clock;
  const auto schema_id = request.schema_id.empty() ? std::string(schema_for(request.agent)) : request.schema_id;
  const auto& registry = SchemaRegistry::builtin();
  if (!registry.find(schema_id)) {
    throw ProviderFailure(FailureClass::malformed_output, "no output schema named " + schema_id);
  }

  const auto start = clock::now();
  std::vector<std::string> repair_notes;
  std::string last_reason;
  const int attempts = std::max(0, policy.max_retries) + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    const auto call_start = clock::now();
    auto raw = provider.complete(request, repair_notes, policy.timeout_ms);
    const auto call_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - call_start).count();
    if (call_ms > policy.timeout_ms) {
      throw ProviderFailure(FailureClass::timeout, std::string(to_string(request.agent)) + " call took " +
                                                       std::to_string(call_ms) + " ms");
    }

    json parsed;
    try {
      parsed = json::parse(strip_fences(raw));
      if (auto err = registry.validate(schema_id, parsed)) {
        last_reason = "schema " + schema_id + " violated at " + *err;
      } else {
        const auto total =
            std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start).count();
        return ProviderResponse{std::move(parsed), std::move(raw), total, attempt};
      }
    } catch (const json::parse_error& e) {
      last_reason = std::string("reply is not JSON: ") + e.what();
    }
    repair_notes.push_back("Your previous reply was rejected: " + last_reason +
                           ". Reply again with only a JSON document that satisfies schema " + schema_id + ".");
  }
  throw ProviderFailure(FailureClass::malformed_output,
                        std::string(to_string(request.agent)) + " output invalid after " +
                            std::to_string(attempts) + " attempts: " + last_reason);
}

std::vector<MockMapping> mock_skill_eval(const std::vector<LexiconSkill>& skills, std::string_view segment_text) {
  const auto folded = text::fold_case(segment_text);
  std::vector<MockMapping> out;
  for (const auto& skill : skills) {
    std::vector<std::string> lexicon;
    auto add_term = [&](std::string_view term) {
      auto t = text::normalize(term);
      if (!t.empty() && std::find(lexicon.begin(), lexicon.end(), t) == lexicon.end()) lexicon.push_back(t);
    };
    for (const auto& k : skill.keywords) add_term(k);
    for (const auto& t : text::name_tokens(skill.name)) add_term(t);

    int hits = 0;
    std::size_t span_start = std::string::npos;
    std::size_t span_end = 0;
    for (const auto& term : lexicon) {
      if (auto pos = text::find_word(folded, term)) {
        ++hits;
        span_start = std::min(span_start, *pos);
        span_end = std::max(span_end, *pos + term.size());
      }
    }
    if (hits == 0) continue;

    static constexpr std::string_view kTerminators = ".!?";
    std::size_t lo = span_start;
    while (lo > 0 && kTerminators.find(segment_text[lo - 1]) == std::string_view::npos) --lo;
    std::size_t hi = span_end;
    while (hi < segment_text.size() && kTerminators.find(segment_text[hi]) == std::string_view::npos) ++hi;
    std::string summary(text::trim(segment_text.substr(lo, hi - lo)));

    out.push_back(MockMapping{skill.skill_id, hits >= 2 ? "high" : "medium", std::move(summary), hits});
  }
  return out;
}

namespace {

std::string skill_name(const json& skill) {
  return skill.value("name", skill.value("skill_id", std::string("this skill")));
}

json mock_skill_eval_reply(const json& ctx) {
  std::vector<LexiconSkill> skills;
  for (const auto& s : ctx.at("skills")) {
    skills.push_back({s.at("skill_id").get<std::string>(), s.at("name").get<std::string>(),
                      s.value("keywords", std::vector<std::string>{})});
  }
  json mappings = json::array();
  for (const auto& m : mock_skill_eval(skills, ctx.at("segment").at("text").get<std::string>())) {
    mappings.push_back({{"skill_id", m.skill_id}, {"relevance", m.relevance},
                        {"summary", m.summary}, {"supporting", "segment"}});
  }
  return {{"mappings", std::move(mappings)}};
}

json mock_question_reply(const json& ctx) {
  const auto mode = ctx.at("mode").get<std::string>();
  if (mode == "targeted") {
    const auto name = skill_name(ctx.at("target_skill"));
    return {{"text", "Can you describe a specific situation where you used " + name + "?"},
            {"rationale", name + " is a required skill and a concrete past situation shows how it was applied."},
            {"star_tags", json::array()}};
  }
  if (mode == "deep") {
    const auto lead = text::leading_words(ctx.at("target_segment").at("text").get<std::string>(), 8);
    return {{"text", "Regarding '" + lead + "' — what was the situation, and what was the result?"},
            {"rationale", "The answer does not yet establish the situation it happened in or its outcome."},
            {"star_tags", json::array({"Situation", "Result"})}};
  }
  const json* first_partial = nullptr;
  for (const auto& c : ctx.at("coverage")) {
    const auto status = c.at("status").get<std::string>();
    if (status == "not_covered") {
      return {{"text", "You have not yet covered " + skill_name(c) + "; consider asking about it."},
              {"rationale", "No evidence has been recorded for this required skill yet."},
              {"star_tags", json::array()}};
    }
    if (status == "partially_covered" && !first_partial) first_partial = &c;
  }
  if (first_partial) {
    return {{"text", skill_name(*first_partial) + " is only partially covered; consider probing it further."},
            {"rationale", "The recorded evidence for this skill is only of medium relevance."},
            {"star_tags", json::array()}};
  }
  return {{"text", "Every required skill has evidence; consider probing the most recent answer in more depth."},
          {"rationale", "All skills are covered, so depth matters more than breadth now."},
          {"star_tags", json::array()}};
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

json mock_summary_reply(const json& ctx) {
  if (ctx.at("section") == "skill") {
    const auto name = skill_name(ctx.at("skill"));
    const auto status = ctx.at("status").get<std::string>();
    std::string narrative = name + ": ";
    if (status == "covered") {
      narrative += "demonstrated with strong evidence.";
    } else if (status == "partially_covered") {
      narrative += "partially demonstrated.";
    } else {
      narrative += "no evidence recorded.";
    }
    std::vector<std::string> items;
    for (const auto& e : ctx.at("evidence")) {
      std::vector<std::string> seqs;
      for (const auto& s : e.at("supporting_seqs")) seqs.push_back(std::to_string(s.get<long long>()));
      items.push_back(e.at("summary").get<std::string>() + " (segment " + join(seqs, ", ") + ")");
    }
    if (!items.empty()) narrative += " Evidence: " + join(items, "; ") + ".";
    const auto notes = ctx.value("notes", std::vector<std::string>{});
    if (!notes.empty()) narrative += " Notes: " + join(notes, "; ") + ".";
    return {{"narrative", narrative}};
  }

  std::vector<std::string> strong, partial, none;
  for (const auto& c : ctx.at("coverage")) {
    const auto status = c.at("status").get<std::string>();
    auto& bucket = status == "covered" ? strong : status == "partially_covered" ? partial : none;
    bucket.push_back(skill_name(c));
  }
  std::vector<std::string> clauses;
  if (!strong.empty()) clauses.push_back("strong evidence for " + join(strong, ", "));
  if (!partial.empty()) clauses.push_back("partial evidence for " + join(partial, ", "));
  if (!none.empty()) clauses.push_back("no evidence for " + join(none, ", "));
  std::string narrative = "The candidate showed " + join(clauses, "; ") + ".";
  const auto notes = ctx.value("notes", std::vector<std::string>{});
  if (!notes.empty()) narrative += " Interviewer notes: " + join(notes, "; ") + ".";
  return {{"narrative", narrative}};
}

}  // namespace

std::string MockProvider::complete(const ProviderRequest& request, const std::vector<std::string>&, Millis) {
  try {
    switch (request.agent) {
      case Agent::skill_eval: return mock_skill_eval_reply(request.context).dump();
      case Agent::question_gen: return mock_question_reply(request.context).dump();
      case Agent::summarize: return mock_summary_reply(request.context).dump();
    }
  } catch (const json::exception& e) {
    throw ProviderFailure(FailureClass::transport, std::string("mock provider got a malformed context: ") + e.what());
  }
  throw ProviderFailure(FailureClass::transport, "unknown agent");
}

FaultInjectingProvider::FaultInjectingProvider(std::shared_ptr<ModelProvider> inner, double failure_rate,
                                               std::uint64_t seed)
    : inner_(std::move(inner)), failure_rate_(failure_rate), rng_(seed) {}

std::string FaultInjectingProvider::complete(const ProviderRequest& request,
                                             const std::vector<std::string>& repair_notes, Millis timeout_ms) {
  int failure_kind = -1;
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < failure_rate_) {
      failure_kind = failures_++ % 3;
    }
  }
  switch (failure_kind) {
    case 0: throw ProviderFailure(FailureClass::transport, "injected transport failure");
    case 1: throw ProviderFailure(FailureClass::timeout, "injected timeout");
    case 2: return "I am not JSON {";
    default: return inner_->complete(request, repair_notes, timeout_ms);
  }
}

int FaultInjectingProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

int FaultInjectingProvider::injected_failures() const {
  std::lock_guard lock(mutex_);
  return failures_;
}

std::string ScriptedProvider::complete(const ProviderRequest&, const std::vector<std::string>& repair_notes, Millis) {
  std::lock_guard lock(mutex_);
  repair_history_.push_back(repair_notes);
  if (outputs_.empty()) throw ProviderFailure(FailureClass::transport, "no scripted output");
  const auto& out = outputs_[std::min(next_, outputs_.size() - 1)];
  ++next_;
  return out;
}

int ScriptedProvider::calls() const {
  std::lock_guard lock(mutex_);
  return static_cast<int>(next_);
}

std::vector<std::vector<std::string>> ScriptedProvider::repair_history() const {
  std::lock_guard lock(mutex_);
  return repair_history_;
}

ProviderSettings provider_settings_from_env(const std::function<const char*(const char*)>& getenv_fn) {
  auto get = [&](const char* name, std::string fallback) {
    const char* v = getenv_fn(name);
    return (v && *v) ? std::string(v) : fallback;
  };
  ProviderSettings s;
  s.kind = get("MODEL_PROVIDER", "mock");
  s.http.api_base = get("MODEL_API_BASE", "https://api.openai.com/v1");
  s.http.api_key = get("MODEL_API_KEY", "");
  s.http.model = get("MODEL_NAME", "gpt-4o");
  s.http.config_dir = get("MODEL_CONFIG_DIR", "");
  return s;
}

std::shared_ptr<ModelProvider> make_provider(const ProviderSettings& settings) {
  if (settings.kind == "mock") return std::make_shared<MockProvider>();
  if (settings.kind == "http") return std::make_shared<HttpProvider>(settings.http);
  throw Error(ErrorCode::invalid_config, "MODEL_PROVIDER must be mock or http, got '" + settings.kind + "'");
}

}  // namespace copilot
