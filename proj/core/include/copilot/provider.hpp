#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "copilot/clock.hpp"
#include "copilot/error.hpp"

namespace copilot {

// The three model-backed agents.
enum class Agent { skill_eval, question_gen, summarize };
std::string_view to_string(Agent a) noexcept;
// Output schema each agent must satisfy.
std::string_view schema_for(Agent a) noexcept;

struct ProviderRequest {
  Agent agent = Agent::skill_eval;
  nlohmann::json context;
  std::string schema_id;
};

struct ProviderResponse {
  nlohmann::json parsed;
  std::string raw;
  Millis latency_ms = 0;
  int attempts = 1;
};

enum class FailureClass { timeout, malformed_output, transport };
std::string_view to_string(FailureClass c) noexcept;

class ProviderFailure : public Error {
 public:
  ProviderFailure(FailureClass cls, const std::string& message)
      : Error(ErrorCode::provider_failure, message), class_(cls) {}
  FailureClass failure_class() const noexcept { return class_; }

 private:
  FailureClass class_;
};

// Plain-data copy of a ProviderFailure for events and reports.
struct FailureInfo {
  FailureClass cls = FailureClass::transport;
  std::string message;
};

struct InvokePolicy {
  Millis timeout_ms = 10'000;
  int max_retries = 2;
};

// A model backend. complete() returns the model's raw text for a request;
// `repair_notes` carries one instruction per earlier attempt whose output
// failed the schema gate. Implementations throw ProviderFailure for transport
// problems and timeouts. Must be safe to call concurrently.
class ModelProvider {
 public:
  virtual ~ModelProvider() = default;
  virtual std::string kind() const = 0;
  virtual std::string complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                               Millis timeout_ms) = 0;
};

// Runs the request through the provider and the schema gate. Non-parsing or
// schema-invalid output is retried with a repair instruction up to
// policy.max_retries times. Throws ProviderFailure{malformed_output} on
// exhaustion, {timeout} when a call exceeds policy.timeout_ms, and
// {transport} for backend errors. Nothing unvalidated is ever returned.
ProviderResponse invoke(ModelProvider& provider, const ProviderRequest& request, const InvokePolicy& policy);

// Skill payload as sent to the skill-evaluation agent.
struct LexiconSkill {
  std::string skill_id;
  std::string name;
  std::vector<std::string> keywords;
};

struct MockMapping {
  std::string skill_id;
  std::string relevance;  // "high" | "medium"
  std::string summary;
  int hits = 0;
};

// Deterministic keyword scorer. Each skill's lexicon is its keywords plus the
// case-folded tokens of its name; distinct lexicon terms found on word
// boundaries in the case-folded text are counted: >= 2 is high, 1 is medium.
// The summary is the text spanning all matches widened to sentence bounds.
std::vector<MockMapping> mock_skill_eval(const std::vector<LexiconSkill>& skills, std::string_view segment_text);

// Offline, deterministic provider. Responses are pure functions of the request.
class MockProvider final : public ModelProvider {
 public:
  std::string kind() const override { return "mock"; }
  std::string complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                       Millis timeout_ms) override;
};

// Wraps another provider and fails a fraction of calls with a seeded RNG.
// Failures cycle through transport errors, timeouts and unparseable text.
class FaultInjectingProvider final : public ModelProvider {
 public:
  FaultInjectingProvider(std::shared_ptr<ModelProvider> inner, double failure_rate, std::uint64_t seed);
  std::string kind() const override { return inner_->kind(); }
  std::string complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                       Millis timeout_ms) override;

  int calls() const;
  int injected_failures() const;

 private:
  std::shared_ptr<ModelProvider> inner_;
  double failure_rate_;
  mutable std::mutex mutex_;
  std::mt19937_64 rng_;
  int calls_ = 0;
  int failures_ = 0;
};

// Returns canned raw outputs in order, then repeats the last one.
class ScriptedProvider final : public ModelProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}
  std::string kind() const override { return "scripted"; }
  std::string complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                       Millis timeout_ms) override;

  int calls() const;
  std::vector<std::vector<std::string>> repair_history() const;

 private:
  std::vector<std::string> outputs_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
  std::vector<std::vector<std::string>> repair_history_;
};

struct HttpProviderConfig {
  std::string api_base;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model;
  std::string config_dir;  // optional prompt override directory
};

// Chat-completions style endpoint: POST {api_base}/chat/completions with a
// system prompt per agent and the context as the user message.
class HttpProvider final : public ModelProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  std::string kind() const override { return "http"; }
  std::string complete(const ProviderRequest& request, const std::vector<std::string>& repair_notes,
                       Millis timeout_ms) override;

  // Request body sent for `request`; exposed for tests.
  nlohmann::json build_body(const ProviderRequest& request, const std::vector<std::string>& repair_notes) const;

 private:
  HttpProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct ProviderSettings {
  std::string kind = "mock";  // mock | http
  HttpProviderConfig http;
};

// MODEL_PROVIDER, MODEL_API_BASE, MODEL_API_KEY, MODEL_NAME, MODEL_CONFIG_DIR.
ProviderSettings provider_settings_from_env(const std::function<const char*(const char*)>& getenv_fn);
std::shared_ptr<ModelProvider> make_provider(const ProviderSettings& settings);

}  // namespace copilot
