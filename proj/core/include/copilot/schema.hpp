#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace copilot {

// Validator for the JSON Schema subset used by the output schema documents:
// type, enum, const, required, properties, additionalProperties (boolean),
// items, minItems, maxItems, minLength, minimum, anyOf.
// Returns the first violation as "<json pointer>: <reason>", or nullopt.
std::optional<std::string> validate_against(const nlohmann::json& schema, const nlohmann::json& value);

class SchemaRegistry {
 public:
  // The schemas compiled into the library (config/schemas/*.json).
  static const SchemaRegistry& builtin();

  void add(std::string schema_id, nlohmann::json schema);
  const nlohmann::json* find(const std::string& schema_id) const;
  std::optional<std::string> validate(const std::string& schema_id, const nlohmann::json& value) const;

 private:
  std::map<std::string, nlohmann::json> schemas_;
};

// Prompt templates compiled into the library (config/prompts/*.txt), keyed by
// file stem. An override directory takes precedence when it has the file.
std::string prompt_template(const std::string& name, const std::string& override_dir = {});

}  // namespace copilot
