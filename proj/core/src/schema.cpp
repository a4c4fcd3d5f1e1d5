#include "copilot/schema.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "assets.hpp"
#include "copilot/error.hpp"

namespace copilot {

namespace {

using nlohmann::json;

bool has_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

std::optional<std::string> check(const json& schema, const json& value, const std::string& where) {
  auto fail = [&](const std::string& why) {
    return std::optional<std::string>(where.empty() ? "/: " + why : where + ": " + why);
  };

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const auto& t : *it) ok = ok || has_type(value, t.get<std::string>());
    } else {
      ok = has_type(value, it->get<std::string>());
    }
    if (!ok) return fail("expected type " + it->dump());
  }
  if (auto it = schema.find("const"); it != schema.end() && value != *it) {
    return fail("expected constant " + it->dump());
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool ok = false;
    for (const auto& candidate : *it) ok = ok || candidate == value;
    if (!ok) return fail("value " + value.dump() + " not in " + it->dump());
  }
  if (value.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() &&
        value.get_ref<const std::string&>().size() < it->get<std::size_t>()) {
      return fail("string shorter than " + it->dump());
    }
  }
  if (value.is_number()) {
    if (auto it = schema.find("minimum"); it != schema.end() && value.get<double>() < it->get<double>()) {
      return fail("number below minimum " + it->dump());
    }
  }
  if (value.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>()) {
      return fail("fewer than " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && value.size() > it->get<std::size_t>()) {
      return fail("more than " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = check(*it, value[i], where + "/" + std::to_string(i))) return err;
      }
    }
  }
  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it) {
        if (!value.contains(key.get<std::string>())) return fail("missing required property " + key.dump());
      }
    }
    const auto props = schema.find("properties");
    if (props != schema.end()) {
      for (const auto& [key, sub] : props->items()) {
        if (auto v = value.find(key); v != value.end()) {
          if (auto err = check(sub, *v, where + "/" + key)) return err;
        }
      }
    }
    if (auto it = schema.find("additionalProperties"); it != schema.end() && it->is_boolean() && !it->get<bool>()) {
      for (const auto& [key, v] : value.items()) {
        if (props == schema.end() || !props->contains(key)) return fail("unexpected property \"" + key + "\"");
      }
    }
  }
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    std::string reasons;
    for (const auto& alternative : *it) {
      auto err = check(alternative, value, where);
      if (!err) return std::nullopt;
      reasons += (reasons.empty() ? "" : "; ") + *err;
    }
    return fail("no alternative matched (" + reasons + ")");
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_against(const nlohmann::json& schema, const nlohmann::json& value) {
  return check(schema, value, "");
}

const SchemaRegistry& SchemaRegistry::builtin() {
  static const SchemaRegistry registry = [] {
    SchemaRegistry r;
    for (std::size_t i = 0; i < assets::k_schemas_count; ++i) {
      r.add(std::string(assets::k_schemas[i].name), nlohmann::json::parse(assets::k_schemas[i].content));
    }
    return r;
  }();
  return registry;
}

void SchemaRegistry::add(std::string schema_id, nlohmann::json schema) {
  schemas_[std::move(schema_id)] = std::move(schema);
}

const nlohmann::json* SchemaRegistry::find(const std::string& schema_id) const {
  auto it = schemas_.find(schema_id);
  return it == schemas_.end() ? nullptr : &it->second;
}

std::optional<std::string> SchemaRegistry::validate(const std::string& schema_id,
                                                    const nlohmann::json& value) const {
  const auto* schema = find(schema_id);
  if (!schema) return "unknown schema " + schema_id;
  return validate_against(*schema, value);
}

std::string prompt_template(const std::string& name, const std::string& override_dir) {
  if (!override_dir.empty()) {
    const auto path = std::filesystem::path(override_dir) / "prompts" / (name + ".txt");
    if (std::ifstream in(path); in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }
  for (std::size_t i = 0; i < assets::k_prompts_count; ++i) {
    if (assets::k_prompts[i].name == name) return std::string(assets::k_prompts[i].content);
  }
  throw Error(ErrorCode::invalid_config, "no prompt template named " + name);
}

}  // namespace copilot
