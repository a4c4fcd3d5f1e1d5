#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace copilot {

struct Skill {
  std::string skill_id;
  std::string name;
  std::optional<std::string> description;
  // Lexicon terms; only the mock provider's scoring reads these.
  std::vector<std::string> keywords;

  bool operator==(const Skill&) const = default;
};

struct JobProfile {
  std::string job_id;
  std::string title;
  std::string description;
  std::vector<Skill> skills;

  const Skill* find_skill(std::string_view skill_id) const noexcept;
  bool operator==(const JobProfile&) const = default;
};

// Throws Error{invalid_profile} naming the first violated rule.
void validate(const JobProfile& profile);

JobProfile load_profile(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const Skill& s);
void from_json(const nlohmann::json& j, Skill& s);
void to_json(nlohmann::json& j, const JobProfile& p);
void from_json(const nlohmann::json& j, JobProfile& p);

}  // namespace copilot
