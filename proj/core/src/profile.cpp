#include "copilot/profile.hpp"

#include <fstream>
#include <set>

#include "copilot/error.hpp"
#include "copilot/text.hpp"

namespace copilot {

const Skill* JobProfile::find_skill(std::string_view skill_id) const noexcept {
  for (const auto& s : skills) {
    if (s.skill_id == skill_id) return &s;
  }
  return nullptr;
}

void validate(const JobProfile& profile) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::invalid_profile, why); };
  if (text::trim(profile.title).empty()) fail("profile title is empty");
  if (text::trim(profile.description).empty()) fail("profile description is empty");
  if (profile.skills.empty()) fail("profile has no skills");
  std::set<std::string> seen;
  for (const auto& s : profile.skills) {
    if (s.skill_id.empty()) fail("skill with empty skill_id");
    if (text::trim(s.name).empty()) fail("skill '" + s.skill_id + "' has an empty name");
    if (!seen.insert(s.skill_id).second) fail("duplicate skill_id '" + s.skill_id + "'");
  }
}

JobProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open profile " + path.string());
  JobProfile profile;
  try {
    profile = nlohmann::json::parse(in).get<JobProfile>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_profile, path.string() + ": " + e.what());
  }
  validate(profile);
  return profile;
}

void to_json(nlohmann::json& j, const Skill& s) {
  j = nlohmann::json{{"skill_id", s.skill_id}, {"name", s.name}};
  if (s.description) j["description"] = *s.description;
  if (!s.keywords.empty()) j["keywords"] = s.keywords;
}

void from_json(const nlohmann::json& j, Skill& s) {
  j.at("skill_id").get_to(s.skill_id);
  j.at("name").get_to(s.name);
  s.description.reset();
  if (auto it = j.find("description"); it != j.end() && !it->is_null()) {
    s.description = it->get<std::string>();
  }
  s.keywords = j.value("keywords", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const JobProfile& p) {
  j = nlohmann::json{{"job_id", p.job_id},
                     {"title", p.title},
                     {"description", p.description},
                     {"skills", p.skills}};
}

void from_json(const nlohmann::json& j, JobProfile& p) {
  j.at("job_id").get_to(p.job_id);
  j.at("title").get_to(p.title);
  j.at("description").get_to(p.description);
  j.at("skills").get_to(p.skills);
}

}  // namespace copilot
