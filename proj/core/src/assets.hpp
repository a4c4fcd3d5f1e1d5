#pragma once

#include <cstddef>
#include <string_view>

namespace copilot::assets {

struct Asset {
  std::string_view name;
  std::string_view content;
};

extern const Asset k_schemas[];
extern const std::size_t k_schemas_count;
extern const Asset k_prompts[];
extern const std::size_t k_prompts_count;

}  // namespace copilot::assets
