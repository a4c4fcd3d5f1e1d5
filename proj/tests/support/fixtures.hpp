#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "copilot/engine.hpp"

namespace copilot::testkit {

std::filesystem::path data_dir();
JobProfile backend_profile();

// A scripted interview: alternating-ish speakers, monotonically increasing
// timestamps, candidate lines that mention 0..3 lexicon terms of the profile.
std::vector<TranscriptSegment> random_script(std::mt19937_64& rng, const JobProfile& profile, int segments);

// A temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct OwnerHarness {
  std::shared_ptr<MemoryEventLog> log = std::make_shared<MemoryEventLog>();
  std::shared_ptr<ModelProvider> provider = std::make_shared<MockProvider>();
  ManualClock clock{1'700'000'000'000};
  std::shared_ptr<SessionOwner> owner;

  explicit OwnerHarness(const JobProfile& profile, std::string session_id = "s-test",
                        std::shared_ptr<ModelProvider> p = nullptr, EngineConfig config = {});
};

}  // namespace copilot::testkit
