#include "fixtures.hpp"

#include <atomic>

namespace copilot::testkit {

std::filesystem::path data_dir() { return COPILOT_TEST_DATA_DIR; }

JobProfile backend_profile() { return load_profile(data_dir() / "profiles" / "backend_engineer.json"); }

namespace {

const std::vector<std::string> kFiller = {
    "honestly", "we",    "shipped", "the",   "thing",  "quickly", "after", "a",       "long",
    "review",   "with",  "my",      "manager", "and",  "then",    "moved", "on",      "to",
    "another",  "phase", "of",      "work",  "which",  "was",     "hard",  "but",     "fun",
};

const std::vector<std::string> kQuestions = {
    "Tell me about a recent project.", "What was the hardest part?", "How did you approach that?",
    "Can you give an example?",        "What would you change?",    "Who else was involved?",
};

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

std::vector<TranscriptSegment> random_script(std::mt19937_64& rng, const JobProfile& profile, int segments) {
  std::vector<std::string> terms;
  for (const auto& s : profile.skills) {
    for (const auto& k : s.keywords) terms.push_back(k);
  }
  std::vector<TranscriptSegment> out;
  Millis t = 0;
  std::bernoulli_distribution candidate_turn(0.6);
  std::uniform_int_distribution<int> term_count(0, 3);
  std::uniform_int_distribution<int> filler_count(3, 10);
  std::uniform_int_distribution<Millis> gap(100, 900);
  std::uniform_int_distribution<Millis> length(800, 6000);
  for (int i = 0; i < segments; ++i) {
    TranscriptSegment seg;
    seg.segment_id = "u" + std::to_string(i + 1);
    seg.speaker = candidate_turn(rng) ? Speaker::candidate : Speaker::interviewer;
    if (seg.speaker == Speaker::interviewer) {
      seg.text = pick(rng, kQuestions);
    } else {
      std::vector<std::string> words;
      const int fillers = filler_count(rng);
      for (int w = 0; w < fillers; ++w) words.push_back(pick(rng, kFiller));
      const int n_terms = term_count(rng);
      for (int k = 0; k < n_terms; ++k) {
        auto pos = std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), pick(rng, terms));
      }
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w > 0) seg.text += ' ';
        seg.text += words[w];
      }
      seg.text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(seg.text[0])));
      seg.text += '.';
    }
    t += gap(rng);
    seg.t_start = t;
    t += length(rng);
    seg.t_end = t;
    out.push_back(std::move(seg));
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("copilot-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

OwnerHarness::OwnerHarness(const JobProfile& profile, std::string session_id, std::shared_ptr<ModelProvider> p,
                           EngineConfig config) {
  if (p) provider = std::move(p);
  SessionOwner::Deps deps;
  deps.log = log;
  deps.provider = provider;
  deps.clock = &clock;
  deps.config = config;
  owner = SessionOwner::create(std::move(session_id), profile, std::move(deps));
}

}  // namespace copilot::testkit
