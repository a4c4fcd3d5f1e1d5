#include "copilot/clock.hpp"

#include <chrono>

namespace copilot {

Millis SystemClock::now_ms() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

UlidGenerator::UlidGenerator(const Clock& clock, std::uint64_t seed) : clock_(clock), rng_(seed) {}

std::string UlidGenerator::next() {
  static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
  const auto ts = static_cast<std::uint64_t>(clock_.now_ms()) & ((1ULL << 48) - 1);
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(mutex_);
    hi = rng_() & 0xFFFF;  // 16 bits
    lo = rng_();           // 64 bits
  }
  std::string out(26, '0');
  // 10 chars of timestamp (50 bits, top 2 zero).
  for (int i = 9; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kAlphabet[(ts >> (5 * (9 - i))) & 0x1F];
  }
  // 16 chars of randomness (80 bits): 16 high bits then 64 low bits.
  for (int i = 0; i < 16; ++i) {
    const int shift = 5 * (15 - i);
    std::uint64_t chunk = 0;
    if (shift >= 64) {
      chunk = hi >> (shift - 64);
    } else if (shift + 5 > 64) {
      chunk = (lo >> shift) | (hi << (64 - shift));
    } else {
      chunk = lo >> shift;
    }
    out[static_cast<std::size_t>(10 + i)] = kAlphabet[chunk & 0x1F];
  }
  return out;
}

}  // namespace copilot
