#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace copilot {

using Millis = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  // Milliseconds since the Unix epoch.
  virtual Millis now_ms() const = 0;
};

class SystemClock final : public Clock {
 public:
  Millis now_ms() const override;
};

// Test clock; advances only when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Millis start = 0) : now_(start) {}
  Millis now_ms() const override { return now_.load(); }
  void advance(Millis delta) { now_ += delta; }
  void set(Millis t) { now_ = t; }

 private:
  std::atomic<Millis> now_;
};

// 26-character Crockford base32 identifiers: 48-bit millisecond timestamp
// followed by 80 random bits, so lexical order follows creation time.
class UlidGenerator {
 public:
  explicit UlidGenerator(const Clock& clock, std::uint64_t seed = std::random_device{}());
  std::string next();

 private:
  const Clock& clock_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
};

}  // namespace copilot
