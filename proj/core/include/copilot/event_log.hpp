#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "copilot/events.hpp"

namespace copilot {

// Append-only per-session event store.
class EventLog {
 public:
  virtual ~EventLog() = default;
  virtual std::int64_t last_seq() const = 0;
  // Requires envelope.event_seq == last_seq() + 1 (seq_conflict otherwise).
  // Returns the persisted position once the event is durable. Throws
  // storage_failure when the write cannot be completed.
  virtual std::int64_t append(const EventEnvelope& envelope) = 0;
  virtual std::vector<EventEnvelope> read_all() const = 0;
};

class MemoryEventLog final : public EventLog {
 public:
  std::int64_t last_seq() const override;
  std::int64_t append(const EventEnvelope& envelope) override;
  std::vector<EventEnvelope> read_all() const override;

 private:
  mutable std::mutex mutex_;
  std::vector<EventEnvelope> events_;
};

// One EventEnvelope per line in <data_dir>/<session_id>.events.jsonl.
class JsonlEventLog final : public EventLog {
 public:
  // Opens (creating if needed) and scans existing content for last_seq.
  // `sync` fsyncs every append.
  explicit JsonlEventLog(std::filesystem::path path, bool sync = true);
  ~JsonlEventLog() override;
  JsonlEventLog(const JsonlEventLog&) = delete;
  JsonlEventLog& operator=(const JsonlEventLog&) = delete;

  std::int64_t last_seq() const override;
  std::int64_t append(const EventEnvelope& envelope) override;
  std::vector<EventEnvelope> read_all() const override;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  bool sync_;
  mutable std::mutex mutex_;
  std::FILE* file_ = nullptr;
  std::int64_t last_seq_ = 0;
};

std::filesystem::path event_log_path(const std::filesystem::path& data_dir, const std::string& session_id);

// Parses a log file. A final line without a trailing newline that does not
// parse is a torn write and is dropped; any other unparseable line is
// corrupt_log naming the line and the event_seq expected there.
std::vector<EventEnvelope> read_event_log(const std::filesystem::path& path);

// Test helper: fails with storage_failure once `fail_at_seq` is reached.
class FailingEventLog final : public EventLog {
 public:
  FailingEventLog(std::shared_ptr<EventLog> inner, std::int64_t fail_at_seq)
      : inner_(std::move(inner)), fail_at_(fail_at_seq) {}
  std::int64_t last_seq() const override { return inner_->last_seq(); }
  std::int64_t append(const EventEnvelope& envelope) override;
  std::vector<EventEnvelope> read_all() const override { return inner_->read_all(); }

 private:
  std::shared_ptr<EventLog> inner_;
  std::int64_t fail_at_;
};

}  // namespace copilot
