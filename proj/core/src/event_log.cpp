#include "copilot/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>

#include <unistd.h>

#include "copilot/error.hpp"

namespace copilot {

namespace {

void check_next(std::int64_t last, const EventEnvelope& envelope) {
  if (envelope.event_seq != last + 1) {
    throw Error(ErrorCode::seq_conflict, "expected event_seq " + std::to_string(last + 1) + ", got " +
                                             std::to_string(envelope.event_seq));
  }
}

}  // namespace

std::int64_t MemoryEventLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::int64_t>(events_.size());
}

std::int64_t MemoryEventLog::append(const EventEnvelope& envelope) {
  std::lock_guard lock(mutex_);
  check_next(static_cast<std::int64_t>(events_.size()), envelope);
  events_.push_back(envelope);
  return envelope.event_seq;
}

std::vector<EventEnvelope> MemoryEventLog::read_all() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::filesystem::path event_log_path(const std::filesystem::path& data_dir, const std::string& session_id) {
  return data_dir / (session_id + ".events.jsonl");
}

std::vector<EventEnvelope> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::unknown_session, "no event log at " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<EventEnvelope> events;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const auto line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : content.size();
    ++line_number;
    if (line.empty()) continue;
    try {
      events.push_back(nlohmann::json::parse(line).get<EventEnvelope>());
    } catch (const std::exception& e) {
      if (!terminated) break;  // torn final write
      throw Error(ErrorCode::corrupt_log, path.string() + ": line " + std::to_string(line_number) +
                                              " (event_seq " + std::to_string(events.size() + 1) +
                                              ") does not parse: " + e.what());
    }
  }
  return events;
}

JsonlEventLog::JsonlEventLog(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync) {
  if (std::filesystem::exists(path_)) {
    const auto existing = read_event_log(path_);
    last_seq_ = existing.empty() ? 0 : existing.back().event_seq;
    // Cut a torn tail so the next append starts on a clean line.
    std::ifstream in(path_, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
      const auto keep = content.rfind('\n');
      std::filesystem::resize_file(path_, keep == std::string::npos ? 0 : keep + 1);
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) {
    throw Error(ErrorCode::storage_failure, "cannot open " + path_.string() + ": " + std::strerror(errno));
  }
}

JsonlEventLog::~JsonlEventLog() {
  if (file_) std::fclose(file_);
}

std::int64_t JsonlEventLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return last_seq_;
}

std::int64_t JsonlEventLog::append(const EventEnvelope& envelope) {
  std::lock_guard lock(mutex_);
  check_next(last_seq_, envelope);
  const auto line = nlohmann::json(envelope).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      (sync_ && ::fsync(::fileno(file_)) != 0)) {
    throw Error(ErrorCode::storage_failure, "write to " + path_.string() + " failed: " + std::strerror(errno));
  }
  last_seq_ = envelope.event_seq;
  return last_seq_;
}

std::vector<EventEnvelope> JsonlEventLog::read_all() const {
  std::lock_guard lock(mutex_);
  return read_event_log(path_);
}

std::int64_t FailingEventLog::append(const EventEnvelope& envelope) {
  if (envelope.event_seq >= fail_at_) {
    throw Error(ErrorCode::storage_failure, "injected storage failure at event " + std::to_string(envelope.event_seq));
  }
  return inner_->append(envelope);
}

}  // namespace copilot
