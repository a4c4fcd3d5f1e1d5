#include "copilot/replay.hpp"

#include "copilot/error.hpp"

namespace copilot {

Session replay_log(std::span<const EventEnvelope> events) {
  if (events.empty()) throw Error(ErrorCode::corrupt_log, "empty log: expected session_started at event_seq 1");
  if (events.front().kind != EventKind::session_started) {
    throw Error(ErrorCode::corrupt_log, "event_seq " + std::to_string(events.front().event_seq) +
                                            ": log must begin with session_started");
  }
  std::optional<Session> session;
  std::int64_t expected = 1;
  for (const auto& e : events) {
    if (e.event_seq != expected) {
      throw Error(ErrorCode::corrupt_log, "event_seq " + std::to_string(e.event_seq) + ": expected " +
                                              std::to_string(expected));
    }
    try {
      apply_event(session, e);
    } catch (const Error& err) {
      throw Error(ErrorCode::corrupt_log, "event_seq " + std::to_string(e.event_seq) + " (" +
                                              std::string(to_string(e.kind)) + "): " + err.what());
    }
    ++expected;
  }
  return std::move(*session);
}

}  // namespace copilot
