#pragma once

#include <span>

#include "copilot/events.hpp"
#include "copilot/session.hpp"

namespace copilot {

// Folds a gap-free event sequence back into session state. The first event
// must be session_started. Any violation (gap, wrong session, invalid payload,
// illegal transition) is corrupt_log naming the failing event_seq. A prefix of
// a valid log is itself valid and yields the state at that point.
Session replay_log(std::span<const EventEnvelope> events);

}  // namespace copilot
