#include "copilot/error.hpp"

namespace copilot {

std::string_view error_class(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_profile: return "invalid-profile";
    case ErrorCode::session_not_live: return "session-not-live";
    case ErrorCode::wrong_state: return "wrong-state";
    case ErrorCode::empty_text: return "empty-text";
    case ErrorCode::file_not_found: return "file-not-found";
    case ErrorCode::malformed_line: return "malformed-line";
    case ErrorCode::unknown_skill: return "unknown-skill";
    case ErrorCode::unknown_segment: return "unknown-segment";
    case ErrorCode::invalid_request: return "invalid-request";
    case ErrorCode::dangling_reference: return "dangling-reference";
    case ErrorCode::seq_conflict: return "seq-conflict";
    case ErrorCode::storage_failure: return "storage-failure";
    case ErrorCode::corrupt_log: return "corrupt-log";
    case ErrorCode::unknown_session: return "unknown-session";
    case ErrorCode::session_not_summarized: return "session-not-summarized";
    case ErrorCode::port_in_use: return "port-in-use";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::provider_failure: return "provider-failure";
  }
  return "unknown";
}

}  // namespace copilot
