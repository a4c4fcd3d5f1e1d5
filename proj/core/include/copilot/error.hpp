#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace copilot {

enum class ErrorCode {
  invalid_profile,
  session_not_live,
  wrong_state,
  empty_text,
  file_not_found,
  malformed_line,
  unknown_skill,
  unknown_segment,
  invalid_request,
  dangling_reference,
  seq_conflict,
  storage_failure,
  corrupt_log,
  unknown_session,
  session_not_summarized,
  port_in_use,
  invalid_config,
  provider_failure,
};

// Stable kebab-case class names; these appear on the wire and in CLI output.
std::string_view error_class(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view class_name() const noexcept { return error_class(code_); }

 private:
  ErrorCode code_;
};

}  // namespace copilot
