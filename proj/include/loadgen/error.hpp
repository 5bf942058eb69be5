#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loadgen {

enum class ErrorCode {
    invalid_frame_length,
    invalid_argument,
    truncated_frame,
    overshoot_violation,
    empty_plan,
    empty_capture,
    non_monotone_timestamps,
    bad_magic,
    truncated_record,
    sink_write,
    port_unavailable,
    port_busy,
    send_failure,
    validation_error,
    feature_conflict,
    unknown_run,
    not_running,
    invalid_state,
    unauthorized,
};

/// Stable kebab-case name, used in JSON error bodies and CLI messages.
std::string_view error_name(ErrorCode code) noexcept;

/// Every failure in the library is reported as an Error carrying a code.
/// `field` names the offending input where one exists (validation paths).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace loadgen
