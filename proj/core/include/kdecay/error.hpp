#pragma once

#include <stdexcept>
#include <string>

namespace kdecay {

enum class ErrorCode {
  invalid_argument,
  pole_proximity,
  evaluation_at_pole,
  tolerance_unreachable,
  moment_diverges,
  class_insufficient,
  too_close_to_pole,
  term_inside_threshold,
  term_outside_threshold,
  sign_claim_violated,
  p_out_of_range,
  insufficient_data,
  unknown_exponent,
  unknown_family_kind,
  bad_family_spec,
};

const char* to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported with one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kdecay
