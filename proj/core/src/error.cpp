#include "kdecay/error.hpp"

namespace kdecay {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::pole_proximity: return "pole proximity";
    case ErrorCode::evaluation_at_pole: return "evaluation at pole";
    case ErrorCode::tolerance_unreachable: return "tolerance unreachable";
    case ErrorCode::moment_diverges: return "moment diverges";
    case ErrorCode::class_insufficient: return "class insufficient";
    case ErrorCode::too_close_to_pole: return "too close to pole";
    case ErrorCode::term_inside_threshold: return "term inside threshold";
    case ErrorCode::term_outside_threshold: return "term outside threshold";
    case ErrorCode::sign_claim_violated: return "sign claim violated at sample point";
    case ErrorCode::p_out_of_range: return "p out of range";
    case ErrorCode::insufficient_data: return "insufficient data";
    case ErrorCode::unknown_exponent: return "unknown convergence exponent";
    case ErrorCode::unknown_family_kind: return "unknown family kind";
    case ErrorCode::bad_family_spec: return "bad family specification";
  }
  return "error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                        : std::string(to_string(code)) + ": " + detail),
      code_(code) {}

}  // namespace kdecay
