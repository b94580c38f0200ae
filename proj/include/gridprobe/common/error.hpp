#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridprobe {

enum class ErrorCode {
  // validation
  kDimensionTooSmall,
  kDimensionMismatch,
  kDimensionNotDivisible,
  kMissingPatch,
  kInvalidArgument,
  kPoolTooSmall,
  kPoolTooLarge,
  kParse,
  kDuplicateId,
  kIdNotFound,
  kModelMismatch,
  kMissingPlaceholder,
  kInsufficientTrials,
  kIo,
  // provider
  kProviderUnavailable,
  kTransport,
  kPolicyRejection,
  kDecode,
};

std::string_view to_string(ErrorCode code);

inline bool is_provider_error(ErrorCode code) {
  return code == ErrorCode::kProviderUnavailable || code == ErrorCode::kTransport ||
         code == ErrorCode::kPolicyRejection || code == ErrorCode::kDecode;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionTooSmall: return "dimension_too_small";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDimensionNotDivisible: return "dimension_not_divisible";
    case ErrorCode::kMissingPatch: return "missing_patch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kPoolTooSmall: return "pool_too_small";
    case ErrorCode::kPoolTooLarge: return "pool_too_large";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kIdNotFound: return "id_not_found";
    case ErrorCode::kModelMismatch: return "model_mismatch";
    case ErrorCode::kMissingPlaceholder: return "missing_placeholder";
    case ErrorCode::kInsufficientTrials: return "insufficient_trials";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kProviderUnavailable: return "provider_unavailable";
    case ErrorCode::kTransport: return "transport_error";
    case ErrorCode::kPolicyRejection: return "policy_rejection";
    case ErrorCode::kDecode: return "decode_error";
  }
  return "unknown";
}

}  // namespace gridprobe
