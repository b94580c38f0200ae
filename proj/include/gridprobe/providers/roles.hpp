#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridprobe/imaging/raster.hpp"

namespace gridprobe::providers {

/// Text-to-image service producing the guidance image.
class GuidanceProvider {
 public:
  virtual ~GuidanceProvider() = default;
  virtual std::string name() const = 0;
  /// Throws Error with kTransport, kPolicyRejection or kDecode.
  virtual imaging::RasterImage generate(const std::string& prompt) = 0;
};

struct TargetRequest {
  std::string case_id;  // routing key for scripted providers and audit refs
  imaging::RasterImage image;
  std::string prompt_text;
  int trial_index = 1;

  /// Throws Error(kInvalidArgument) on an empty prompt or image, or trial < 1.
  void validate() const;
};

struct TargetResponse {
  enum class Kind { kImage, kText, kTransportError };

  Kind kind = Kind::kTransportError;
  std::vector<std::uint8_t> image;  // encoded bytes, kImage
  std::string text;                 // kText
  std::string error_detail;         // kTransportError
  std::int64_t latency_ms = 0;
  std::string raw_ref;

  static TargetResponse image_payload(std::vector<std::uint8_t> bytes, std::string ref = {});
  static TargetResponse text_payload(std::string text, std::string ref = {});
  static TargetResponse transport_error(std::string detail);
};

std::string_view to_string(TargetResponse::Kind kind);
std::optional<TargetResponse::Kind> parse_response_kind(std::string_view text);

/// The multimodal model under test. Text answers are data, not errors; only
/// exhausted transport retries come back as kTransportError.
class TargetProvider {
 public:
  virtual ~TargetProvider() = default;
  virtual std::string name() const = 0;
  virtual TargetResponse query(const TargetRequest& request) = 0;
};

enum class Verdict { kProhibited, kBenign, kRefusal };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

struct JudgeVerdict {
  std::string judge_name;
  Verdict verdict = Verdict::kBenign;
  std::string rationale;

  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

struct JudgeRequest {
  std::string case_id;
  int trial_index = 1;
  const TargetResponse* response = nullptr;
  std::string instruction;
};

class JudgeProvider {
 public:
  virtual ~JudgeProvider() = default;
  virtual std::string name() const = 0;
  /// Throws Error on transport failure or an unparseable answer.
  virtual JudgeVerdict judge(const JudgeRequest& request) = 0;
};

}  // namespace gridprobe::providers
