#pragma once

#include <cstdint>
#include <string_view>

namespace gridprobe {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen because the output stream is
/// fully specified by 64-bit integer arithmetic, so every platform produces
/// the same sequence for a given seed. Recorded in run manifests by name().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr std::string_view name() { return "splitmix64"; }

  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a. Used to derive per-case seeds from case ids.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace gridprobe
