#pragma once

#include <chrono>
#include <mutex>
#include <vector>

namespace gridprobe::providers {

using Nanos = std::chrono::nanoseconds;

/// Time source for rate limiting and backoff. Times are offsets from an
/// arbitrary per-clock epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Nanos now() const = 0;
  virtual void sleep_until(Nanos deadline) = 0;
  void sleep_for(Nanos d) { sleep_until(now() + d); }
};

class SteadyClock final : public Clock {
 public:
  Nanos now() const override;
  void sleep_until(Nanos deadline) override;
};

/// Simulated time: sleeping advances the clock instead of blocking. Thread-safe.
class ManualClock final : public Clock {
 public:
  Nanos now() const override;
  void sleep_until(Nanos deadline) override;
  void advance(Nanos d);
  /// Every sleep request seen so far, as durations from the call time.
  std::vector<Nanos> sleeps() const;

 private:
  mutable std::mutex mu_;
  Nanos now_{0};
  std::vector<Nanos> sleeps_;
};

}  // namespace gridprobe::providers
