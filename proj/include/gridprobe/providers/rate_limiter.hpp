#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "gridprobe/providers/clock.hpp"

namespace gridprobe::providers {

/// Token bucket with a capacity of one token, refilled every ceil(60 s / rate).
/// Grants are therefore spaced at least one interval apart, so any half-open
/// 60-second window holds at most `rate_per_minute` grants. Callers reserve a
/// slot under the lock and sleep outside it, so waiting is FIFO.
class RateLimiter {
 public:
  RateLimiter(double rate_per_minute, std::shared_ptr<Clock> clock);

  /// Blocks until the caller may send; returns the granted send time.
  Nanos acquire();

  Nanos interval() const noexcept { return interval_; }

 private:
  std::shared_ptr<Clock> clock_;
  Nanos interval_;
  std::mutex mu_;
  std::optional<Nanos> next_free_;
};

/// Counting gate bounding concurrent requests.
class InFlightGate {
 public:
  explicit InFlightGate(int max_in_flight);

  class Permit {
   public:
    explicit Permit(InFlightGate* gate) : gate_(gate) {}
    Permit(Permit&& other) noexcept : gate_(std::exchange(other.gate_, nullptr)) {}
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (gate_) gate_->release();
    }

   private:
    InFlightGate* gate_;
  };

  Permit acquire();
  int in_flight() const;
  int limit() const noexcept { return limit_; }

 private:
  void release();

  int limit_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

}  // namespace gridprobe::providers
