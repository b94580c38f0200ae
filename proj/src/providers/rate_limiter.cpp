#include "gridprobe/providers/rate_limiter.hpp"

#include <cmath>
#include <string>

#include "gridprobe/common/error.hpp"

namespace gridprobe::providers {

RateLimiter::RateLimiter(double rate_per_minute, std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {
  if (!(rate_per_minute > 0.0) || !std::isfinite(rate_per_minute)) {
    throw Error(ErrorCode::kInvalidArgument, "rate must be a positive number of requests per minute");
  }
  if (!clock_) throw Error(ErrorCode::kInvalidArgument, "rate limiter needs a clock");
  interval_ = Nanos(static_cast<Nanos::rep>(std::ceil(60e9 / rate_per_minute)));
}

Nanos RateLimiter::acquire() {
  Nanos grant;
  {
    std::lock_guard lock(mu_);
    const Nanos now = clock_->now();
    grant = next_free_ ? std::max(now, *next_free_) : now;
    next_free_ = grant + interval_;
  }
  clock_->sleep_until(grant);
  return grant;
}

InFlightGate::InFlightGate(int max_in_flight) : limit_(max_in_flight) {
  if (max_in_flight < 1) throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be at least 1");
}

InFlightGate::Permit InFlightGate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
  return Permit(this);
}

int InFlightGate::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

void InFlightGate::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

}  // namespace gridprobe::providers
