#include "gridprobe/providers/clock.hpp"

#include <algorithm>
#include <thread>

namespace gridprobe::providers {

Nanos SteadyClock::now() const {
  return std::chrono::duration_cast<Nanos>(std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::sleep_until(Nanos deadline) {
  const Nanos remaining = deadline - now();
  if (remaining > Nanos::zero()) std::this_thread::sleep_for(remaining);
}

Nanos ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void ManualClock::sleep_until(Nanos deadline) {
  std::lock_guard lock(mu_);
  sleeps_.push_back(std::max(deadline - now_, Nanos::zero()));
  now_ = std::max(now_, deadline);
}

void ManualClock::advance(Nanos d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

std::vector<Nanos> ManualClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

}  // namespace gridprobe::providers
