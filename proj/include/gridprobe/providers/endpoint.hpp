#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "gridprobe/common/error.hpp"
#include "gridprobe/providers/clock.hpp"
#include "gridprobe/providers/rate_limiter.hpp"

namespace gridprobe::providers {

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_base_ms = 500;
};

/// How an endpoint's JSON request and response map onto our schema.
/// String values in `request_body` may contain {{prompt}}, {{instruction}},
/// {{image_b64}}, {{image_data_url}} and {{model}}; they are substituted
/// inside the parsed JSON, so inputs are always escaped. Response fields are
/// JSON pointers; an empty pointer means "not provided".
struct AdapterTemplate {
  std::string path = "/";
  std::string request_body = R"({"prompt": "{{prompt}}", "image": "{{image_b64}}"})";
  std::string model;
  std::string image_pointer = "/image";
  std::string text_pointer = "/text";
  std::string vector_pointer = "/embedding";
  std::string model_tag_pointer = "/model";
  std::string id_pointer = "/id";
};

/// One external service. Secrets are referenced by environment-variable name
/// and resolved only when a request is built.
struct ProviderEndpoint {
  std::string name;
  std::string kind = "http";  // "http" or "mock"
  std::string base_url;
  std::string auth_env;
  std::string auth_header = "Authorization";
  double timeout_s = 60.0;
  int max_in_flight = 1;
  double rate_per_minute = 60.0;
  RetryPolicy retry;
  AdapterTemplate adapter;

  // mock kind
  std::string fixtures_dir;
  std::string scenario_path;
  std::map<std::string, std::string> fixtures;  // guidance prompt -> image path

  /// Throws Error(kInvalidArgument) on out-of-range settings.
  void validate() const;
  /// Describes the endpoint for manifests: name, kind, URL and limits. Never
  /// includes credentials.
  nlohmann::json describe() const;
};

/// Retryable failure: connection problems, timeouts, 408/429/5xx.
class TransportFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process-wide registry of secret values resolved from the environment.
/// scrub() masks every registered value in a string.
void register_secret(const std::string& value);
std::string scrub_secrets(std::string text);

/// Resolves the auth variable; empty when the endpoint has none. Throws
/// Error(kProviderUnavailable) if the variable is named but unset.
std::string resolve_secret(const ProviderEndpoint& endpoint);

/// Shared per-endpoint gate: bounds concurrency, spaces requests and retries
/// transport faults with exponential backoff (base * 2^(attempt-1)). Any other
/// exception passes through on the first attempt.
class EndpointClient {
 public:
  EndpointClient(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock);

  const std::string& name() const noexcept { return name_; }
  Clock& clock() noexcept { return *clock_; }
  std::uint64_t attempts() const noexcept { return attempts_.load(); }

  template <class Attempt>
  std::invoke_result_t<Attempt&> call(Attempt&& attempt) {
    std::string last_fault;
    for (int n = 1; n <= retry_.max_attempts; ++n) {
      {
        auto permit = gate_.acquire();
        limiter_.acquire();
        attempts_.fetch_add(1);
        try {
          return attempt();
        } catch (const TransportFault& fault) {
          last_fault = fault.what();
        }
      }
      if (n < retry_.max_attempts) clock_->sleep_for(backoff(n));
    }
    throw Error(ErrorCode::kTransport, scrub_secrets(name_ + ": " + last_fault + " (gave up after " +
                                                     std::to_string(retry_.max_attempts) + " attempts)"));
  }

  Nanos backoff(int failed_attempt) const;

 private:
  std::string name_;
  RetryPolicy retry_;
  std::shared_ptr<Clock> clock_;
  InFlightGate gate_;
  RateLimiter limiter_;
  std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace gridprobe::providers
