#include "gridprobe/providers/endpoint.hpp"

#include <cstdlib>
#include <mutex>
#include <set>

namespace gridprobe::providers {

namespace {

std::mutex& secrets_mutex() {
  static std::mutex mu;
  return mu;
}

std::set<std::string>& secrets() {
  static std::set<std::string> values;
  return values;
}

}  // namespace

void ProviderEndpoint::validate() const {
  auto fail = [&](const std::string& why) { return Error(ErrorCode::kInvalidArgument, "endpoint '" + name + "': " + why); };
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "endpoint without a name");
  if (kind != "http" && kind != "mock") throw fail("kind must be \"http\" or \"mock\"");
  if (kind == "http" && base_url.empty()) throw fail("http endpoints need base_url");
  if (max_in_flight < 1) throw fail("max_in_flight must be >= 1");
  if (!(rate_per_minute > 0.0)) throw fail("rate must be > 0 requests/minute");
  if (retry.max_attempts < 1) throw fail("retry.max_attempts must be >= 1");
  if (retry.backoff_base_ms < 0) throw fail("retry.backoff_base_ms must be >= 0");
  if (!(timeout_s > 0.0)) throw fail("timeout must be > 0 seconds");
}

nlohmann::json ProviderEndpoint::describe() const {
  nlohmann::json j{{"name", name},
                   {"kind", kind},
                   {"max_in_flight", max_in_flight},
                   {"rate_per_minute", rate_per_minute},
                   {"retry", {{"max_attempts", retry.max_attempts}, {"backoff_base_ms", retry.backoff_base_ms}}}};
  if (kind == "http") j["base_url"] = base_url;
  return j;
}

void register_secret(const std::string& value) {
  if (value.empty()) return;
  std::lock_guard lock(secrets_mutex());
  secrets().insert(value);
}

std::string scrub_secrets(std::string text) {
  std::lock_guard lock(secrets_mutex());
  for (const auto& secret : secrets()) {
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + 3)) {
      text.replace(pos, secret.size(), "***");
    }
  }
  return text;
}

std::string resolve_secret(const ProviderEndpoint& endpoint) {
  if (endpoint.auth_env.empty()) return {};
  const char* value = std::getenv(endpoint.auth_env.c_str());
  if (!value || !*value) {
    throw Error(ErrorCode::kProviderUnavailable,
                "endpoint '" + endpoint.name + "': environment variable " + endpoint.auth_env + " is not set");
  }
  register_secret(value);
  return value;
}

EndpointClient::EndpointClient(const ProviderEndpoint& endpoint, std::shared_ptr<Clock> clock)
    : name_(endpoint.name),
      retry_(endpoint.retry),
      clock_(std::move(clock)),
      gate_(endpoint.max_in_flight),
      limiter_(endpoint.rate_per_minute, clock_) {
  endpoint.validate();
}

Nanos EndpointClient::backoff(int failed_attempt) const {
  const int shift = std::min(failed_attempt - 1, 20);
  return std::chrono::milliseconds(static_cast<std::int64_t>(retry_.backoff_base_ms) << shift);
}

}  // namespace gridprobe::providers
