#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gridprobe::providers {

struct HttpRequest {
  std::string path;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

/// One POST round-trip. Connection failures and timeouts throw TransportFault;
/// any HTTP status is returned to the caller for classification.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib client bound to a base URL such as "http://host:8080/v1".
class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_s);
  ~HttpTransport() override;
  HttpResponse post(const HttpRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Status codes that warrant a retry: 408, 429 and 5xx.
bool is_retryable_status(int status);

}  // namespace gridprobe::providers
