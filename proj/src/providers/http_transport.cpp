#include <httplib.h>

#include "gridprobe/common/error.hpp"
#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/providers/transport.hpp"

namespace gridprobe::providers {

namespace {

// Splits "scheme://host[:port][/prefix]" into the client origin and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

}  // namespace

// A fresh client per request keeps concurrent posts independent; the
// endpoint gate already bounds how many exist at once.
struct HttpTransport::Impl {
  std::string origin;
  std::string prefix;
  time_t timeout_sec = 0;
  time_t timeout_usec = 0;
};

HttpTransport::HttpTransport(std::string base_url, double timeout_s) : impl_(std::make_unique<Impl>()) {
  auto [origin, prefix] = split_base_url(base_url);
  impl_->origin = std::move(origin);
  impl_->prefix = std::move(prefix);
  impl_->timeout_sec = static_cast<time_t>(timeout_s);
  impl_->timeout_usec = static_cast<time_t>((timeout_s - static_cast<double>(impl_->timeout_sec)) * 1e6);
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::post(const HttpRequest& request) {
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  const std::string path = impl_->prefix + (request.path.empty() ? "/" : request.path);

  httplib::Client client(impl_->origin);
  client.set_connection_timeout(impl_->timeout_sec, impl_->timeout_usec);
  client.set_read_timeout(impl_->timeout_sec, impl_->timeout_usec);
  client.set_write_timeout(impl_->timeout_sec, impl_->timeout_usec);
  auto result = client.Post(path, headers, request.body, request.content_type);
  if (!result) throw TransportFault("HTTP " + httplib::to_string(result.error()));
  HttpResponse out;
  out.status = result->status;
  out.body = result->body;
  out.content_type = result->get_header_value("Content-Type");
  return out;
}

bool is_retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace gridprobe::providers
