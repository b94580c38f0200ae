#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/providers/roles.hpp"
#include "gridprobe/providers/transport.hpp"
#include "gridprobe/semantics/embedding.hpp"

namespace gridprobe::providers {

using TemplateVars = std::map<std::string, std::string>;

/// Parses the adapter body and substitutes {{name}} tokens inside string
/// values. Throws Error(kInvalidArgument) on a malformed template.
std::string render_request_body(const AdapterTemplate& adapter, const TemplateVars& vars);

/// Response body sorted into what a role needs.
struct ResponsePayload {
  std::optional<std::vector<std::uint8_t>> image;
  std::optional<std::string> text;
  std::optional<nlohmann::json> json;
};

/// image/* content or a PNG signature becomes an image; JSON is searched at
/// the adapter's image pointer (base64 or data URL), then its text pointer;
/// anything else is text.
ResponsePayload classify_response(const HttpResponse& response, const AdapterTemplate& adapter);

/// Common request plumbing: auth header, body rendering, status triage.
class HttpRoleBase {
 protected:
  HttpRoleBase(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock);

  /// Sends once. Throws TransportFault on connection trouble or a retryable status.
  HttpResponse send(const TemplateVars& vars) const;

  ProviderEndpoint endpoint_;
  std::shared_ptr<Transport> transport_;
  mutable EndpointClient client_;  // internally synchronized
};

class HttpGuidanceProvider final : public GuidanceProvider, private HttpRoleBase {
 public:
  HttpGuidanceProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock);
  std::string name() const override { return endpoint_.name; }
  /// 401/403 -> kProviderUnavailable; other 4xx or a text body ->
  /// kPolicyRejection carrying the text (never retried); bad image -> kDecode.
  imaging::RasterImage generate(const std::string& prompt) override;
};

class HttpTargetProvider final : public TargetProvider, private HttpRoleBase {
 public:
  HttpTargetProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock);
  std::string name() const override { return endpoint_.name; }
  /// Non-retryable 4xx bodies are the model's answer and come back as text.
  TargetResponse query(const TargetRequest& request) override;
};

class HttpJudgeProvider final : public JudgeProvider, private HttpRoleBase {
 public:
  HttpJudgeProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock);
  std::string name() const override { return endpoint_.name; }
  JudgeVerdict judge(const JudgeRequest& request) override;
};

/// Builds a unit embedding from raw values; throws Error(kInvalidArgument)
/// on NaN/Inf or a zero vector.
semantics::Embedding embedding_from_values(std::string id, std::string model_tag, std::vector<double> values);

/// External encoder service. The model tag comes from the response (falling
/// back to the adapter's `model`); when expected_dim is set, other sizes are
/// rejected with kDimensionMismatch.
class RemoteEmbedder final : public semantics::Embedder, private HttpRoleBase {
 public:
  RemoteEmbedder(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock,
                 std::optional<std::size_t> expected_dim = std::nullopt);
  std::string model_tag() const override;
  semantics::Embedding embed(const imaging::RasterImage& img, std::string_view id) const override;

 private:
  std::optional<std::size_t> expected_dim_;
  mutable std::mutex mu_;
  mutable std::string seen_tag_;
};

}  // namespace gridprobe::providers
