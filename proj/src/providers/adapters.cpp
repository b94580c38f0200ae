#include "gridprobe/providers/adapters.hpp"

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/providers/judging.hpp"

namespace gridprobe::providers {

using nlohmann::json;

namespace {

void substitute_strings(json& node, const TemplateVars& vars) {
  if (node.is_string()) {
    auto text = node.get<std::string>();
    for (const auto& [key, value] : vars) {
      const std::string token = "{{" + key + "}}";
      for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
        text.replace(pos, token.size(), value);
      }
    }
    node = std::move(text);
  } else if (node.is_structured()) {
    for (auto& child : node) substitute_strings(child, vars);
  }
}

std::optional<json> lookup(const json& doc, const std::string& pointer) {
  if (pointer.empty()) return std::nullopt;
  try {
    const json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) return std::nullopt;
    return doc.at(ptr);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::vector<std::uint8_t> as_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string snippet(const std::string& text) { return text.size() > 200 ? text.substr(0, 200) + "..." : text; }

}  // namespace

std::string render_request_body(const AdapterTemplate& adapter, const TemplateVars& vars) {
  json body;
  try {
    body = json::parse(adapter.request_body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("adapter request_body is not JSON: ") + e.what());
  }
  TemplateVars all = vars;
  all.emplace("model", adapter.model);
  substitute_strings(body, all);
  return body.dump();
}

ResponsePayload classify_response(const HttpResponse& response, const AdapterTemplate& adapter) {
  ResponsePayload out;
  const auto bytes = as_bytes(response.body);
  if (starts_with(response.content_type, "image/") || imaging::looks_like_png(bytes)) {
    out.image = bytes;
    return out;
  }
  json doc = json::parse(response.body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    out.text = response.body;
    return out;
  }
  if (auto image = lookup(doc, adapter.image_pointer); image && image->is_string()) {
    auto encoded = image->get<std::string>();
    if (starts_with(encoded, "data:")) {
      const auto comma = encoded.find(',');
      encoded = comma == std::string::npos ? std::string() : encoded.substr(comma + 1);
    }
    out.image = base64_decode(encoded);
  } else if (auto text = lookup(doc, adapter.text_pointer); text && text->is_string()) {
    out.text = text->get<std::string>();
  } else {
    out.text = response.body;
  }
  out.json = std::move(doc);
  return out;
}

HttpRoleBase::HttpRoleBase(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport,
                           std::shared_ptr<Clock> clock)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), client_(endpoint_, std::move(clock)) {
  if (!transport_) throw Error(ErrorCode::kProviderUnavailable, "endpoint '" + endpoint_.name + "' has no transport");
}

HttpResponse HttpRoleBase::send(const TemplateVars& vars) const {
  HttpRequest request;
  request.path = endpoint_.adapter.path;
  request.body = render_request_body(endpoint_.adapter, vars);
  if (const std::string secret = resolve_secret(endpoint_); !secret.empty()) {
    request.headers.emplace_back(endpoint_.auth_header, "Bearer " + secret);
  }
  HttpResponse response = transport_->post(request);
  if (is_retryable_status(response.status)) {
    throw TransportFault("HTTP status " + std::to_string(response.status));
  }
  return response;
}

HttpGuidanceProvider::HttpGuidanceProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport,
                                           std::shared_ptr<Clock> clock)
    : HttpRoleBase(std::move(endpoint), std::move(transport), std::move(clock)) {}

imaging::RasterImage HttpGuidanceProvider::generate(const std::string& prompt) {
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "guidance prompt is empty");
  const HttpResponse response = client_.call([&] { return send({{"prompt", prompt}}); });
  if (response.status == 401 || response.status == 403) {
    throw Error(ErrorCode::kProviderUnavailable, endpoint_.name + ": HTTP " + std::to_string(response.status));
  }
  if (response.status >= 400) {
    throw Error(ErrorCode::kPolicyRejection, endpoint_.name + " refused: " + snippet(response.body));
  }
  const ResponsePayload payload = classify_response(response, endpoint_.adapter);
  if (!payload.image) {
    throw Error(ErrorCode::kPolicyRejection, endpoint_.name + " returned text: " + snippet(payload.text.value_or("")));
  }
  return imaging::decode_png(*payload.image);
}

HttpTargetProvider::HttpTargetProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport,
                                       std::shared_ptr<Clock> clock)
    : HttpRoleBase(std::move(endpoint), std::move(transport), std::move(clock)) {}

TargetResponse HttpTargetProvider::query(const TargetRequest& request) {
  request.validate();
  const std::string b64 = base64_encode(imaging::encode_png(request.image));
  const TemplateVars vars{{"prompt", request.prompt_text},
                          {"image_b64", b64},
                          {"image_data_url", "data:image/png;base64," + b64}};
  const Nanos start = client_.clock().now();
  HttpResponse response;
  try {
    response = client_.call([&] { return send(vars); });
  } catch (const Error& e) {
    return TargetResponse::transport_error(scrub_secrets(e.what()));
  }
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(client_.clock().now() - start).count();

  if (response.status == 401 || response.status == 403) {
    auto r = TargetResponse::transport_error(endpoint_.name + ": HTTP " + std::to_string(response.status));
    r.latency_ms = latency;
    return r;
  }
  TargetResponse out;
  if (response.status >= 400) {
    out = TargetResponse::text_payload(response.body);
  } else {
    ResponsePayload payload;
    try {
      payload = classify_response(response, endpoint_.adapter);
    } catch (const Error& e) {
      auto r = TargetResponse::transport_error(endpoint_.name + ": " + e.what());
      r.latency_ms = latency;
      return r;
    }
    out = payload.image ? TargetResponse::image_payload(std::move(*payload.image))
                        : TargetResponse::text_payload(payload.text.value_or(""));
    if (payload.json) {
      if (auto id = lookup(*payload.json, endpoint_.adapter.id_pointer); id && id->is_string()) {
        out.raw_ref = id->get<std::string>();
      }
    }
  }
  if (out.raw_ref.empty()) out.raw_ref = endpoint_.name + ":http-" + std::to_string(response.status);
  out.latency_ms = latency;
  return out;
}

HttpJudgeProvider::HttpJudgeProvider(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport,
                                     std::shared_ptr<Clock> clock)
    : HttpRoleBase(std::move(endpoint), std::move(transport), std::move(clock)) {}

JudgeVerdict HttpJudgeProvider::judge(const JudgeRequest& request) {
  if (!request.response || request.response->kind != TargetResponse::Kind::kImage) {
    throw Error(ErrorCode::kInvalidArgument, "judges only review image outputs");
  }
  const std::string b64 = base64_encode(request.response->image);
  const TemplateVars vars{{"instruction", request.instruction},
                          {"prompt", request.instruction},
                          {"image_b64", b64},
                          {"image_data_url", "data:image/png;base64," + b64}};
  const HttpResponse response = client_.call([&] { return send(vars); });
  if (response.status >= 400) {
    throw Error(ErrorCode::kTransport, endpoint_.name + ": HTTP " + std::to_string(response.status));
  }
  const ResponsePayload payload = classify_response(response, endpoint_.adapter);
  if (!payload.text) throw Error(ErrorCode::kDecode, endpoint_.name + ": judge answered without text");
  return parse_judge_answer(endpoint_.name, *payload.text);
}

semantics::Embedding embedding_from_values(std::string id, std::string model_tag, std::vector<double> values) {
  return semantics::normalized(semantics::Embedding{std::move(id), std::move(model_tag), std::move(values)});
}

RemoteEmbedder::RemoteEmbedder(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport,
                               std::shared_ptr<Clock> clock, std::optional<std::size_t> expected_dim)
    : HttpRoleBase(std::move(endpoint), std::move(transport), std::move(clock)), expected_dim_(expected_dim) {}

std::string RemoteEmbedder::model_tag() const {
  std::lock_guard lock(mu_);
  if (!seen_tag_.empty()) return seen_tag_;
  return endpoint_.adapter.model.empty() ? endpoint_.name : endpoint_.adapter.model;
}

semantics::Embedding RemoteEmbedder::embed(const imaging::RasterImage& img, std::string_view id) const {
  const std::string b64 = base64_encode(imaging::encode_png(img));
  const TemplateVars vars{{"image_b64", b64}, {"image_data_url", "data:image/png;base64," + b64}};
  const HttpResponse response = client_.call([&] { return send(vars); });
  if (response.status >= 400) {
    throw Error(ErrorCode::kTransport, endpoint_.name + ": HTTP " + std::to_string(response.status));
  }
  const json doc = json::parse(response.body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kDecode, endpoint_.name + ": embedding response is not JSON");
  const auto vec = lookup(doc, endpoint_.adapter.vector_pointer);
  if (!vec || !vec->is_array()) throw Error(ErrorCode::kDecode, endpoint_.name + ": response has no vector");
  std::vector<double> values;
  values.reserve(vec->size());
  for (const auto& x : *vec) {
    if (!x.is_number()) {
      throw Error(ErrorCode::kInvalidArgument, endpoint_.name + ": embedding contains a non-finite component");
    }
    values.push_back(x.get<double>());
  }
  if (expected_dim_ && values.size() != *expected_dim_) {
    throw Error(ErrorCode::kDimensionMismatch, endpoint_.name + ": embedding has dim " + std::to_string(values.size()) +
                                                   ", store dim is " + std::to_string(*expected_dim_));
  }
  std::string tag;
  if (auto t = lookup(doc, endpoint_.adapter.model_tag_pointer); t && t->is_string()) tag = t->get<std::string>();
  if (tag.empty()) tag = model_tag();
  {
    std::lock_guard lock(mu_);
    if (seen_tag_.empty()) seen_tag_ = tag;
  }
  return embedding_from_values(std::string(id), tag, std::move(values));
}

}  // namespace gridprobe::providers
