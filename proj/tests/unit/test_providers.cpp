#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gridprobe/common/digest.hpp"
#include "gridprobe/common/error.hpp"
#include "gridprobe/imaging/png_io.hpp"
#include "gridprobe/providers/adapters.hpp"
#include "gridprobe/providers/clock.hpp"
#include "gridprobe/providers/endpoint.hpp"
#include "gridprobe/providers/judging.hpp"
#include "gridprobe/providers/mock.hpp"
#include "gridprobe/providers/rate_limiter.hpp"
#include "gridprobe/providers/transport.hpp"
#include "local_server.hpp"
#include "test_support.hpp"

namespace gridprobe::providers {
namespace {

using namespace std::chrono_literals;

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gridprobe::Error thrown";
  return ErrorCode::kIo;
}

ProviderEndpoint http_endpoint(std::string name, std::string url = "http://127.0.0.1:9") {
  ProviderEndpoint e;
  e.name = std::move(name);
  e.kind = "http";
  e.base_url = std::move(url);
  e.rate_per_minute = 60000;
  e.timeout_s = 5;
  e.retry = {3, 100};
  return e;
}

/// Replays canned responses and records every request.
class FakeTransport final : public Transport {
 public:
  explicit FakeTransport(std::deque<HttpResponse> replies) : replies_(std::move(replies)) {}
  HttpResponse post(const HttpRequest& request) override {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    if (replies_.empty()) throw TransportFault("connection refused");
    auto r = replies_.front();
    if (replies_.size() > 1) replies_.pop_front();
    return r;
  }
  std::vector<HttpRequest> requests;

 private:
  std::mutex mu_;
  std::deque<HttpResponse> replies_;
};

std::string png_body() {
  const auto bytes = imaging::encode_png(imaging::RasterImage::filled(6, 6, 10, 20, 30));
  return {bytes.begin(), bytes.end()};
}

TargetRequest target_request() {
  return {"case-1", imaging::RasterImage::filled(6, 6, 1, 1, 1), "describe the tiles", 1};
}

TEST(ManualClock, SleepsAdvanceTime) {
  ManualClock clock;
  EXPECT_EQ(clock.now(), 0ns);
  clock.sleep_for(5ms);
  clock.advance(1s);
  clock.sleep_until(10ms);  // in the past: no change
  EXPECT_EQ(clock.now(), 1005ms);
  ASSERT_EQ(clock.sleeps().size(), 2u);
  EXPECT_EQ(clock.sleeps()[0], 5ms);
}

TEST(RateLimiter, SpacesGrantsByInterval) {
  auto clock = std::make_shared<ManualClock>();
  RateLimiter limiter(60, clock);
  EXPECT_EQ(limiter.interval(), 1s);
  EXPECT_EQ(limiter.acquire(), 0s);
  EXPECT_EQ(limiter.acquire(), 1s);
  EXPECT_EQ(limiter.acquire(), 2s);
  clock->advance(10s);
  EXPECT_EQ(limiter.acquire(), 12s);  // idle time does not bank tokens
  EXPECT_EQ(limiter.acquire(), 13s);
  EXPECT_EQ(RateLimiter(7, clock).interval(), Nanos(8571428572));  // rounded up
  EXPECT_EQ(code_of([&] { RateLimiter(0, clock); }), ErrorCode::kInvalidArgument);
}

TEST(InFlightGate, BoundsConcurrency) {
  InFlightGate gate(3);
  std::atomic<int> peak{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        auto permit = gate.acquire();
        const int now = gate.in_flight();
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::yield();
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 3);
  EXPECT_GE(peak.load(), 1);
  EXPECT_EQ(gate.in_flight(), 0);
  EXPECT_EQ(code_of([] { InFlightGate(0); }), ErrorCode::kInvalidArgument);
}

TEST(EndpointClient, RetriesTransportFaultsWithExponentialBackoff) {
  auto clock = std::make_shared<ManualClock>();
  auto e = http_endpoint("svc");
  e.retry = {4, 100};
  EndpointClient client(e, clock);
  EXPECT_EQ(client.backoff(1), 100ms);
  EXPECT_EQ(client.backoff(3), 400ms);

  int calls = 0;
  const int v = client.call([&] {
    if (++calls < 3) throw TransportFault("flaky");
    return 7;
  });
  EXPECT_EQ(v, 7);
  EXPECT_EQ(client.attempts(), 3u);
  const auto sleeps = clock->sleeps();
  EXPECT_NE(std::find(sleeps.begin(), sleeps.end(), 100ms), sleeps.end());
  EXPECT_NE(std::find(sleeps.begin(), sleeps.end(), 200ms), sleeps.end());
}

TEST(EndpointClient, GivesUpAfterMaxAttemptsAndPassesOtherErrorsThrough) {
  auto clock = std::make_shared<ManualClock>();
  EndpointClient client(http_endpoint("svc"), clock);
  int calls = 0;
  EXPECT_EQ(code_of([&] { client.call([&]() -> int { ++calls; throw TransportFault("down"); }); }),
            ErrorCode::kTransport);
  EXPECT_EQ(calls, 3);
  calls = 0;
  EXPECT_EQ(code_of([&] {
              client.call([&]() -> int {
                ++calls;
                throw Error(ErrorCode::kDecode, "bad");
              });
            }),
            ErrorCode::kDecode);
  EXPECT_EQ(calls, 1);
}

TEST(Endpoint, ValidationAndDescribeOmitCredentials) {
  auto e = http_endpoint("svc");
  e.auth_env = "SOME_TOKEN_VAR";
  const auto d = e.describe().dump();
  EXPECT_EQ(d.find("SOME_TOKEN_VAR"), std::string::npos);
  EXPECT_NE(d.find("127.0.0.1"), std::string::npos);
  e.max_in_flight = 0;
  EXPECT_EQ(code_of([&] { e.validate(); }), ErrorCode::kInvalidArgument);
  auto m = http_endpoint("svc");
  m.base_url.clear();
  EXPECT_EQ(code_of([&] { m.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Secrets, ResolveRegistersAndScrubs) {
  auto e = http_endpoint("svc");
  e.auth_env = "GRIDPROBE_TEST_UNSET_VAR";
  ::unsetenv("GRIDPROBE_TEST_UNSET_VAR");
  EXPECT_EQ(code_of([&] { resolve_secret(e); }), ErrorCode::kProviderUnavailable);
  ::setenv("GRIDPROBE_TEST_SCRUB_VAR", "tok-123456789", 1);
  e.auth_env = "GRIDPROBE_TEST_SCRUB_VAR";
  EXPECT_EQ(resolve_secret(e), "tok-123456789");
  EXPECT_EQ(scrub_secrets("Bearer tok-123456789 and tok-123456789"), "Bearer *** and ***");
  e.auth_env.clear();
  EXPECT_EQ(resolve_secret(e), "");
}

TEST(Adapters, RenderEscapesInputs) {
  AdapterTemplate a;
  a.request_body = R"({"model": "{{model}}", "input": [{"text": "{{prompt}}"}], "n": 1})";
  a.model = "m-1";
  const auto body = nlohmann::json::parse(render_request_body(a, {{"prompt", "say \"hi\"\n{{model}}"}}));
  EXPECT_EQ(body["model"], "m-1");
  EXPECT_EQ(body["input"][0]["text"], "say \"hi\"\n{{model}}");
  EXPECT_EQ(body["n"], 1);
  a.request_body = "{not json";
  EXPECT_EQ(code_of([&] { render_request_body(a, {}); }), ErrorCode::kInvalidArgument);
}

TEST(Adapters, ClassifyResponse) {
  AdapterTemplate a;
  const auto png = png_body();
  EXPECT_TRUE(classify_response({200, png, "application/octet-stream"}, a).image);
  const std::string b64 = base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(png.data()), png.size()));
  auto r = classify_response({200, R"({"image": "data:image/png;base64,)" + b64 + R"("})", "application/json"}, a);
  ASSERT_TRUE(r.image);
  EXPECT_EQ(std::string(r.image->begin(), r.image->end()), png);
  r = classify_response({200, R"({"text": "no can do"})", "application/json"}, a);
  EXPECT_EQ(r.text, "no can do");
  r = classify_response({200, "plain words", "text/plain"}, a);
  EXPECT_EQ(r.text, "plain words");
  EXPECT_EQ(code_of([&] { classify_response({200, R"({"image": "%%%"})", "application/json"}, a); }),
            ErrorCode::kDecode);
}

TEST(HttpTarget, TextOnClientErrorAndTransportErrorWhenExhausted) {
  auto clock = std::make_shared<ManualClock>();
  auto refusal = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{400, "content policy", "text/plain"}});
  HttpTargetProvider target(http_endpoint("tgt"), refusal, clock);
  auto r = target.query(target_request());
  EXPECT_EQ(r.kind, TargetResponse::Kind::kText);
  EXPECT_EQ(r.text, "content policy");

  auto down = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{503, "", ""}});
  HttpTargetProvider flaky(http_endpoint("tgt"), down, clock);
  r = flaky.query(target_request());
  EXPECT_EQ(r.kind, TargetResponse::Kind::kTransportError);
  EXPECT_EQ(down->requests.size(), 3u);

  auto denied = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{401, "", ""}});
  HttpTargetProvider unauthorized(http_endpoint("tgt"), denied, clock);
  EXPECT_EQ(unauthorized.query(target_request()).kind, TargetResponse::Kind::kTransportError);
  EXPECT_EQ(denied->requests.size(), 1u);
}

TEST(HttpGuidance, ErrorMapping) {
  auto clock = std::make_shared<ManualClock>();
  auto ok = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{200, png_body(), "image/png"}});
  HttpGuidanceProvider g(http_endpoint("gen"), ok, clock);
  EXPECT_EQ(g.generate("a hill").width(), 6);
  const auto body = nlohmann::json::parse(ok->requests.at(0).body);
  EXPECT_EQ(body["prompt"], "a hill");

  auto text = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{200, R"({"text": "no"})", "application/json"}});
  HttpGuidanceProvider refusing(http_endpoint("gen"), text, clock);
  EXPECT_EQ(code_of([&] { refusing.generate("x"); }), ErrorCode::kPolicyRejection);

  auto forbidden = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{403, "", ""}});
  HttpGuidanceProvider blocked(http_endpoint("gen"), forbidden, clock);
  EXPECT_EQ(code_of([&] { blocked.generate("x"); }), ErrorCode::kProviderUnavailable);

  auto junk = std::make_shared<FakeTransport>(std::deque<HttpResponse>{{200, "\x89PNG\r\n\x1a\nzzz", "image/png"}});
  HttpGuidanceProvider broken(http_endpoint("gen"), junk, clock);
  EXPECT_EQ(code_of([&] { broken.generate("x"); }), ErrorCode::kDecode);
}

TEST(HttpJudge, ParsesVerdicts) {
  auto clock = std::make_shared<ManualClock>();
  auto t = std::make_shared<FakeTransport>(
      std::deque<HttpResponse>{{200, R"({"text": "Prohibited. It shows the scene."})", "application/json"}});
  HttpJudgeProvider judge(http_endpoint("j"), t, clock);
  const auto out = TargetResponse::image_payload({1, 2, 3});
  const auto v = judge.judge({"c", 1, &out, "judge <image>"});
  EXPECT_EQ(v.verdict, Verdict::kProhibited);
  EXPECT_EQ(v.rationale, "It shows the scene.");
  EXPECT_EQ(v.judge_name, "j");
  EXPECT_EQ(code_of([&] { parse_judge_answer("j", "maybe?"); }), ErrorCode::kDecode);
  EXPECT_EQ(parse_judge_answer("j", "  benign: fine").verdict, Verdict::kBenign);
}

TEST(RemoteEmbedder, ReadsVectorAndChecksDimension) {
  auto clock = std::make_shared<ManualClock>();
  auto t = std::make_shared<FakeTransport>(
      std::deque<HttpResponse>{{200, R"({"embedding": [3, 4], "model": "enc-v2"})", "application/json"}});
  RemoteEmbedder embedder(http_endpoint("enc"), t, clock, 2);
  const auto e = embedder.embed(imaging::RasterImage::filled(2, 2, 0, 0, 0), "img");
  EXPECT_EQ(e.model_tag, "enc-v2");
  EXPECT_EQ(embedder.model_tag(), "enc-v2");
  EXPECT_DOUBLE_EQ(e.v[0], 0.6);
  RemoteEmbedder wrong_dim(http_endpoint("enc"), t, clock, 3);
  EXPECT_EQ(code_of([&] { wrong_dim.embed(imaging::RasterImage(2, 2), "img"); }), ErrorCode::kDimensionMismatch);
}

TEST(HttpTransport, RetriesOn503AndSendsAuthHeader) {
  ::setenv("GRIDPROBE_TEST_HTTP_TOKEN", "live-token-abcdef", 1);
  testing::LocalServer local;
  std::atomic<int> calls{0};
  std::string seen_auth;
  std::mutex mu;
  const std::string png = png_body();
  local.server().Post("/v1/generate", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(mu);
      seen_auth = req.get_header_value("Authorization");
    }
    if (++calls <= 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(png, "image/png");
  });
  local.start();

  auto e = http_endpoint("live", local.url() + "/v1");
  e.adapter.path = "/generate";
  e.auth_env = "GRIDPROBE_TEST_HTTP_TOKEN";
  auto clock = std::make_shared<ManualClock>();
  HttpTargetProvider target(e, std::make_shared<HttpTransport>(e.base_url, e.timeout_s), clock);
  const auto r = target.query(target_request());
  EXPECT_EQ(r.kind, TargetResponse::Kind::kImage);
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(seen_auth, "Bearer live-token-abcdef");
}

TEST(HttpTransport, ConnectionFailureIsTransportFault) {
  HttpTransport transport("http://127.0.0.1:1", 1.0);
  EXPECT_THROW(transport.post({"/", "{}", "application/json", {}}), TransportFault);
  EXPECT_TRUE(is_retryable_status(429));
  EXPECT_TRUE(is_retryable_status(502));
  EXPECT_FALSE(is_retryable_status(404));
}

TEST(Scenario, ParsesFormatsAndWildcards) {
  const auto s = Scenario::parse(
      "# comment\n"
      "c1 1 image:out.png\n"
      "c1 2 text:\"no \\\"thanks\\\"\"\n"
      "c1 * error\n"
      "* * text:\"fallback\"\n",
      Scenario::Format::kTarget);
  EXPECT_EQ(s.find("c1", 1)->at(0).kind, ScriptedReply::Kind::kImage);
  EXPECT_EQ(s.find("c1", 2)->at(0).value, "no \"thanks\"");
  EXPECT_EQ(s.find("c1", 9)->at(0).kind, ScriptedReply::Kind::kError);
  EXPECT_EQ(s.find("other", 1)->at(0).value, "fallback");

  EXPECT_EQ(code_of([] { Scenario::parse("c1 0 error\n", Scenario::Format::kTarget); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { Scenario::parse("c1 1 maybe\n", Scenario::Format::kJudge); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { Scenario::parse("c1 1 video:x\n", Scenario::Format::kTarget); }), ErrorCode::kParse);
  EXPECT_EQ(Scenario::parse("", Scenario::Format::kJudge).find("c", 1), nullptr);
}

TEST(ScriptedTarget, SequencesPerAttemptAndRetries) {
  testing::TempDir dir;
  imaging::save_png(imaging::RasterImage::filled(4, 4, 9, 9, 9), (dir / "o.png").string());
  ProviderEndpoint e;
  e.name = "tgt";
  e.kind = "mock";
  e.fixtures_dir = dir.str();
  e.rate_per_minute = 60000;
  e.retry = {2, 5};
  auto clock = std::make_shared<ManualClock>();
  ScriptedTargetProvider target(
      e, Scenario::parse("c 1 error\nc 1 image:o.png\nc 2 error\n", Scenario::Format::kTarget), clock);
  auto req = target_request();
  req.case_id = "c";
  EXPECT_EQ(target.query(req).kind, TargetResponse::Kind::kImage);
  req.trial_index = 2;
  EXPECT_EQ(target.query(req).kind, TargetResponse::Kind::kTransportError);
  req.trial_index = 3;
  EXPECT_EQ(target.query(req).kind, TargetResponse::Kind::kTransportError);  // unscripted
}

class FailingJudge final : public JudgeProvider {
 public:
  std::string name() const override { return "flaky"; }
  JudgeVerdict judge(const JudgeRequest&) override { throw Error(ErrorCode::kTransport, "judge down"); }
};

class FixedJudge final : public JudgeProvider {
 public:
  explicit FixedJudge(Verdict v) : v_(v) {}
  std::string name() const override { return "fixed"; }
  JudgeVerdict judge(const JudgeRequest& r) override {
    EXPECT_NE(r.instruction.find("<image>"), std::string::npos);
    return {"fixed", v_, "ok"};
  }

 private:
  Verdict v_;
};

TEST(JudgeOutput, DegradesAndShortCircuits) {
  std::vector<std::shared_ptr<JudgeProvider>> judges = {std::make_shared<FixedJudge>(Verdict::kProhibited),
                                                        std::make_shared<FailingJudge>()};
  const JudgingTemplate tmpl;
  auto out = judge_output(TargetResponse::image_payload({1}), judges, tmpl, "c", 1);
  EXPECT_TRUE(out.judges_called);
  ASSERT_EQ(out.verdicts.size(), 1u);
  ASSERT_EQ(out.missing.size(), 1u);
  EXPECT_EQ(out.missing[0], "flaky: judge down");

  out = judge_output(TargetResponse::text_payload("no"), judges, tmpl, "c", 1);
  EXPECT_FALSE(out.judges_called);
  ASSERT_EQ(out.verdicts.size(), 1u);
  EXPECT_EQ(out.verdicts[0].judge_name, kRefusalRuleJudge);
  EXPECT_EQ(out.verdicts[0].verdict, Verdict::kRefusal);

  out = judge_output(TargetResponse::transport_error("x"), judges, tmpl, "c", 1);
  EXPECT_TRUE(out.verdicts.empty());
  EXPECT_FALSE(out.judges_called);

  EXPECT_EQ(code_of([&] { judge_output(TargetResponse::text_payload("no"), {}, tmpl, "c", 1); }),
            ErrorCode::kInvalidArgument);
  JudgingTemplate bad{"no placeholder"};
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::kMissingPlaceholder);
}

TEST(MockGuidance, UnknownPromptIsPolicyRejection) {
  ProviderEndpoint e;
  e.name = "gen";
  e.kind = "mock";
  e.fixtures_dir = (testing::demo_dir() / "guidance").string();
  e.fixtures = {{"a tree", "tree.png"}};
  e.rate_per_minute = 60000;
  MockGuidanceProvider g(e, std::make_shared<ManualClock>());
  EXPECT_EQ(g.generate("a tree").width(), 96);
  EXPECT_EQ(code_of([&] { g.generate("something else"); }), ErrorCode::kPolicyRejection);
}

}  // namespace
}  // namespace gridprobe::providers
