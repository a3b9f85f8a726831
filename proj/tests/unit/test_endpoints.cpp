// Exercises the HTTP clients against an in-process fake server speaking the
// same JSON protocol as the model service.

#include <atomic>
#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "fetch/common.hpp"
#include "fetch/endpoints.hpp"

using namespace fetch;
using nlohmann::json;

namespace {

class FakeServer {
 public:
  FakeServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  EndpointConfig config(const std::string& prefix = "") const {
    EndpointConfig c;
    c.url = "http://127.0.0.1:" + std::to_string(port_) + prefix;
    c.timeout_s = 5;
    c.max_retries = 3;
    c.backoff_s = 0.01;
    c.batch_size = 2;
    return c;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

void reply(httplib::Response& res, const json& j) { res.set_content(j.dump(), "application/json"); }

}  // namespace

TEST_CASE("embeddings protocol with batching") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    auto body = json::parse(req.body);
    json vecs = json::array();
    for (const auto& t : body["texts"]) {
      float len = static_cast<float>(t.get<std::string>().size());
      vecs.push_back({len, 1.0f, 0.0f});
    }
    reply(res, {{"vectors", vecs}, {"dim", 3}});
  });
  HttpEmbeddingProvider p(fake.config(), 3);
  auto v = p.embed({"a", "bb", "ccc", "dddd", "eeeee"});
  REQUIRE(v.size() == 5);
  CHECK(v[2] == std::vector<float>{3, 1, 0});
  CHECK(calls.load() == 3);

  HttpEmbeddingProvider wrong(fake.config(), 4);
  CHECK_THROWS_AS(wrong.embed({"x"}), Error);
}

TEST_CASE("path prefix is kept") {
  FakeServer fake;
  fake.server().Post("/svc/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    CHECK(body["max_tokens"] == 7);
    CHECK(body["temperature"] == 0.0);
    reply(res, {{"text", "echo: " + body["prompt"].get<std::string>()}});
  });
  HttpChat chat(fake.config("/svc"));
  ChatRequest r;
  r.prompt = "hello";
  r.max_tokens = 7;
  CHECK(chat.complete(r) == "echo: hello");
}

TEST_CASE("fill-mask protocol for fills and scores") {
  FakeServer fake;
  fake.server().Post("/v1/fill-mask", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    if (body.contains("score_positions")) {
      json lp = json::array();
      for (const auto& p : body["score_positions"]) lp.push_back(-0.5 * p.get<double>());
      reply(res, {{"logprobs", lp}});
      return;
    }
    CHECK(body["text"].get<std::string>().find("[MASK]") != std::string::npos);
    reply(res, {{"fills", {{{"token", "dog"}, {"prob", 0.6}}, {{"token", "cat"}, {"prob", 0.4}}}}});
  });
  HttpFillMask fm(fake.config());
  auto fills = fm.fill("my [MASK] barks", 2);
  REQUIRE(fills.size() == 2);
  CHECK(fills[0].token == "dog");
  CHECK(fills[1].prob == doctest::Approx(0.4));
  CHECK(fm.score("a b c", {0, 2, 4}) == std::vector<double>{-0.0, -1.0, -2.0});
}

TEST_CASE("classify protocol") {
  FakeServer fake;
  fake.server().Post("/v1/classify", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    json labels = json::array(), scores = json::array();
    for (const auto& t : body["texts"]) {
      bool bad = t.get<std::string>().find("bad") != std::string::npos;
      labels.push_back(bad ? "hate" : "nothate");
      scores.push_back(bad ? 0.9 : 0.1);
    }
    reply(res, {{"labels", labels}, {"scores", scores}});
  });
  HttpClassify cl(fake.config());
  auto out = cl.classify({"fine", "bad words", "ok"});
  REQUIRE(out.size() == 3);
  CHECK(out[1].label == "hate");
  CHECK(out[1].score == doctest::Approx(0.9));
  CHECK(out[2].label == "nothate");
}

TEST_CASE("server errors are retried with backoff") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    reply(res, {{"text", "ok"}});
  });
  auto cfg = fake.config();
  cfg.backoff_s = 0.05;
  HttpChat chat(cfg);
  auto t0 = std::chrono::steady_clock::now();
  CHECK(chat.complete({}) == "ok");
  double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(calls.load() == 3);
  CHECK(waited >= 0.05 + 0.10 - 0.01);
}

TEST_CASE("retries are bounded") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  HttpChat chat(fake.config());
  CHECK_THROWS_AS(chat.complete({}), EndpointError);
  CHECK(calls.load() == 4);
}

TEST_CASE("client errors are not retried") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  HttpChat chat(fake.config());
  CHECK_THROWS_AS(chat.complete({}), EndpointError);
  CHECK(calls.load() == 1);
}

TEST_CASE("malformed bodies fail") {
  FakeServer fake;
  fake.server().Post("/v1/chat", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  HttpChat chat(fake.config());
  CHECK_THROWS_AS(chat.complete({}), EndpointError);
}

TEST_CASE("unreachable endpoint fails after retries") {
  EndpointConfig c;
  c.url = "http://127.0.0.1:1";
  c.max_retries = 1;
  c.backoff_s = 0.01;
  c.timeout_s = 1;
  HttpChat chat(c);
  CHECK_THROWS_AS(chat.complete({}), EndpointError);
}

TEST_CASE("url without scheme is a config error") {
  EndpointConfig c;
  c.url = "localhost:8000";
  CHECK_THROWS_AS(HttpJsonClient{c}, ConfigError);
}

TEST_CASE("mock backends") {
  std::vector<GlossaryEntry> lex = {make_entry("globalist", {"globalists"}), make_entry("deep state", {})};
  OracleMockChat chat(lex);
  ChatRequest r;
  r.kind = PromptKind::kLlmPredict;
  r.post_text = "the Globalists again";
  CHECK(chat.complete(r) == "Yes.");
  r.post_text = "nice weather";
  CHECK(chat.complete(r) == "No.");
  r.kind = PromptKind::kDirect;
  r.post_text = "deep state and globalist";
  auto reply_text = chat.complete(r);
  CHECK(reply_text.find("\"deep state\"") != std::string::npos);
  CHECK(reply_text.find("\"globalist\"") != std::string::npos);

  OracleMockClassifier cls(lex);
  auto c = cls.classify({"a globalist", "nothing"});
  CHECK(c[0].label == "hate");
  CHECK(c[1].label == "nothate");

  LexiconMockFillMask fm({"zog", "deep state"});
  auto fills = fm.fill("x [MASK] y", 10);
  REQUIRE(fills.size() == 2);
  double total = 0;
  for (const auto& f : fills) total += f.prob;
  CHECK(total == doctest::Approx(1.0));
  CHECK(fm.fill("x [MASK] y", 10)[0].token == fills[0].token);
  auto s = fm.score("we zog here", {3, 7});
  CHECK(s[0] > s[1]);
}
