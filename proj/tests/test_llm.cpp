#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dicl/embedding_client.hpp"
#include "dicl/llm_client.hpp"

using namespace dicl;

namespace {

const std::vector<std::string> kLabels = {"neg", "pos"};
const std::map<std::string, std::string> kVerbalizer = {{"neg", "negative"}, {"pos", "positive"}};

/// In-process completion/embedding server for exercising the HTTP clients.
class LocalServer {
 public:
  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/completions", handler);
    server_.Post("/v1/embeddings", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpSettings fast_settings(const std::string& base_url, int max_retries = 2) {
  HttpSettings s;
  s.base_url = base_url;
  s.max_retries = max_retries;
  s.backoff_ms = 1;
  s.timeout_sec = 5;
  return s;
}

}  // namespace

TEST_CASE("parse_label normalization and matching") {
  CHECK(parse_label("positive", kLabels, kVerbalizer) == "pos");
  CHECK(parse_label(" Negative.\n", kLabels, kVerbalizer) == "neg");
  CHECK(parse_label("it is good", kLabels, kVerbalizer) == std::nullopt);
  CHECK(parse_label("", kLabels, kVerbalizer) == std::nullopt);
  CHECK(parse_label("POSITIVE!!!", kLabels, kVerbalizer) == "pos");
}

TEST_CASE("parse_label picks the earliest match") {
  CHECK(parse_label("negative, not positive", kLabels, kVerbalizer) == "neg");
  CHECK(parse_label("positive or negative", kLabels, kVerbalizer) == "pos");
  // whole-token matching: "positively" is not the token "positive"
  CHECK(parse_label("positively negative", kLabels, kVerbalizer) == "neg");
}

TEST_CASE("parse_label with multi-word verbalizers and label-order ties") {
  std::vector<std::string> labels = {"ent", "not_ent"};
  std::map<std::string, std::string> verbalizer = {{"ent", "true"}, {"not_ent", "not true"}};
  CHECK(parse_label("not true", labels, verbalizer) == "not_ent");  // earliest position wins
  CHECK(parse_label("true", labels, verbalizer) == "ent");
  // same position: label-set order decides
  std::map<std::string, std::string> clash = {{"ent", "yes"}, {"not_ent", "yes sir"}};
  CHECK(parse_label("yes sir", labels, clash) == "ent");
}

TEST_CASE("complete returns the generation and retries transient failures") {
  SECTION("echoes the configured text") {
    LocalServer server([](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body = nlohmann::json::parse(req.body);
      REQUIRE(body.at("temperature").get<double>() == 0.0);
      REQUIRE(body.at("model").get<std::string>() == "test-model");
      res.set_content(nlohmann::json{{"choices", {{{"text", "positive"}}}}}.dump(),
                      "application/json");
    });
    LlmEndpoint ep{fast_settings(server.base_url()), "test-model", 8};
    CHECK(complete(ep, "a prompt") == "positive");
    CHECK(complete(ep, "a prompt") == "positive");  // deterministic across calls
  }
  SECTION("500 thrice with max_retries=2 exhausts and throws") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 500;
    });
    LlmEndpoint ep{fast_settings(server.base_url(), 2), "m", 8};
    REQUIRE_THROWS_AS(complete(ep, "p"), HttpError);
    CHECK(hits == 3);  // initial attempt + 2 retries
  }
  SECTION("recovers when a retry succeeds") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
      if (++hits < 3) {
        res.status = 503;
        return;
      }
      res.set_content(nlohmann::json{{"choices", {{{"text", "ok"}}}}}.dump(), "application/json");
    });
    LlmEndpoint ep{fast_settings(server.base_url(), 2), "m", 8};
    CHECK(complete(ep, "p") == "ok");
    CHECK(hits == 3);
  }
  SECTION("non-retryable status fails immediately") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 400;
    });
    LlmEndpoint ep{fast_settings(server.base_url(), 5), "m", 8};
    REQUIRE_THROWS(complete(ep, "p"));
    CHECK(hits == 1);
  }
  SECTION("malformed response body throws") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json at all", "application/json");
    });
    LlmEndpoint ep{fast_settings(server.base_url()), "m", 8};
    REQUIRE_THROWS_WITH(complete(ep, "p"), Catch::Matchers::ContainsSubstring("malformed"));
  }
  SECTION("response without choices throws") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content(nlohmann::json{{"choices", nlohmann::json::array()}}.dump(),
                      "application/json");
    });
    LlmEndpoint ep{fast_settings(server.base_url()), "m", 8};
    REQUIRE_THROWS_WITH(complete(ep, "p"),
                        Catch::Matchers::ContainsSubstring("choices[0].text"));
  }
  SECTION("unreachable endpoint errors after bounded retries") {
    LlmEndpoint ep{fast_settings("http://127.0.0.1:1/v1", 1), "m", 8};
    ep.http.timeout_sec = 1;
    REQUIRE_THROWS_AS(complete(ep, "p"), HttpError);
  }
}

TEST_CASE("api key travels as a bearer token") {
  LocalServer server([](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("Authorization") != "Bearer sk-test") {
      res.status = 401;
      return;
    }
    res.set_content(nlohmann::json{{"choices", {{{"text", "ok"}}}}}.dump(), "application/json");
  });
  LlmEndpoint ep{fast_settings(server.base_url()), "m", 8};
  SECTION("request carries the configured key") {
    ep.http.api_key = "sk-test";
    CHECK(complete(ep, "p") == "ok");
  }
  SECTION("missing key is rejected by the server") {
    REQUIRE_THROWS_WITH(complete(ep, "p"), Catch::Matchers::ContainsSubstring("401"));
  }
}

TEST_CASE("embedding client caches by exact text") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    nlohmann::json body = nlohmann::json::parse(req.body);
    REQUIRE(body.at("input").is_array());
    nlohmann::json reply = {
        {"data", {{{"index", 0}, {"embedding", {0.25, -0.5, 1.0}}}}},
    };
    res.set_content(reply.dump(), "application/json");
  });

  EmbeddingClient client(fast_settings(server.base_url()), "embed-model");
  DenseVector first = client.fetch("hello world");
  CHECK(first.values == std::vector<double>{0.25, -0.5, 1.0});
  DenseVector second = client.fetch("hello world");
  CHECK(second.values == first.values);
  CHECK(hits == 1);  // cached on the second call
  client.fetch("different text");
  CHECK(hits == 2);
}

TEST_CASE("embedding client rejects dimension drift") {
  std::atomic<int> hits{0};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    int n = ++hits == 1 ? 3 : 5;
    nlohmann::json embedding = nlohmann::json::array();
    for (int i = 0; i < n; ++i) embedding.push_back(0.1 * i);
    nlohmann::json reply = {{"data", {{{"index", 0}, {"embedding", embedding}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  EmbeddingClient client(fast_settings(server.base_url()), "embed-model");
  client.fetch("first");
  REQUIRE_THROWS_WITH(client.fetch("second"),
                      Catch::Matchers::ContainsSubstring("dimension mismatch"));
}

TEST_CASE("embedding client propagates endpoint failure after retries") {
  LocalServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  EmbeddingClient client(fast_settings(server.base_url(), 1), "embed-model");
  REQUIRE_THROWS_AS(client.fetch("text"), HttpError);
}
