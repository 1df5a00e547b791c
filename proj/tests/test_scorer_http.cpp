#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "disclosure/scorer.hpp"
#include "disclosure/scorer_http.hpp"

namespace disclosure::scorer {
namespace {

using nlohmann::json;

// Minimal in-process bridge speaking the wire protocol.
class FakeBridge {
 public:
  FakeBridge() {
    server_.Post("/v1/logprobs", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      auto in = json::parse(req.body);
      last_ = in;
      if (in["text"] == "fail") {
        res.status = 422;
        res.set_content(json{{"code", "TOKENIZER"}, {"message", "cannot tokenize"}}.dump(), "application/json");
        return;
      }
      json out = {{"model", answer_model_.empty() ? in["model"].get<std::string>() : answer_model_},
                  {"tokens", {"we", "test"}},
                  {"logprobs", {-1.25, -0.5}}};
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      auto in = json::parse(req.body);
      json out = {{"model", in["model"]},
                  {"tokens", {"[CLS]", "hi", "[SEP]"}},
                  {"vectors", {{1, 0}, {3, 4}, {0, 1}}},
                  {"special", {true, false, true}},
                  {"dim", 2}};
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      auto in = json::parse(req.body);
      last_ = in;
      json texts = json::array();
      for (int i = 0; i < in["n_samples"].get<int>(); ++i) texts.push_back("sample " + std::to_string(i));
      res.set_content(json{{"model", in["model"]}, {"texts", texts}}.dump(), "application/json");
    });
    server_.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
      json out = {{"models",
                   {{{"name", "gpt2-arxiv"},
                     {"role", "academic"},
                     {"capabilities", {"logprobs", "generate"}},
                     {"context_length", 1024}},
                    {{"name", "bert"}, {"role", "embed"}, {"capabilities", {"embed"}}, {"embedding_dim", 768}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeBridge() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }
  json last() const { return last_; }
  void answer_as(std::string model) { answer_model_ = std::move(model); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  json last_;
  std::string answer_model_;
};

RetryPolicy recording(std::vector<std::chrono::milliseconds>& log) {
  RetryPolicy p;
  p.sleep = [&log](std::chrono::milliseconds d) { log.push_back(d); };
  return p;
}

TEST(HttpBackend, Logprobs) {
  FakeBridge bridge;
  HttpBackend b(bridge.url());
  auto lp = b.logprobs("gpt2-arxiv", "we test");
  EXPECT_EQ(lp.model_id, "gpt2-arxiv");
  EXPECT_EQ(lp.tokens, (std::vector<std::string>{"we", "test"}));
  EXPECT_EQ(lp.logprobs, (std::vector<double>{-1.25, -0.5}));
  EXPECT_EQ(bridge.last()["model"], "gpt2-arxiv");
  EXPECT_EQ(bridge.last()["text"], "we test");
}

TEST(HttpBackend, EmbedThroughHandleDropsSpecials) {
  FakeBridge bridge;
  ScorerHandle h("bert", kAllCapabilities, bridge.url(), 1, std::make_shared<HttpBackend>(bridge.url()));
  auto e = get_embeddings(h, "hi");
  ASSERT_EQ(e.vectors.size(), 1u);
  EXPECT_DOUBLE_EQ(e.vectors[0][0], 0.6);
  EXPECT_DOUBLE_EQ(e.vectors[0][1], 0.8);
}

TEST(HttpBackend, GenerateSendsFullConfig) {
  FakeBridge bridge;
  HttpBackend b(bridge.url());
  GenerationConfig cfg;
  cfg.n_samples = 2;
  cfg.max_tokens = 64;
  cfg.temperature = 0.7;
  cfg.seed = 99;
  auto g = b.generate("gpt2-arxiv", "abstract text", cfg);
  EXPECT_EQ(g.texts, (std::vector<std::string>{"sample 0", "sample 1"}));
  const auto sent = bridge.last();
  EXPECT_EQ(sent["prompt"], "abstract text");
  EXPECT_EQ(sent["max_tokens"], 64);
  EXPECT_EQ(sent["n_samples"], 2);
  EXPECT_EQ(sent["temperature"], 0.7);
  EXPECT_EQ(sent["seed"], 99);
}

TEST(HttpBackend, Models) {
  FakeBridge bridge;
  HttpBackend b(bridge.url());
  auto models = b.models();
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].name, "gpt2-arxiv");
  EXPECT_EQ(models[0].context_length, 1024);
  EXPECT_EQ(models[1].embedding_dim, 768);
  EXPECT_EQ(models[1].capabilities, std::vector<std::string>{"embed"});
}

TEST(HttpBackend, ErrorPayloadIsNotRetried) {
  FakeBridge bridge;
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend b(bridge.url(), recording(slept));
  try {
    b.logprobs("m", "fail");
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.kind(), ScorerError::Kind::Backend);
    EXPECT_NE(std::string(e.what()).find("TOKENIZER"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("cannot tokenize"), std::string::npos);
  }
  EXPECT_EQ(bridge.requests(), 1);
  EXPECT_TRUE(slept.empty());
}

TEST(HttpBackend, ModelMismatchIsBackendError) {
  FakeBridge bridge;
  bridge.answer_as("someone-else");
  HttpBackend b(bridge.url());
  try {
    b.logprobs("gpt2-arxiv", "x");
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.kind(), ScorerError::Kind::Backend);
  }
}

TEST(HttpBackend, TransportFailureRetriesWithBackoff) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  std::vector<std::chrono::milliseconds> slept;
  HttpBackend b("http://127.0.0.1:" + std::to_string(port), recording(slept), std::chrono::seconds(2));
  try {
    b.logprobs("m", "x");
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.kind(), ScorerError::Kind::Transport);
    EXPECT_NE(std::string(e.what()).find("4 attempts"), std::string::npos);
  }
  using std::chrono::milliseconds;
  EXPECT_EQ(slept, (std::vector<milliseconds>{milliseconds(500), milliseconds(2000), milliseconds(8000)}));
}

}  // namespace
}  // namespace disclosure::scorer
