#pragma once

// Client for the inference bridge wire protocol (HTTP, JSON bodies):
//   POST /v1/logprobs  {model, text}
//   POST /v1/embed     {model, text}
//   POST /v1/generate  {model, prompt, max_tokens, n_samples, temperature, seed}
//   GET  /v1/models
// Errors come back as non-2xx responses carrying {code, message}.
//
// Transport failures are retried with backoff; error payloads are not,
// because the bridge's answers are deterministic.

#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "disclosure/scorer.hpp"

namespace disclosure::scorer {

struct RetryPolicy {
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                 std::chrono::milliseconds(2000),
                                                 std::chrono::milliseconds(8000)};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

struct ModelInfo {
  std::string name;
  std::string role;
  std::vector<std::string> capabilities;
  int context_length = 0;
  int embedding_dim = 0;
};

class HttpBackend : public ScorerBackend {
 public:
  explicit HttpBackend(std::string url, RetryPolicy retry = {},
                       std::chrono::seconds timeout = std::chrono::seconds(120))
      : url_(std::move(url)), retry_(std::move(retry)), timeout_(timeout) {}

  style::TokenLogProbs logprobs(const std::string& model_id, const std::string& text) override {
    auto j = post("/v1/logprobs", {{"model", model_id}, {"text", text}}, model_id);
    try {
      style::TokenLogProbs lp;
      lp.model_id = model_id;
      lp.tokens = j.at("tokens").get<std::vector<std::string>>();
      lp.logprobs = j.at("logprobs").get<std::vector<double>>();
      return lp;
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(ScorerError::Kind::Backend, std::string("malformed logprobs response: ") + e.what());
    }
  }

  RawEmbeddings embed(const std::string& model_id, const std::string& text) override {
    auto j = post("/v1/embed", {{"model", model_id}, {"text", text}}, model_id);
    try {
      RawEmbeddings e;
      e.model_id = model_id;
      e.tokens = j.value("tokens", std::vector<std::string>{});
      e.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
      if (j.contains("special")) e.special = j.at("special").get<std::vector<bool>>();
      if (j.contains("dim")) {
        const auto dim = j.at("dim").get<std::size_t>();
        for (const auto& v : e.vectors) {
          if (v.size() != dim) throw ScorerError(ScorerError::Kind::Backend, "vector length differs from declared dim");
        }
      }
      return e;
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(ScorerError::Kind::Backend, std::string("malformed embed response: ") + e.what());
    }
  }

  Generation generate(const std::string& model_id, const std::string& prompt,
                      const GenerationConfig& cfg) override {
    nlohmann::json body = {{"model", model_id},       {"prompt", prompt},
                           {"max_tokens", cfg.max_tokens}, {"n_samples", cfg.n_samples},
                           {"temperature", cfg.temperature}, {"seed", cfg.seed}};
    auto j = post("/v1/generate", body, model_id);
    try {
      Generation g;
      g.model_id = model_id;
      g.texts = j.at("texts").get<std::vector<std::string>>();
      g.clamped = j.value("clamped", false);
      return g;
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(ScorerError::Kind::Backend, std::string("malformed generate response: ") + e.what());
    }
  }

  std::vector<ModelInfo> models() {
    auto j = request([&](httplib::Client& cli) { return cli.Get("/v1/models"); });
    std::vector<ModelInfo> out;
    try {
      for (const auto& m : j.at("models")) {
        ModelInfo info;
        info.name = m.at("name").get<std::string>();
        info.role = m.value("role", "");
        info.capabilities = m.value("capabilities", std::vector<std::string>{});
        info.context_length = m.value("context_length", 0);
        info.embedding_dim = m.value("embedding_dim", 0);
        out.push_back(std::move(info));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(ScorerError::Kind::Backend, std::string("malformed models response: ") + e.what());
    }
    return out;
  }

  std::string describe() const override { return "http:" + url_; }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body, const std::string& model_id) {
    const std::string payload = body.dump();
    auto j = request([&](httplib::Client& cli) { return cli.Post(path, payload, "application/json"); });
    if (j.contains("model") && j["model"].is_string() && j["model"].get<std::string>() != model_id) {
      throw ScorerError(ScorerError::Kind::Backend,
                        "bridge answered for model '" + j["model"].get<std::string>() + "', asked '" +
                            model_id + "'");
    }
    return j;
  }

  template <typename Send>
  nlohmann::json request(Send send) {
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= retry_.backoff.size(); ++attempt) {
      if (attempt > 0) retry_.sleep(retry_.backoff[attempt - 1]);
      httplib::Client cli(url_);
      cli.set_connection_timeout(timeout_);
      cli.set_read_timeout(timeout_);
      cli.set_write_timeout(timeout_);
      auto res = send(cli);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        if (res->status >= 200 && res->status < 300) {
          throw ScorerError(ScorerError::Kind::Backend, "bridge reply is not JSON");
        }
        throw ScorerError(ScorerError::Kind::Backend,
                          "bridge error HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      if (res->status < 200 || res->status >= 300) {
        const std::string code = j.value("code", std::to_string(res->status));
        const std::string message = j.value("message", res->body);
        throw ScorerError(ScorerError::Kind::Backend, "bridge error " + code + ": " + message);
      }
      return j;
    }
    throw ScorerError(ScorerError::Kind::Transport,
                      "transport failure talking to " + url_ + " after " +
                          std::to_string(retry_.backoff.size() + 1) + " attempts: " + last_error);
  }

  std::string url_;
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

}  // namespace disclosure::scorer
