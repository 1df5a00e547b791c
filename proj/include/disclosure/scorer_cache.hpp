#pragma once

// Content-addressed store of scorer responses:
//   <root>/<model_id>/<op>/<sha256(input)>.json
// where op is logprobs, embed or generate. For generate the hashed input is
// the canonical JSON of {max_tokens, n_samples, prompt, seed, temperature}.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "disclosure/hash.hpp"
#include "disclosure/scorer.hpp"

namespace disclosure::scorer {

class CacheStore {
 public:
  explicit CacheStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path path_for(const std::string& model_id, const std::string& op,
                                 const std::string& input_hash) const {
    if (model_id.empty() || model_id.find("..") != std::string::npos || model_id.front() == '/') {
      throw ScorerError(ScorerError::Kind::Config, "model_id unusable as a cache path: '" + model_id + "'");
    }
    return root_ / model_id / op / (input_hash + ".json");
  }

  std::optional<nlohmann::json> get(const std::string& model_id, const std::string& op,
                                    const std::string& input_hash) const {
    auto p = path_for(model_id, op, input_hash);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
      return nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::exception& e) {
      throw ScorerError(ScorerError::Kind::Backend, "corrupt cache record " + p.string() + ": " + e.what());
    }
  }

  void put(const std::string& model_id, const std::string& op, const std::string& input_hash,
           const nlohmann::json& record) const {
    write_file(path_for(model_id, op, input_hash), record.dump(2) + "\n");
  }

 private:
  std::filesystem::path root_;
};

inline std::string generation_key(const std::string& prompt, const GenerationConfig& cfg) {
  nlohmann::json j;  // keys serialize sorted
  j["prompt"] = prompt;
  j["max_tokens"] = cfg.max_tokens;
  j["n_samples"] = cfg.n_samples;
  j["temperature"] = cfg.temperature;
  j["seed"] = cfg.seed;
  return j.dump();
}

inline nlohmann::json to_record(const style::TokenLogProbs& lp) {
  return {{"model_id", lp.model_id}, {"tokens", lp.tokens}, {"logprobs", lp.logprobs}};
}

inline style::TokenLogProbs logprobs_from_record(const nlohmann::json& j) {
  style::TokenLogProbs lp;
  lp.model_id = j.at("model_id").get<std::string>();
  lp.tokens = j.at("tokens").get<std::vector<std::string>>();
  lp.logprobs = j.at("logprobs").get<std::vector<double>>();
  return lp;
}

inline nlohmann::json to_record(const RawEmbeddings& e) {
  std::vector<bool> special = e.special;
  return {{"model_id", e.model_id},
          {"tokens", e.tokens},
          {"vectors", e.vectors},
          {"special", special},
          {"dim", e.vectors.empty() ? 0 : e.vectors.front().size()}};
}

inline RawEmbeddings embeddings_from_record(const nlohmann::json& j) {
  RawEmbeddings e;
  e.model_id = j.at("model_id").get<std::string>();
  e.tokens = j.at("tokens").get<std::vector<std::string>>();
  e.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
  if (j.contains("special")) e.special = j.at("special").get<std::vector<bool>>();
  return e;
}

inline nlohmann::json to_record(const Generation& g, const GenerationConfig& cfg) {
  return {{"model_id", g.model_id}, {"texts", g.texts}, {"clamped", g.clamped}, {"seed", cfg.seed}};
}

inline Generation generation_from_record(const nlohmann::json& j) {
  Generation g;
  g.model_id = j.at("model_id").get<std::string>();
  g.texts = j.at("texts").get<std::vector<std::string>>();
  g.clamped = j.value("clamped", false);
  return g;
}

// Reads from the store; on a miss consults the upstream backend when one is
// configured (and writes its answer back), otherwise fails with MISS.
class CacheBackend : public ScorerBackend {
 public:
  explicit CacheBackend(CacheStore store, std::shared_ptr<ScorerBackend> upstream = nullptr)
      : store_(std::move(store)), upstream_(std::move(upstream)) {}

  const CacheStore& store() const { return store_; }

  style::TokenLogProbs logprobs(const std::string& model_id, const std::string& text) override {
    return lookup<style::TokenLogProbs>(
        model_id, "logprobs", text, [&](auto& up) { return up.logprobs(model_id, text); },
        [](const auto& v) { return to_record(v); }, logprobs_from_record);
  }

  RawEmbeddings embed(const std::string& model_id, const std::string& text) override {
    return lookup<RawEmbeddings>(
        model_id, "embed", text, [&](auto& up) { return up.embed(model_id, text); },
        [](const auto& v) { return to_record(v); }, embeddings_from_record);
  }

  Generation generate(const std::string& model_id, const std::string& prompt,
                      const GenerationConfig& cfg) override {
    return lookup<Generation>(
        model_id, "generate", generation_key(prompt, cfg),
        [&](auto& up) { return up.generate(model_id, prompt, cfg); },
        [&](const auto& v) { return to_record(v, cfg); }, generation_from_record);
  }

  std::string describe() const override {
    return "cache:" + store_.root().string() + (upstream_ ? " -> " + upstream_->describe() : "");
  }

 private:
  template <typename T, typename Fetch, typename ToRec, typename FromRec>
  T lookup(const std::string& model_id, const std::string& op, const std::string& input, Fetch fetch,
           ToRec to_rec, FromRec from_rec) {
    const std::string key = sha256_hex(input);
    if (auto rec = store_.get(model_id, op, key)) {
      try {
        return from_rec(*rec);
      } catch (const nlohmann::json::exception& e) {
        throw ScorerError(ScorerError::Kind::Backend, "malformed cache record for " + key + ": " + e.what());
      }
    }
    if (!upstream_) {
      throw ScorerError(ScorerError::Kind::CacheMiss,
                        "MISS: no cached " + op + " for model '" + model_id + "', input sha256 " + key);
    }
    T value = fetch(*upstream_);
    store_.put(model_id, op, key, to_rec(value));
    return value;
  }

  CacheStore store_;
  std::shared_ptr<ScorerBackend> upstream_;
};

}  // namespace disclosure::scorer
