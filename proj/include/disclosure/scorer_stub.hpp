#pragma once

// In-process backends with fully deterministic, machine-independent output.

#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "disclosure/hash.hpp"
#include "disclosure/ngram.hpp"
#include "disclosure/scorer.hpp"

namespace disclosure::scorer {

// Generation returns the prompt itself (truncated to max_tokens words).
class EchoBackend : public ScorerBackend {
 public:
  style::TokenLogProbs logprobs(const std::string&, const std::string&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "echo stub has no logprobs");
  }
  RawEmbeddings embed(const std::string&, const std::string&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "echo stub has no embeddings");
  }
  Generation generate(const std::string& model_id, const std::string& prompt,
                      const GenerationConfig& cfg) override {
    std::istringstream words(prompt);
    std::string w, truncated;
    int n = 0;
    bool clamped = false;
    while (words >> w) {
      if (n == cfg.max_tokens) {
        clamped = true;
        break;
      }
      if (n++) truncated += ' ';
      truncated += w;
    }
    Generation g{model_id, std::vector<std::string>(cfg.n_samples, truncated), clamped};
    return g;
  }
  std::string describe() const override { return "stub:echo"; }
};

// Token vectors derived from a hash of the token string, framed by
// [CLS]/[SEP] markers flagged as special.
class HashEmbeddingBackend : public ScorerBackend {
 public:
  explicit HashEmbeddingBackend(std::size_t dim = 16) : dim_(dim) {
    if (dim_ == 0) throw ScorerError(ScorerError::Kind::Config, "hash embedding dim must be > 0");
  }

  std::vector<double> vector_for(const std::string& token) const {
    std::uint64_t state = fnv1a64(token);
    std::vector<double> v(dim_);
    for (auto& x : v) {
      // 53 random bits mapped to [-1, 1).
      x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
  }

  style::TokenLogProbs logprobs(const std::string&, const std::string&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "hash stub has no logprobs");
  }

  RawEmbeddings embed(const std::string& model_id, const std::string& text) override {
    RawEmbeddings r;
    r.model_id = model_id;
    auto push = [&](const std::string& tok, bool special) {
      r.tokens.push_back(tok);
      r.vectors.push_back(vector_for(tok));
      r.special.push_back(special);
    };
    push("[CLS]", true);
    for (const auto& tok : ngram::tokenize(text::normalize(text)).tokens) push(tok, false);
    push("[SEP]", true);
    return r;
  }

  Generation generate(const std::string&, const std::string&, const GenerationConfig&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "hash stub cannot generate");
  }

  std::string describe() const override { return "stub:hash dim=" + std::to_string(dim_); }

 private:
  std::size_t dim_;
};

// Context-free language model: each token's logprob is looked up in a fixed
// table, falling back to a default for unlisted tokens.
class TableLmBackend : public ScorerBackend {
 public:
  TableLmBackend(std::map<std::string, double> table, double default_logprob)
      : table_(std::move(table)), default_(default_logprob) {}

  style::TokenLogProbs logprobs(const std::string& model_id, const std::string& text) override {
    style::TokenLogProbs lp;
    lp.model_id = model_id;
    for (const auto& tok : ngram::tokenize(text::normalize(text)).tokens) {
      auto it = table_.find(tok);
      lp.tokens.push_back(tok);
      lp.logprobs.push_back(it == table_.end() ? default_ : it->second);
    }
    return lp;
  }

  RawEmbeddings embed(const std::string&, const std::string&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "table stub has no embeddings");
  }

  Generation generate(const std::string&, const std::string&, const GenerationConfig&) override {
    throw ScorerError(ScorerError::Kind::CapabilityMissing, "table stub cannot generate");
  }

  std::string describe() const override { return "stub:table"; }

 private:
  std::map<std::string, double> table_;
  double default_;
};

// Backend assembled from callables; unset callables report a missing
// capability.
class FunctionBackend : public ScorerBackend {
 public:
  std::function<style::TokenLogProbs(const std::string&, const std::string&)> on_logprobs;
  std::function<RawEmbeddings(const std::string&, const std::string&)> on_embed;
  std::function<Generation(const std::string&, const std::string&, const GenerationConfig&)> on_generate;

  style::TokenLogProbs logprobs(const std::string& m, const std::string& t) override {
    if (!on_logprobs) throw ScorerError(ScorerError::Kind::CapabilityMissing, "no logprobs");
    return on_logprobs(m, t);
  }
  RawEmbeddings embed(const std::string& m, const std::string& t) override {
    if (!on_embed) throw ScorerError(ScorerError::Kind::CapabilityMissing, "no embeddings");
    return on_embed(m, t);
  }
  Generation generate(const std::string& m, const std::string& p, const GenerationConfig& c) override {
    if (!on_generate) throw ScorerError(ScorerError::Kind::CapabilityMissing, "no generation");
    return on_generate(m, p, c);
  }
  std::string describe() const override { return "stub:function"; }
};

}  // namespace disclosure::scorer
