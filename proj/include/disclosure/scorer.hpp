#pragma once

// Uniform access to language-model capabilities behind one contract.
//
// A ScorerHandle couples a model id and a capability set with a backend
// (content-addressed cache, HTTP bridge client, or in-process stub) and a
// gate that caps the number of in-flight requests at max_parallel.

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disclosure/affinity.hpp"
#include "disclosure/error.hpp"
#include "disclosure/style.hpp"
#include "disclosure/text.hpp"

namespace disclosure::scorer {

enum class Capability : unsigned {
  Logprobs = 1u << 0,
  Embed = 1u << 1,
  Generate = 1u << 2,
};

inline constexpr unsigned kAllCapabilities = 0b111;

inline constexpr unsigned operator|(Capability a, Capability b) {
  return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}

inline const char* to_string(Capability c) {
  switch (c) {
    case Capability::Logprobs: return "LOGPROBS";
    case Capability::Embed: return "EMBED";
    case Capability::Generate: return "GENERATE";
  }
  return "?";
}

struct GenerationConfig {
  int max_tokens = 1024;
  int n_samples = 4;
  double temperature = 1.0;
  std::uint64_t seed = 20210801;

  void validate() const {
    if (max_tokens <= 0) throw InputError("max_tokens must be > 0");
    if (n_samples <= 0) throw InputError("n_samples must be > 0");
    if (!(temperature >= 0.0)) throw InputError("temperature must be >= 0");
  }
};

// Backend embedding output before boundary normalization.
struct RawEmbeddings {
  std::string model_id;
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> vectors;
  std::vector<bool> special;  // sequence start/end markers
};

struct Generation {
  std::string model_id;
  std::vector<std::string> texts;
  bool clamped = false;
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual style::TokenLogProbs logprobs(const std::string& model_id, const std::string& text) = 0;
  virtual RawEmbeddings embed(const std::string& model_id, const std::string& text) = 0;
  virtual Generation generate(const std::string& model_id, const std::string& prompt,
                              const GenerationConfig& cfg) = 0;
  virtual std::string describe() const = 0;
};

// Counting gate that also records the peak number of concurrent holders.
class ParallelGate {
 public:
  explicit ParallelGate(std::size_t limit) : limit_(limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }

  std::size_t peak() const {
    std::lock_guard lock(mu_);
    return peak_;
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

class ScorerHandle {
 public:
  ScorerHandle(std::string model_id, unsigned capabilities, std::string endpoint,
               std::size_t max_parallel, std::shared_ptr<ScorerBackend> backend)
      : model_id_(std::move(model_id)),
        capabilities_(capabilities),
        endpoint_(std::move(endpoint)),
        max_parallel_(max_parallel),
        backend_(std::move(backend)),
        gate_(std::make_shared<ParallelGate>(max_parallel)) {
    if (model_id_.empty()) throw ScorerError(ScorerError::Kind::Config, "model_id must be non-empty");
    if (max_parallel_ < 1) throw ScorerError(ScorerError::Kind::Config, "max_parallel must be >= 1");
    if (!backend_) throw ScorerError(ScorerError::Kind::Config, "scorer handle without backend");
  }

  const std::string& model_id() const { return model_id_; }
  unsigned capabilities() const { return capabilities_; }
  bool has(Capability c) const { return (capabilities_ & static_cast<unsigned>(c)) != 0; }
  const std::string& endpoint() const { return endpoint_; }
  std::size_t max_parallel() const { return max_parallel_; }
  ScorerBackend& backend() const { return *backend_; }
  std::size_t peak_in_flight() const { return gate_->peak(); }

  void require(Capability c) const {
    if (!has(c)) {
      throw ScorerError(ScorerError::Kind::CapabilityMissing,
                        "scorer '" + model_id_ + "' lacks capability " + to_string(c));
    }
  }

  template <typename Fn>
  auto with_slot(Fn&& fn) const {
    gate_->acquire();
    struct Release {
      ParallelGate* g;
      ~Release() { g->release(); }
    } release{gate_.get()};
    return fn(*backend_);
  }

 private:
  std::string model_id_;
  unsigned capabilities_;
  std::string endpoint_;
  std::size_t max_parallel_;
  std::shared_ptr<ScorerBackend> backend_;
  std::shared_ptr<ParallelGate> gate_;
};

inline bool is_blank(std::string_view s) { return text::trim(s).empty(); }

inline style::TokenLogProbs get_logprobs(const ScorerHandle& h, const std::string& text) {
  h.require(Capability::Logprobs);
  if (is_blank(text)) throw ScorerError(ScorerError::Kind::EmptyInput, "EMPTY_INPUT: logprobs of empty text");
  auto lp = h.with_slot([&](ScorerBackend& b) { return b.logprobs(h.model_id(), text); });
  if (lp.model_id.empty()) lp.model_id = h.model_id();
  try {
    lp.validate();
  } catch (const InputError& e) {
    throw ScorerError(ScorerError::Kind::Backend, e.what());
  }
  return lp;
}

// Drops special tokens and L2-normalizes every remaining vector.
inline affinity::SentenceEmbeddings get_embeddings(const ScorerHandle& h, const std::string& sentence) {
  h.require(Capability::Embed);
  if (is_blank(sentence)) {
    throw ScorerError(ScorerError::Kind::EmptyInput, "EMPTY_INPUT: embedding of empty sentence");
  }
  auto raw = h.with_slot([&](ScorerBackend& b) { return b.embed(h.model_id(), sentence); });
  if (!raw.special.empty() && raw.special.size() != raw.vectors.size()) {
    throw ScorerError(ScorerError::Kind::Backend, "special-token mask length mismatch");
  }
  std::vector<std::vector<double>> content;
  for (std::size_t i = 0; i < raw.vectors.size(); ++i) {
    if (!raw.special.empty() && raw.special[i]) continue;
    content.push_back(std::move(raw.vectors[i]));
  }
  if (content.empty()) {
    throw ScorerError(ScorerError::Kind::EmptyInput, "EMPTY_INPUT: no content tokens in '" + sentence + "'");
  }
  try {
    return affinity::SentenceEmbeddings::from_raw(sentence, std::move(content));
  } catch (const InputError& e) {
    throw ScorerError(ScorerError::Kind::Backend, e.what());
  }
}

inline Generation generate(const ScorerHandle& h, const std::string& prompt, const GenerationConfig& cfg) {
  h.require(Capability::Generate);
  cfg.validate();
  auto g = h.with_slot([&](ScorerBackend& b) { return b.generate(h.model_id(), prompt, cfg); });
  if (g.model_id.empty()) g.model_id = h.model_id();
  if (g.texts.size() != static_cast<std::size_t>(cfg.n_samples)) {
    throw ScorerError(ScorerError::Kind::Backend,
                      "expected " + std::to_string(cfg.n_samples) + " generations, got " +
                          std::to_string(g.texts.size()));
  }
  return g;
}

}  // namespace disclosure::scorer
