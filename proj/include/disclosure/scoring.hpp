#pragma once

// Per-document metric drivers: each one pulls model outputs through a
// ScorerHandle and applies the corresponding pure metric.

#include <future>
#include <string>
#include <vector>

#include "disclosure/affinity.hpp"
#include "disclosure/corpus.hpp"
#include "disclosure/error.hpp"
#include "disclosure/ngram.hpp"
#include "disclosure/parallel.hpp"
#include "disclosure/scorer.hpp"
#include "disclosure/style.hpp"

namespace disclosure {

struct RrScore {
  std::string id;
  double rr = 0.0;
  std::size_t reference_trigrams = 0;
  std::size_t recovered_trigrams = 0;
  std::string generated;  // e_g, kept for audit
  std::string model_id;
  std::uint64_t seed = 0;
};

// e_g is the normalized concatenation of n_samples generations conditioned
// on the abstract; the reference is the full body text.
inline RrScore score_rr(const corpus::DocumentPair& pair, const ngram::TrigramTable& table,
                        const scorer::ScorerHandle& gen, const scorer::GenerationConfig& cfg) {
  auto g = scorer::generate(gen, pair.abstract_text, cfg);
  RrScore s;
  s.id = pair.id;
  s.model_id = g.model_id;
  s.seed = cfg.seed;
  s.generated = corpus::normalize(text::join(g.texts, " "));
  const auto rec = ngram::recovery_detail(table, ngram::tokenize(pair.body_text), ngram::tokenize(s.generated));
  s.rr = rec.ratio;
  s.reference_trigrams = rec.reference_trigrams;
  s.recovered_trigrams = rec.recovered_trigrams;
  return s;
}

struct RaScore {
  std::string id;
  double ra = 0.0;
  affinity::Direction direction = affinity::Direction::DocOverAbstract;
  affinity::AffinityCurve curve;
  std::string model_id;
};

inline std::vector<affinity::SentenceEmbeddings> embed_sentences(const scorer::ScorerHandle& h,
                                                                 const std::vector<std::string>& sentences) {
  return parallel_map(h.max_parallel(), sentences.size(),
                      [&](std::size_t i) { return scorer::get_embeddings(h, sentences[i]); });
}

inline RaScore score_ra(const corpus::DocumentPair& pair, const scorer::ScorerHandle& emb,
                        affinity::Direction direction = affinity::Direction::DocOverAbstract) {
  const auto body = affinity::split_sentences(pair.body_text);
  const auto abstract = affinity::split_sentences(pair.abstract_text);
  if (body.empty() || abstract.empty()) throw InputError(pair.id + ": document without sentences");
  const auto body_emb = embed_sentences(emb, body);
  const auto abs_emb = embed_sentences(emb, abstract);
  auto result = direction == affinity::Direction::DocOverAbstract
                    ? affinity::document_affinity(body_emb, abs_emb)
                    : affinity::document_affinity(abs_emb, body_emb);
  RaScore s;
  s.id = pair.id;
  s.ra = result.ra;
  s.direction = direction;
  s.curve = std::move(result.curve);
  s.curve.doc_id = pair.id;
  s.model_id = emb.model_id();
  return s;
}

struct SaScore {
  std::string id;
  double c = 0.0;
  double c_per_token = 0.0;
  std::size_t n_tokens = 0;
  std::string model_a;
  std::string model_b;
};

inline SaScore score_sa(const corpus::DocumentPair& pair, const scorer::ScorerHandle& academic,
                        const scorer::ScorerHandle& general) {
  auto fut = std::async(std::launch::async, [&] { return scorer::get_logprobs(general, pair.abstract_text); });
  auto lp_a = scorer::get_logprobs(academic, pair.abstract_text);
  auto lp_v = fut.get();
  SaScore s;
  s.id = pair.id;
  s.model_a = academic.model_id();
  s.model_b = general.model_id();
  try {
    s.c = style::style_appropriateness(lp_a, lp_v);
  } catch (const InputError& e) {
    throw ScorerError(ScorerError::Kind::Config,
                      std::string(e.what()) + " between '" + s.model_a + "' and '" + s.model_b + "'");
  }
  s.n_tokens = lp_a.tokens.size();
  s.c_per_token = s.n_tokens ? s.c / static_cast<double>(s.n_tokens) : 0.0;
  return s;
}

}  // namespace disclosure
