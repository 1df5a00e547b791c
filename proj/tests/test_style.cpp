#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "disclosure/scoring.hpp"
#include "disclosure/scorer_stub.hpp"
#include "disclosure/style.hpp"

namespace disclosure::style {
namespace {

TokenLogProbs lp(std::vector<std::string> tokens, std::vector<double> values, std::string model = "m") {
  return TokenLogProbs{std::move(model), std::move(tokens), std::move(values)};
}

TokenLogProbs random_lp(std::mt19937_64& rng, std::size_t n, const std::vector<std::string>& tokens) {
  std::uniform_real_distribution<double> d(-12.0, 0.0);
  TokenLogProbs r;
  r.tokens = tokens;
  for (std::size_t i = 0; i < n; ++i) r.logprobs.push_back(d(rng));
  return r;
}

std::vector<std::string> words(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("t" + std::to_string(i));
  return t;
}

TEST(StyleAppropriateness, IdenticalModelsScoreZero) {
  auto a = lp({"a", "b", "c"}, {-1.5, -0.25, -7.0});
  EXPECT_EQ(style_appropriateness(a, a), 0.0);
}

TEST(StyleAppropriateness, SignFollowsGeneralModelPreference) {
  auto academic = lp({"x", "y"}, {-3.0, -2.0});
  auto general = lp({"x", "y"}, {-1.0, -1.0});
  EXPECT_DOUBLE_EQ(style_appropriateness(academic, general), 3.0);
  EXPECT_DOUBLE_EQ(style_appropriateness(general, academic), -3.0);
}

TEST(StyleAppropriateness, AntisymmetricAndAdditive) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n1 = 1 + rng() % 20, n2 = 1 + rng() % 20;
    const auto t1 = words(n1), t2 = words(n2);
    auto a1 = random_lp(rng, n1, t1), v1 = random_lp(rng, n1, t1);
    auto a2 = random_lp(rng, n2, t2), v2 = random_lp(rng, n2, t2);
    EXPECT_EQ(style_appropriateness(a1, v1), -style_appropriateness(v1, a1));
    EXPECT_NEAR(style_appropriateness(concat(a1, a2), concat(v1, v2)),
                style_appropriateness(a1, v1) + style_appropriateness(a2, v2), 1e-9);
  }
}

TEST(StyleAppropriateness, UniformGapScalesWithLength) {
  for (std::size_t n : {1u, 5u, 40u}) {
    TokenLogProbs a = lp(words(n), std::vector<double>(n, -4.0));
    TokenLogProbs v = lp(words(n), std::vector<double>(n, -2.5));
    EXPECT_NEAR(style_appropriateness(a, v), 1.5 * static_cast<double>(n), 1e-12);
  }
}

TEST(StyleAppropriateness, FloorClampsExtremeLogprobs) {
  auto a = lp({"z"}, {-1e9});
  auto v = lp({"z"}, {-1.0});
  EXPECT_DOUBLE_EQ(style_appropriateness(a, v), 29.0);
  auto inf = lp({"z"}, {-INFINITY});
  EXPECT_DOUBLE_EQ(style_appropriateness(inf, v), 29.0);
}

TEST(StyleAppropriateness, RejectsMismatchAndBadValues) {
  try {
    style_appropriateness(lp({"a", "b"}, {-1, -1}), lp({"a", "c"}, {-1, -1}));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "incomparable tokenizations");
  }
  EXPECT_THROW(style_appropriateness(lp({"a"}, {0.5}), lp({"a"}, {-1})), InputError);
  EXPECT_THROW(style_appropriateness(lp({"a"}, {NAN}), lp({"a"}, {-1})), InputError);
  EXPECT_THROW(style_appropriateness(lp({"a", "b"}, {-1}), lp({"a", "b"}, {-1, -1})), InputError);
}

// Two bigram models over a two-word vocabulary; the hand values below are
// the per-token log ratios written out in closed form.
scorer::ScorerHandle bigram_model(const std::string& id, double p_aa, double p_ab, double p_start_a) {
  auto b = std::make_shared<scorer::FunctionBackend>();
  b->on_logprobs = [=](const std::string& m, const std::string& text) {
    TokenLogProbs out;
    out.model_id = m;
    out.tokens = ngram::tokenize(text).tokens;
    std::string prev;
    for (const auto& t : out.tokens) {
      double p;
      if (prev.empty()) {
        p = t == "a" ? p_start_a : 1 - p_start_a;
      } else if (prev == "a") {
        p = t == "a" ? p_aa : 1 - p_aa;
      } else {
        p = t == "a" ? p_ab : 1 - p_ab;
      }
      out.logprobs.push_back(std::log(p));
      prev = t;
    }
    return out;
  };
  return scorer::ScorerHandle(id, static_cast<unsigned>(scorer::Capability::Logprobs), "stub", 2, b);
}

TEST(ScoreSa, ToyBigramMatchesHandRatios) {
  auto academic = bigram_model("acad", 0.9, 0.2, 0.5);
  auto general = bigram_model("gen", 0.3, 0.6, 0.8);
  const corpus::DocumentPair pair{"toy", "a a b a", "unused body", {}};
  auto s = score_sa(pair, academic, general);
  const double hand = -(std::log(0.5 / 0.8) + std::log(0.9 / 0.3) + std::log(0.1 / 0.7) + std::log(0.2 / 0.6));
  EXPECT_NEAR(s.c, hand, 1e-10);
  EXPECT_EQ(s.n_tokens, 4u);
  EXPECT_NEAR(s.c_per_token, hand / 4, 1e-10);
  EXPECT_EQ(s.model_a, "acad");
  EXPECT_EQ(s.model_b, "gen");
  EXPECT_NEAR(score_sa(pair, general, academic).c, -hand, 1e-12);
}

TEST(ScoreSa, TokenizerMismatchIsConfigError) {
  auto a = std::make_shared<scorer::TableLmBackend>(std::map<std::string, double>{}, -1.0);
  auto b = std::make_shared<scorer::FunctionBackend>();
  b->on_logprobs = [](const std::string& m, const std::string&) { return lp({"whole"}, {-2.0}, m); };
  scorer::ScorerHandle ha("a", static_cast<unsigned>(scorer::Capability::Logprobs), "stub", 1, a);
  scorer::ScorerHandle hb("b", static_cast<unsigned>(scorer::Capability::Logprobs), "stub", 1, b);
  const corpus::DocumentPair pair{"p", "two words", "body", {}};
  try {
    score_sa(pair, ha, hb);
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_EQ(e.kind(), ScorerError::Kind::Config);
    EXPECT_NE(std::string(e.what()).find("incomparable tokenizations"), std::string::npos);
  }
}

}  // namespace
}  // namespace disclosure::style
