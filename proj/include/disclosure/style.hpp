#pragma once

// Style appropriateness: a log-likelihood ratio between an academic-tuned
// language model A and a general one V over the same token sequence.
//
//   C(e) = -sum_j ( log p(t_j | A, t_<j) - log p(t_j | V, t_<j) )
//
// Positive C means the text is more probable under the general model, i.e.
// more appropriate for a lay audience. Natural logarithms throughout.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "disclosure/error.hpp"

namespace disclosure::style {

inline constexpr double kLogprobFloor = -30.0;

struct TokenLogProbs {
  std::string model_id;
  std::vector<std::string> tokens;
  std::vector<double> logprobs;  // natural log, position j conditioned on 1..j-1

  void validate() const {
    if (tokens.size() != logprobs.size()) {
      throw InputError("token/logprob length mismatch for model " + model_id);
    }
    for (double lp : logprobs) {
      if (lp > 0.0 || std::isnan(lp)) throw InputError("logprob above zero from model " + model_id);
    }
  }
};

// Concatenation with the context reset between the two parts.
inline TokenLogProbs concat(const TokenLogProbs& a, const TokenLogProbs& b) {
  TokenLogProbs out = a;
  out.tokens.insert(out.tokens.end(), b.tokens.begin(), b.tokens.end());
  out.logprobs.insert(out.logprobs.end(), b.logprobs.begin(), b.logprobs.end());
  return out;
}

inline double floored(double lp) { return std::max(lp, kLogprobFloor); }

inline double style_appropriateness(const TokenLogProbs& academic, const TokenLogProbs& general) {
  academic.validate();
  general.validate();
  if (academic.tokens != general.tokens) throw InputError("incomparable tokenizations");
  double sum = 0.0;
  for (std::size_t j = 0; j < academic.logprobs.size(); ++j) {
    sum += floored(academic.logprobs[j]) - floored(general.logprobs[j]);
  }
  return -sum;
}

}  // namespace disclosure::style
