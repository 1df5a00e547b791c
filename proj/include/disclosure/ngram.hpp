#pragma once

// Global trigram distribution and the trigram information-recovery ratio.
//
// The recovery ratio compares the self-information of the distinct trigrams
// of a reference text e with the portion of it also present in a generated
// text e_g:
//
//   R_R(e, e_g) = sum_{t in T(e_g) ∩ T(e)} -log p(t) / sum_{t in T(e)} -log p(t)
//
// where T(.) is the set of distinct token trigrams and p(t) is the add-alpha
// smoothed relative frequency of t in the training corpus.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "disclosure/error.hpp"
#include "disclosure/text.hpp"

namespace disclosure::ngram {

using Trigram = std::array<std::string, 3>;

struct TokenSequence {
  std::vector<std::string> tokens;
};

// Splits normalized text on spaces and cuts every punctuation character out
// as its own token: "end." -> [end, .].
inline TokenSequence tokenize(std::string_view normalized) {
  TokenSequence seq;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      seq.tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char32_t cp : text::decode_lenient(normalized)) {
    if (text::is_space(cp)) {
      flush();
    } else if (text::is_punctuation(cp)) {
      flush();
      text::append_utf8(current, cp);
      flush();
    } else {
      text::append_utf8(current, cp);
    }
  }
  flush();
  return seq;
}

inline std::set<Trigram> distinct_trigrams(const TokenSequence& seq) {
  std::set<Trigram> out;
  for (std::size_t i = 0; i + 2 < seq.tokens.size(); ++i) {
    out.insert({seq.tokens[i], seq.tokens[i + 1], seq.tokens[i + 2]});
  }
  return out;
}

class TrigramTable {
 public:
  TrigramTable() = default;
  explicit TrigramTable(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InputError("smoothing alpha must be >= 0");
  }

  void add(const TokenSequence& seq) {
    for (std::size_t i = 0; i + 2 < seq.tokens.size(); ++i) {
      ++counts_[{seq.tokens[i], seq.tokens[i + 1], seq.tokens[i + 2]}];
      ++total_;
    }
  }

  void merge(const TrigramTable& other) {
    for (const auto& [t, c] : other.counts_) counts_[t] += c;
    total_ += other.total_;
  }

  // Used when loading a serialized table.
  void set_count(const Trigram& t, std::uint64_t count) {
    if (count == 0) throw InputError("trigram counts must be positive");
    auto& slot = counts_[t];
    total_ = total_ - slot + count;
    slot = count;
  }

  std::uint64_t count(const Trigram& t) const {
    auto it = counts_.find(t);
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint64_t total() const { return total_; }
  std::uint64_t vocab_trigrams() const { return counts_.size(); }
  double alpha() const { return alpha_; }
  const std::map<Trigram, std::uint64_t>& counts() const { return counts_; }

  // (count + alpha) / (total + alpha * (vocab + 1)); the "+1" is a single
  // bucket shared by every unseen trigram.
  double probability(const Trigram& t) const {
    const double denom = static_cast<double>(total_) +
                         alpha_ * static_cast<double>(counts_.size() + 1);
    return (static_cast<double>(count(t)) + alpha_) / denom;
  }

  double oov_probability() const { return probability({"", "", ""}); }

  double self_information(const Trigram& t) const { return -std::log(probability(t)); }

  bool operator==(const TrigramTable&) const = default;

 private:
  std::map<Trigram, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  double alpha_ = 1.0;
};

template <typename Range>
TrigramTable build_trigram_table(const Range& corpus, double alpha) {
  TrigramTable table(alpha);
  bool any = false;
  for (const auto& doc : corpus) {
    any = true;
    table.add(tokenize(doc));
  }
  if (!any) throw InputError("cannot build a trigram table from an empty corpus");
  if (table.total() == 0) throw InputError("corpus contains no trigrams");
  return table;
}

inline double trigram_probability(const TrigramTable& table, const Trigram& t) {
  return table.probability(t);
}

struct Recovery {
  double ratio = 0.0;
  std::size_t reference_trigrams = 0;
  std::size_t recovered_trigrams = 0;
};

inline Recovery recovery_detail(const TrigramTable& table, const TokenSequence& reference,
                                const TokenSequence& generated) {
  if (reference.tokens.size() < 3) throw InputError("no trigrams in reference");
  const auto ref = distinct_trigrams(reference);
  const auto gen = distinct_trigrams(generated);

  Recovery r;
  r.reference_trigrams = ref.size();
  double recovered = 0.0;
  double total = 0.0;
  for (const auto& t : ref) {
    const double p = table.probability(t);
    if (!(p > 0.0)) {
      throw InputError("zero probability for trigram '" + t[0] + " " + t[1] + " " + t[2] +
                       "'; use alpha > 0");
    }
    const double info = -std::log(p);
    total += info;
    // Same summation order as the denominator, so full recovery is exactly 1.
    if (gen.count(t)) {
      recovered += info;
      ++r.recovered_trigrams;
    }
  }
  if (total > 0.0) {
    r.ratio = recovered / total;
  } else {
    r.ratio = r.recovered_trigrams == ref.size() ? 1.0 : 0.0;
  }
  return r;
}

inline double recovery_ratio(const TrigramTable& table, const TokenSequence& reference,
                             const TokenSequence& generated) {
  return recovery_detail(table, reference, generated).ratio;
}

// Text format:
//   #trigram-table v1
//   alpha <a>
//   total <n>
//   vocab <v>
//   tok1 tok2 tok3 count      (sorted bytewise by trigram)
inline void write_table(std::ostream& os, const TrigramTable& table) {
  os << "#trigram-table v1\n";
  os << "alpha " << text::format_double(table.alpha()) << '\n';
  os << "total " << table.total() << '\n';
  os << "vocab " << table.vocab_trigrams() << '\n';
  for (const auto& [t, c] : table.counts()) {
    os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << c << '\n';
  }
}

inline TrigramTable read_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "#trigram-table v1") {
    throw InputError("not a trigram table (bad magic line)");
  }
  double alpha = 0;
  std::uint64_t total = 0, vocab = 0;
  auto header = [&](std::string_view key, auto& value) {
    if (!std::getline(is, line)) throw InputError("truncated trigram table header");
    std::istringstream ls(line);
    std::string k;
    if (!(ls >> k >> value) || k != key) {
      throw InputError("expected '" + std::string(key) + "' in trigram table header");
    }
  };
  header("alpha", alpha);
  header("total", total);
  header("vocab", vocab);
  TrigramTable table(alpha);
  std::size_t lineno = 4;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Trigram t;
    std::uint64_t c = 0;
    if (!(ls >> t[0] >> t[1] >> t[2] >> c)) {
      throw InputError("malformed trigram table line " + std::to_string(lineno));
    }
    table.set_count(t, c);
  }
  if (table.total() != total || table.vocab_trigrams() != vocab) {
    throw InputError("trigram table header does not match its body");
  }
  return table;
}

}  // namespace disclosure::ngram
