#pragma once

// Sentence-affinity replicability.
//
// P_BERT(s1, s2) averages, over the tokens of s1, the best cosine match
// among the tokens of s2. The document score R_A averages, over the
// sentences of e1, the best P_BERT against the sentences of e2. The list of
// per-sentence maxima is the affinity curve, and R_A is its mean.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "disclosure/csv.hpp"
#include "disclosure/error.hpp"
#include "disclosure/text.hpp"

namespace disclosure::affinity {

struct SentenceEmbeddings {
  std::string sentence;
  std::vector<std::vector<double>> vectors;  // unit L2 norm, one per token
  std::size_t dim = 0;

  // Normalizes every vector to unit length.
  static SentenceEmbeddings from_raw(std::string sentence, std::vector<std::vector<double>> raw) {
    if (raw.empty()) throw InputError("sentence has no token vectors: '" + sentence + "'");
    SentenceEmbeddings s;
    s.sentence = std::move(sentence);
    s.dim = raw.front().size();
    if (s.dim == 0) throw InputError("zero-dimensional token vector");
    for (auto& v : raw) {
      if (v.size() != s.dim) throw InputError("token vectors of unequal dimension");
      double sq = 0.0;
      for (double x : v) sq += x * x;
      const double norm = std::sqrt(sq);
      if (!(norm > 0.0) || !std::isfinite(norm)) throw InputError("cannot normalize a zero or non-finite vector");
      for (double& x : v) x /= norm;
    }
    s.vectors = std::move(raw);
    return s;
  }
};

enum class Direction {
  DocOverAbstract,  // iterate body sentences, best match among abstract sentences
  AbstractOverDoc,
};

inline const char* to_string(Direction d) {
  return d == Direction::DocOverAbstract ? "doc" : "abstract";
}

inline Direction parse_direction(std::string_view s) {
  if (s == "doc") return Direction::DocOverAbstract;
  if (s == "abstract") return Direction::AbstractOverDoc;
  throw InputError("direction must be 'doc' or 'abstract', got '" + std::string(s) + "'");
}

struct CurvePoint {
  std::size_t sentence_index = 0;
  double best_score = 0.0;
  std::size_t argmax_abstract_sentence = 0;
};

struct AffinityCurve {
  std::string doc_id;
  std::vector<CurvePoint> points;
  double area = 0.0;  // mean of best_score
};

struct AffinityResult {
  double ra = 0.0;
  AffinityCurve curve;
};

namespace detail {

inline bool is_abbreviation(std::string_view word) {
  static const std::unordered_set<std::string_view> guard = {
      "e.g.", "i.e.", "al.", "etc.", "vs.", "cf.", "fig.", "figs.", "eq.", "eqs.",
      "sec.", "secs.", "no.", "nos.", "dr.", "mr.", "mrs.", "ms.", "prof.", "approx.",
      "resp.", "tab.", "ref.", "refs.", "vol.", "pp.", "ch.", "st.", "inc.", "jr.",
      "ca.", "viz.", "w.r.t.", "a.k.a.", "u.s.", "ph.d.", "ltd.", "corp.", "dept.",
  };
  return guard.count(word) != 0;
}

inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace detail

// Splits on '.', '!' or '?' followed by a space (or end of text), unless the
// word ending there is a known abbreviation.
inline std::vector<std::string> split_sentences(std::string_view text_in) {
  std::vector<std::string> out;
  const std::string_view s = text_in;
  std::size_t start = 0;
  std::size_t i = 0;
  auto push = [&](std::size_t end) {
    std::string seg = text::trim(s.substr(start, end - start));
    if (!seg.empty()) out.push_back(std::move(seg));
  };
  while (i < s.size()) {
    if (!detail::is_terminal(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && detail::is_terminal(s[j + 1])) ++j;
    const bool boundary = j + 1 == s.size() || s[j + 1] == ' ';
    if (boundary) {
      std::size_t word_start = s.rfind(' ', j);
      word_start = word_start == std::string_view::npos ? 0 : word_start + 1;
      if (word_start < start) word_start = start;
      if (!detail::is_abbreviation(s.substr(word_start, j + 1 - word_start))) {
        push(j + 1);
        start = j + 1;
      }
    }
    i = j + 1;
  }
  push(s.size());
  return out;
}

inline double sentence_bertscore(const SentenceEmbeddings& s1, const SentenceEmbeddings& s2) {
  if (s1.dim != s2.dim) {
    throw InputError("embedding dimension mismatch: " + std::to_string(s1.dim) + " vs " +
                     std::to_string(s2.dim));
  }
  if (s1.vectors.empty() || s2.vectors.empty()) throw InputError("sentence without token vectors");
  double sum = 0.0;
  for (const auto& a : s1.vectors) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& b : s2.vectors) {
      double dot = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
      if (dot > best) best = dot;
    }
    sum += best;
  }
  return sum / static_cast<double>(s1.vectors.size());
}

// Ties in the argmax resolve to the lowest index.
inline AffinityResult document_affinity(const std::vector<SentenceEmbeddings>& e1,
                                        const std::vector<SentenceEmbeddings>& e2) {
  if (e1.empty() || e2.empty()) throw InputError("document affinity needs non-empty documents");
  AffinityResult r;
  r.curve.points.reserve(e1.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    CurvePoint p;
    p.sentence_index = i;
    p.best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < e2.size(); ++j) {
      const double score = sentence_bertscore(e1[i], e2[j]);
      if (score > p.best_score) {
        p.best_score = score;
        p.argmax_abstract_sentence = j;
      }
    }
    sum += p.best_score;
    r.curve.points.push_back(p);
  }
  r.ra = sum / static_cast<double>(e1.size());
  r.curve.area = r.ra;
  return r;
}

inline const std::vector<std::string>& curve_csv_header() {
  static const std::vector<std::string> h = {"doc_id", "sentence_index", "best_score",
                                             "argmax_abstract_sentence"};
  return h;
}

inline void write_curve_rows(std::ostream& os, const AffinityCurve& curve) {
  for (const auto& p : curve.points) {
    csv::write_row(os, {curve.doc_id, std::to_string(p.sentence_index),
                        text::format_double(p.best_score),
                        std::to_string(p.argmax_abstract_sentence)});
  }
}

inline void write_curve_csv(std::ostream& os, const AffinityCurve& curve) {
  csv::write_row(os, curve_csv_header());
  write_curve_rows(os, curve);
}

inline AffinityCurve read_curve_csv(const std::string& data) {
  auto table = csv::parse(data);
  const auto id_col = table.require_column("doc_id");
  const auto idx_col = table.require_column("sentence_index");
  const auto score_col = table.require_column("best_score");
  const auto arg_col = table.require_column("argmax_abstract_sentence");
  AffinityCurve c;
  double sum = 0.0;
  for (const auto& row : table.rows) {
    c.doc_id = row[id_col];
    CurvePoint p;
    p.sentence_index = std::stoul(row[idx_col]);
    p.best_score = std::stod(row[score_col]);
    p.argmax_abstract_sentence = std::stoul(row[arg_col]);
    sum += p.best_score;
    c.points.push_back(p);
  }
  if (!c.points.empty()) c.area = sum / static_cast<double>(c.points.size());
  return c;
}

inline std::string curve_summary_json(const AffinityCurve& curve, Direction direction,
                                      const std::string& model_id) {
  nlohmann::ordered_json j;
  j["doc_id"] = curve.doc_id;
  j["R_A"] = curve.area;
  j["direction"] = to_string(direction);
  j["model_id"] = model_id;
  j["n_points"] = curve.points.size();
  return j.dump(2) + "\n";
}

// Line chart of best_score against sentence index, one document per image.
inline std::string curve_svg(const AffinityCurve& curve) {
  constexpr double width = 640, height = 320, left = 56, right = 16, top = 36, bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double lo = 0.0, hi = 1.0;
  for (const auto& p : curve.points) {
    lo = std::min(lo, p.best_score);
    hi = std::max(hi, p.best_score);
  }
  const std::size_t n = curve.points.size();
  auto x_of = [&](std::size_t i) {
    return left + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2);
  };
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">"
     << curve.doc_id << " (R_A = " << std::setprecision(4) << curve.area << ")</text>\n"
     << std::setprecision(2);
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  for (double tick : {lo, (lo + hi) / 2, hi}) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << y_of(tick) + 4
       << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << tick << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 8
     << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">sentence index</text>\n";
  if (n > 0) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (i) os << ' ';
      os << x_of(i) << ',' << y_of(curve.points[i].best_score);
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace disclosure::affinity
