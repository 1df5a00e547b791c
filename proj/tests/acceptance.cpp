// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "disclosure/cli.hpp"
#include "disclosure/disclosure.hpp"
#include "support/oracles.hpp"
#include "support/support.hpp"

namespace {

using namespace disclosure;
namespace oracle = disclosure::testing::oracle;
using disclosure::testing::SplitMix;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::size_t below(SplitMix& g, std::size_t n) { return static_cast<std::size_t>(g.next() % n); }

// ---------------------------------------------------------------------------

Outcome recovery_oracle() {
  Outcome o;
  SplitMix g(101);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t vocab = 2 + below(g, 19);  // 2..20
    const std::size_t n_docs = 1 + below(g, 10);
    auto word = [&] { return "w" + std::to_string(below(g, vocab)); };
    std::vector<std::string> docs;
    std::vector<oracle::Tokens> oc;
    for (std::size_t d = 0; d < n_docs; ++d) {
      oracle::Tokens t;
      const std::size_t len = 3 + below(g, 30);
      for (std::size_t i = 0; i < len; ++i) t.push_back(word());
      docs.push_back(text::join(t, " "));
      oc.push_back(t);
    }
    const double alpha = 0.25 + 2.0 * g.uniform();
    const auto table = ngram::build_trigram_table(docs, alpha);
    for (int trial = 0; trial < 5; ++trial) {
      oracle::Tokens e, eg;
      const std::size_t le = 3 + below(g, 25), lg = below(g, 40);
      for (std::size_t i = 0; i < le; ++i) e.push_back(word());
      for (std::size_t i = 0; i < lg; ++i) eg.push_back(word());
      const double got = ngram::recovery_ratio(table, {e}, {eg});
      const double want = oracle::recovery(oc, alpha, e, eg);
      worst = std::max(worst, std::fabs(got - want));
      if (ngram::recovery_ratio(table, {e}, {e}) != 1.0) o.check(false, "R_R(e,e) != 1");
      oracle::Tokens disjoint;
      for (std::size_t i = 0; i < lg + 3; ++i) disjoint.push_back("x" + std::to_string(i % 4));
      if (ngram::recovery_ratio(table, {e}, {disjoint}) != 0.0) o.check(false, "disjoint R_R != 0");
    }
  }
  o.check(worst < 1e-12, "max |delta| " + num(worst));
  if (o.pass) o.detail = "max |delta| " + num(worst) + " over 250 cases";
  return o;
}

// ---------------------------------------------------------------------------

oracle::Sentence random_sentence(SplitMix& g, std::size_t dim) {
  oracle::Sentence s(1 + below(g, 12));
  for (auto& v : s) {
    v.resize(dim);
    for (auto& x : v) x = 2.0 * g.uniform() - 1.0;
  }
  return s;
}

std::vector<oracle::Sentence> random_document(SplitMix& g, std::size_t dim) {
  std::vector<oracle::Sentence> d(1 + below(g, 8));
  for (auto& s : d) s = random_sentence(g, dim);
  return d;
}

std::vector<affinity::SentenceEmbeddings> embed(const std::vector<oracle::Sentence>& doc) {
  std::vector<affinity::SentenceEmbeddings> out;
  for (const auto& s : doc) out.push_back(affinity::SentenceEmbeddings::from_raw("s", s));
  return out;
}

Outcome affinity_oracle() {
  Outcome o;
  SplitMix g(202);
  const std::size_t dim = 8;
  double worst = 0.0, worst_self = 0.0;
  for (int c = 0; c < 100; ++c) {
    const auto d1 = random_document(g, dim), d2 = random_document(g, dim);
    const auto e1 = embed(d1), e2 = embed(d2);
    for (std::size_t i = 0; i < d1.size(); ++i) {
      for (std::size_t j = 0; j < d2.size(); ++j) {
        worst = std::max(worst, std::fabs(affinity::sentence_bertscore(e1[i], e2[j]) - oracle::bertscore(d1[i], d2[j])));
      }
    }
    const auto got = affinity::document_affinity(e1, e2);
    const auto want = oracle::affinity(d1, d2);
    worst = std::max(worst, std::fabs(got.ra - want.ra));
    for (std::size_t i = 0; i < d1.size(); ++i) {
      worst = std::max(worst, std::fabs(got.curve.points[i].best_score - want.best[i]));
      // Argmax only comparable when the maximum is not a near-tie.
      const auto w = want.argmax[i];
      if (got.curve.points[i].argmax_abstract_sentence != w &&
          std::fabs(oracle::bertscore(d1[i], d2[got.curve.points[i].argmax_abstract_sentence]) - want.best[i]) > 1e-9) {
        o.check(false, "argmax differs");
      }
    }
    worst_self = std::max(worst_self, std::fabs(affinity::document_affinity(e1, e1).ra - 1.0));
  }
  o.check(worst < 1e-9, "max |delta| " + num(worst));
  o.check(worst_self <= 1e-6, "self-affinity off by " + num(worst_self));

  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto d1 = random_document(g, dim);
    auto d2 = random_document(g, dim);
    const double base = affinity::document_affinity(embed(d1), embed(d2)).ra;
    const std::size_t extra = 1 + below(g, 3);
    for (std::size_t i = 0; i < extra; ++i) d2.insert(d2.begin() + static_cast<long>(below(g, d2.size() + 1)), random_sentence(g, dim));
    if (affinity::document_affinity(embed(d1), embed(d2)).ra < base) ++violations;
  }
  o.check(violations == 0, std::to_string(violations) + " superset violations");
  if (o.pass) o.detail = "max |delta| " + num(worst) + ", self " + num(worst_self) + ", 1000 supersets monotone";
  return o;
}

// ---------------------------------------------------------------------------

style::TokenLogProbs random_lp(SplitMix& g, const std::vector<std::string>& tokens) {
  style::TokenLogProbs lp;
  lp.tokens = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) lp.logprobs.push_back(-12.0 * g.uniform());
  return lp;
}

scorer::ScorerHandle bigram(const std::string& id, double p_aa, double p_ba, double p_start_a) {
  auto b = std::make_shared<scorer::FunctionBackend>();
  b->on_logprobs = [=](const std::string& m, const std::string& text) {
    style::TokenLogProbs out;
    out.model_id = m;
    out.tokens = ngram::tokenize(text).tokens;
    std::string prev;
    for (const auto& t : out.tokens) {
      const double pa = prev.empty() ? p_start_a : prev == "a" ? p_aa : p_ba;
      out.logprobs.push_back(std::log(t == "a" ? pa : 1.0 - pa));
      prev = t;
    }
    return out;
  };
  return scorer::ScorerHandle(id, static_cast<unsigned>(scorer::Capability::Logprobs), "stub", 1, b);
}

Outcome style_properties() {
  Outcome o;
  SplitMix g(303);
  double worst_anti = 0.0, worst_add = 0.0;
  for (int c = 0; c < 1000; ++c) {
    std::vector<std::string> t1(1 + below(g, 30)), t2(1 + below(g, 30));
    for (auto& t : t1) t = "t" + std::to_string(below(g, 50));
    for (auto& t : t2) t = "t" + std::to_string(below(g, 50));
    const auto a1 = random_lp(g, t1), v1 = random_lp(g, t1), a2 = random_lp(g, t2), v2 = random_lp(g, t2);
    if (style::style_appropriateness(a1, a1) != 0.0) o.check(false, "C(A,A) != 0");
    worst_anti = std::max(worst_anti, std::fabs(style::style_appropriateness(a1, v1) + style::style_appropriateness(v1, a1)));
    worst_add = std::max(worst_add, std::fabs(style::style_appropriateness(style::concat(a1, a2), style::concat(v1, v2)) -
                                              style::style_appropriateness(a1, v1) - style::style_appropriateness(a2, v2)));
  }
  o.check(worst_anti < 1e-12, "antisymmetry |delta| " + num(worst_anti));
  o.check(worst_add < 1e-9, "additivity |delta| " + num(worst_add));

  // Hand: tokens a a b a; academic P(a|start)=.5 P(a|a)=.9 P(b|a)=.1 P(a|b)=.2,
  // general P(a|start)=.8 P(a|a)=.3 P(b|a)=.7 P(a|b)=.6.
  const double hand = -(std::log(0.5 / 0.8) + std::log(0.9 / 0.3) + std::log(0.1 / 0.7) + std::log(0.2 / 0.6));
  const corpus::DocumentPair toy{"toy", "a a b a", "body", {}};
  const double got = score_sa(toy, bigram("acad", 0.9, 0.2, 0.5), bigram("gen", 0.3, 0.6, 0.8)).c;
  o.check(std::fabs(got - hand) <= 1e-10, "toy bigram |delta| " + num(std::fabs(got - hand)));
  if (o.pass) {
    o.detail = "antisymmetry " + num(worst_anti) + ", additivity " + num(worst_add) + ", toy bigram " +
               num(std::fabs(got - hand));
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome statistics_oracle() {
  Outcome o;
  const auto ref = csv::parse(read_file(testing::fixture("stats/pearson_reference.csv")));
  double worst_r = 0.0, worst_p = 0.0;
  for (const auto& row : ref.rows) {
    const auto s = testing::paired_series(std::stoull(row[0]));
    if (testing::sequential_sum(s.xs) != std::stod(row[2]) || testing::sequential_sum(s.ys) != std::stod(row[3])) {
      o.check(false, "series stream differs from reference for seed " + row[0]);
      continue;
    }
    const auto res = stats::pearson({"x", "y", s.xs, s.ys});
    worst_r = std::max(worst_r, std::fabs(res.r - std::stod(row[4])));
    worst_p = std::max(worst_p, std::fabs(res.p_two_tailed - std::stod(row[5])));
  }
  o.check(ref.rows.size() == 200, "expected 200 reference series");
  o.check(worst_r <= 1e-10, "r |delta| " + num(worst_r));
  o.check(worst_p <= 1e-8, "p |delta| " + num(worst_p));

  for (double df : {0.5, 1.0, 2.0, 10.0, 1e6}) {
    if (stats::t_cdf(0.0, df) != 0.5) o.check(false, "t_cdf(0, " + num(df) + ") != 0.5");
  }
  const double t2 = stats::t_cdf(2.0, 10.0);
  const double table_delta = std::fabs(t2 - 0.96331);
  o.check(table_delta <= 1e-6, "t_cdf(2, 10) = " + std::to_string(t2) + " is " + num(table_delta) +
                                   " from table value 0.96331 (table is rounded to 5 places)");

  for (std::uint64_t seed = 5000; seed < 5100; ++seed) {
    const auto grp = testing::two_groups(seed);
    const auto ab = stats::welch_t(grp.a, grp.b), ba = stats::welch_t(grp.b, grp.a);
    if (ab.t != -ba.t || ab.p != ba.p || ab.df != ba.df) o.check(false, "welch antisymmetry broken");
  }
  if (o.pass) o.detail = "r " + num(worst_r) + ", p " + num(worst_p) + ", t_cdf(2,10) " + num(table_delta);
  return o;
}

// ---------------------------------------------------------------------------

std::string random_text(SplitMix& g) {
  static const std::vector<std::u32string> pool = {U"a", U"B", U"Z", U" ", U"  ", U"\t", U"\n", U"\r\n",
                                                   U" ", U"Ä", U"Σ", U"İ", U"ẞ",
                                                   U"—", U".", U"⟨eqn⟩", U"\U0001F600", U"é"};
  std::u32string s;
  const std::size_t n = below(g, 60);
  for (std::size_t i = 0; i < n; ++i) {
    if (below(g, 5) == 0) {
      s.push_back(static_cast<char32_t>(0x20 + below(g, 0xd7ff - 0x20)));
    } else {
      s += pool[below(g, pool.size())];
    }
  }
  return text::encode_utf8(s);
}

Outcome ingestion_golden() {
  Outcome o;
  const auto result = corpus::ingest_tree(testing::fixture("ingest/corpus"), {}, 4);
  std::ostringstream os;
  corpus::write_jsonl(os, result.pairs);
  o.check(os.str() == read_file(testing::fixture("ingest/golden.jsonl")), "JSONL differs from golden");
  std::string failures;
  for (const auto& f : result.failures) failures += f.id + "\t" + f.message + "\n";
  o.check(failures == read_file(testing::fixture("ingest/golden_failures.txt")), "failure log differs from golden");

  SplitMix g(505);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto once = text::normalize(random_text(g));
    if (text::normalize(once) != once) ++bad;
  }
  o.check(bad == 0, std::to_string(bad) + " non-idempotent strings");
  if (o.pass) {
    o.detail = std::to_string(result.pairs.size()) + " pairs + " + std::to_string(result.failures.size()) +
               " logged failures byte-identical; 1000 strings idempotent";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  Outcome o;
  testing::TempDir dir;
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  auto e2e = [](const char* f) { return testing::fixture(std::string("e2e/") + f).string(); };
  const auto out = dir / "metrics.csv";
  const std::vector<std::string> args = {
      "--jobs",       "4",   "score",        "all",          "--pairs",    e2e("pairs.jsonl"),
      "--table",      e2e("table.txt"),      "--gen-scorer", e2e("generator.cfg"),
      "--embed-scorer", e2e("embedder.cfg"), "--scorer-a",   e2e("lm_academic.cfg"),
      "--scorer-b",   e2e("lm_general.cfg"), "--n-samples",  "2", "--max-tokens", "64",
      "--out",        out.string()};
  std::vector<std::string> snapshots;
  for (int run = 0; run < 2; ++run) {
    std::ostringstream sout, serr;
    const int code = cli::dispatch(args, sout, serr);
    if (code != 0) {
      o.check(false, "run " + std::to_string(run + 1) + " exit " + std::to_string(code) + ": " + serr.str());
      return o;
    }
    snapshots.push_back(read_file(out) + '\x1e' + read_file(dir / "metrics.csv.manifest.json") + '\x1e' +
                        read_file(dir / "metrics.csv.generations.jsonl"));
  }
  o.check(snapshots[0] == snapshots[1], "outputs differ between runs");
  const auto rows = csv::parse(read_file(out)).rows.size();
  o.check(rows == 5, std::to_string(rows) + " metric rows, expected 5");
  if (o.pass) o.detail = "5 rows; CSV, manifest and audit byte-identical across 2 runs";
  return o;
}

// ---------------------------------------------------------------------------

survey::ResponseRecord expert(const std::string& abs, int rater, int task, int func, int data) {
  survey::ResponseRecord r;
  r.abstract_id = abs;
  r.rater_id = "r" + std::to_string(rater);
  r.role = survey::Role::Expert;
  r.likert = {{"task_transp", task}, {"function_transp", func}, {"data_transp", data}};
  return r;
}

Outcome survey_suite() {
  Outcome o;
  for (int v = 1; v <= 5; ++v) {
    survey::ResponseRecord r;
    r.role = survey::Role::Crowd;
    r.likert = {{"func_fair", v}};
    auto once = survey::normalize_polarity(r);
    once.polarity_normalized = false;
    if (survey::normalize_polarity(once).likert.at("func_fair") != v) o.check(false, "polarity not an involution");
  }

  // Columns: task, function, data for raters 1..4 on A1..A3.
  const int panel[3][4][3] = {
      {{1, 2, 1}, {5, 2, 2}, {3, 2, 3}, {3, 2, 4}},
      {{1, 4, 5}, {5, 5, 5}, {1, 4, 5}, {5, 5, 4}},
      {{2, 1, 3}, {3, 1, 3}, {4, 5, 3}, {5, 5, 3}},
  };
  // Hand-computed per abstract: {mean, population variance} for task, function, data.
  const double sheet[3][3][2] = {
      {{3.0, 2.0}, {2.0, 0.0}, {2.5, 1.25}},
      {{3.0, 4.0}, {4.5, 0.25}, {4.75, 0.1875}},
      {{3.5, 1.25}, {3.0, 4.0}, {3.0, 0.0}},
  };
  std::vector<survey::ResponseRecord> recs;
  for (int a = 0; a < 3; ++a) {
    for (int r = 0; r < 4; ++r) {
      recs.push_back(expert("A" + std::to_string(a + 1), r + 1, panel[a][r][0], panel[a][r][1], panel[a][r][2]));
    }
  }
  const auto report = survey::aggregate(recs, survey::Role::Expert);
  o.check(report.aggregates.size() == 3, "expected 3 aggregates");
  const auto& keys = survey::expert_keys();
  for (std::size_t a = 0; a < report.aggregates.size() && a < 3; ++a) {
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& agg = report.aggregates[a];
      if (agg.means.at(keys[k]) != sheet[a][k][0] || agg.variances.at(keys[k]) != sheet[a][k][1]) {
        o.check(false, agg.abstract_id + " " + keys[k] + " differs from spreadsheet");
      }
    }
  }

  const auto pairs = corpus::read_jsonl(testing::fixture("e2e/pairs.jsonl"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<corpus::DocumentPair> pool;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (j != i) pool.push_back(pairs[j]);
    }
    const auto own = affinity::split_sentences(pairs[i].abstract_text);
    for (std::uint64_t seed : {1u, 2u, 99u}) {
      const auto q1 = survey::generate_retention_questions(pairs[i], pool, 5, seed);
      const auto q2 = survey::generate_retention_questions(pairs[i], pool, 5, seed);
      for (std::size_t q = 0; q < q1.size(); ++q) {
        if (q1[q].phrase != q2[q].phrase || q1[q].truth_present != q2[q].truth_present) {
          o.check(false, "retention not seed-deterministic");
        }
        const bool present = std::find(own.begin(), own.end(), q1[q].phrase) != own.end();
        if (present != q1[q].truth_present) o.check(false, "retention truth inconsistent: " + q1[q].phrase);
      }
    }
  }
  if (o.pass) o.detail = "involution on 1..5; 4x3 panel exact; retention deterministic and truthful";
  return o;
}

struct Criterion {
  const char* name;
  double limit_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"trigram recovery matches brute-force oracle", 5.0, recovery_oracle},
      {"sentence/document affinity matches nested-loop oracle", 10.0, affinity_oracle},
      {"style appropriateness properties and toy bigram", 1.0, style_properties},
      {"statistics match reference implementation", 5.0, statistics_oracle},
      {"ingestion golden suite and normalize idempotence", 2.0, ingestion_golden},
      {"offline score all is byte-reproducible", 10.0, end_to_end},
      {"survey polarity, aggregation and retention", 0.0, survey_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs >= c.limit_s) o.check(false, "runtime " + num(secs) + " s over " + num(c.limit_s) + " s");
    if (!o.pass) ++failed;
    std::printf("%s  %-55s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
