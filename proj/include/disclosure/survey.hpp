#pragma once

// Expert transparency ratings and crowd opinion/retention responses,
// aggregated per abstract.
//
// Likert answers are integers 1..5 where 5 is the positive pole. The crowd
// prompt func_fair ("I am concerned about the fairness of this system") is
// phrased negatively, so its scale is reversed (v -> 6 - v) exactly once
// before aggregation.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "disclosure/affinity.hpp"
#include "disclosure/corpus.hpp"
#include "disclosure/csv.hpp"
#include "disclosure/error.hpp"
#include "disclosure/hash.hpp"
#include "disclosure/stats.hpp"

namespace disclosure::survey {

enum class Role { Expert, Crowd };

inline const char* to_string(Role r) { return r == Role::Expert ? "expert" : "crowd"; }

inline Role parse_role(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "expert") return Role::Expert;
  if (s == "crowd") return Role::Crowd;
  throw InputError("role must be 'expert' or 'crowd', got '" + s + "'");
}

inline const std::vector<std::string>& expert_keys() {
  static const std::vector<std::string> k = {"task_transp", "function_transp", "data_transp"};
  return k;
}

inline const std::vector<std::string>& crowd_keys() {
  static const std::vector<std::string> k = {"task_underst", "task_fair", "func_underst",
                                             "func_fair",    "func_trust", "data_trust"};
  return k;
}

inline const std::vector<std::string>& keys_for(Role r) {
  return r == Role::Expert ? expert_keys() : crowd_keys();
}

inline constexpr const char* kReversedKey = "func_fair";
inline constexpr std::size_t kRetentionQuestions = 5;

struct RetentionAnswer {
  std::string question_id;
  bool answered_present = false;
  bool truth_present = false;
};

struct ResponseRecord {
  std::string abstract_id;
  std::string rater_id;
  Role role = Role::Crowd;
  std::map<std::string, int> likert;
  std::vector<RetentionAnswer> retention;
  std::optional<std::string> locale;
  bool polarity_normalized = false;

  void validate() const {
    const auto& keys = keys_for(role);
    const std::string who = "record (" + rater_id + ", " + abstract_id + ")";
    if (likert.size() != keys.size()) throw InputError(who + ": wrong set of Likert keys");
    for (const auto& k : keys) {
      auto it = likert.find(k);
      if (it == likert.end()) throw InputError(who + ": missing Likert key " + k);
      if (it->second < 1 || it->second > 5) throw InputError(who + ": Likert value out of 1..5 for " + k);
    }
    if (role == Role::Crowd && retention.size() != kRetentionQuestions) {
      throw InputError(who + ": crowd records need exactly 5 retention answers");
    }
  }
};

inline ResponseRecord normalize_polarity(const ResponseRecord& r) {
  if (r.role != Role::Crowd) throw InputError("polarity reversal applies to crowd records only");
  if (r.polarity_normalized) {
    throw InputError("record (" + r.rater_id + ", " + r.abstract_id + ") is already polarity-normalized");
  }
  ResponseRecord out = r;
  auto it = out.likert.find(kReversedKey);
  if (it == out.likert.end()) throw InputError("crowd record without func_fair");
  it->second = 6 - it->second;
  out.polarity_normalized = true;
  return out;
}

struct AbstractAggregate {
  std::string abstract_id;
  std::map<std::string, double> means;
  std::map<std::string, double> variances;  // population variance
  std::optional<double> retention_accuracy;
  std::size_t n_raters = 0;
};

struct AggregateReport {
  std::vector<AbstractAggregate> aggregates;
  std::vector<std::string> warnings;
};

// Per abstract: mean and population variance of every key, and the fraction
// of correct present/absent retention judgments. Integer arithmetic keeps the
// result independent of record order.
inline AggregateReport aggregate(const std::vector<ResponseRecord>& records, Role role) {
  AggregateReport report;
  std::map<std::string, std::vector<const ResponseRecord*>> by_abstract;
  std::set<std::string> other_role;
  for (const auto& r : records) {
    if (r.role != role) {
      other_role.insert(r.abstract_id);
      continue;
    }
    r.validate();
    if (role == Role::Crowd && !r.polarity_normalized) {
      throw InputError("crowd record (" + r.rater_id + ", " + r.abstract_id +
                       ") has not been polarity-normalized");
    }
    by_abstract[r.abstract_id].push_back(&r);
  }
  for (const auto& id : other_role) {
    if (!by_abstract.count(id)) {
      report.warnings.push_back("abstract " + id + " has no " + to_string(role) + " records; omitted");
    }
  }
  for (const auto& [id, recs] : by_abstract) {
    AbstractAggregate agg;
    agg.abstract_id = id;
    agg.n_raters = recs.size();
    const auto n = static_cast<std::int64_t>(recs.size());
    for (const auto& key : keys_for(role)) {
      std::int64_t sum = 0, sum_sq = 0;
      for (const auto* r : recs) {
        const std::int64_t v = r->likert.at(key);
        sum += v;
        sum_sq += v * v;
      }
      agg.means[key] = static_cast<double>(sum) / static_cast<double>(n);
      agg.variances[key] = static_cast<double>(n * sum_sq - sum * sum) / static_cast<double>(n * n);
    }
    std::size_t correct = 0, total = 0;
    for (const auto* r : recs) {
      for (const auto& a : r->retention) {
        ++total;
        if (a.answered_present == a.truth_present) ++correct;
      }
    }
    if (total > 0) agg.retention_accuracy = static_cast<double>(correct) / static_cast<double>(total);
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

struct RaterPair {
  std::string rater_a;
  std::string rater_b;
  stats::CorrelationResult result;
};

struct KeyReliability {
  std::string key;
  double mean_variance = 0.0;  // mean over abstracts of the within-abstract population variance
  double mean_pcc = 0.0;       // mean over rater pairs
  double p = 1.0;              // p of mean_pcc at n = number of abstracts
  std::size_t n_abstracts = 0;
  std::vector<RaterPair> pairs;
};

struct InterraterReport {
  std::vector<KeyReliability> keys;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinPairOverlap = 10;

inline InterraterReport interrater_report(const std::vector<ResponseRecord>& records) {
  InterraterReport report;
  // rater -> abstract -> record
  std::map<std::string, std::map<std::string, const ResponseRecord*>> grid;
  std::set<std::string> abstracts;
  for (const auto& r : records) {
    if (r.role != Role::Expert) continue;
    r.validate();
    if (!grid[r.rater_id].emplace(r.abstract_id, &r).second) {
      throw InputError("duplicate rating by " + r.rater_id + " for " + r.abstract_id);
    }
    abstracts.insert(r.abstract_id);
  }
  if (grid.size() < 2) throw InputError("inter-rater reliability needs at least 2 expert raters");

  bool complete = true;
  for (const auto& [rater, rated] : grid) {
    if (rated.size() != abstracts.size()) complete = false;
  }
  if (!complete) {
    report.warnings.push_back("incomplete panel: pairwise deletion with minimum overlap of " +
                              std::to_string(kMinPairOverlap) + " abstracts");
  }

  for (const auto& key : expert_keys()) {
    KeyReliability kr;
    kr.key = key;
    kr.n_abstracts = abstracts.size();

    double var_sum = 0.0;
    for (const auto& id : abstracts) {
      std::int64_t n = 0, sum = 0, sum_sq = 0;
      for (const auto& [rater, rated] : grid) {
        if (auto it = rated.find(id); it != rated.end()) {
          const std::int64_t v = it->second->likert.at(key);
          ++n;
          sum += v;
          sum_sq += v * v;
        }
      }
      var_sum += static_cast<double>(n * sum_sq - sum * sum) / static_cast<double>(n * n);
    }
    kr.mean_variance = var_sum / static_cast<double>(abstracts.size());

    for (auto a = grid.begin(); a != grid.end(); ++a) {
      for (auto b = std::next(a); b != grid.end(); ++b) {
        stats::PairedSeries s{a->first, b->first, {}, {}};
        for (const auto& [id, rec] : a->second) {
          if (auto it = b->second.find(id); it != b->second.end()) {
            s.xs.push_back(rec->likert.at(key));
            s.ys.push_back(it->second->likert.at(key));
          }
        }
        const std::string label = key + " " + a->first + "/" + b->first;
        if (!complete && s.xs.size() < kMinPairOverlap) {
          report.warnings.push_back(label + ": overlap " + std::to_string(s.xs.size()) + " < " +
                                    std::to_string(kMinPairOverlap) + ", pair skipped");
          continue;
        }
        try {
          kr.pairs.push_back({a->first, b->first, stats::pearson(s)});
        } catch (const InputError& e) {
          report.warnings.push_back(label + ": " + e.what() + ", pair skipped");
        }
      }
    }
    if (kr.pairs.empty()) {
      report.warnings.push_back(key + ": no usable rater pairs");
      kr.mean_pcc = std::numeric_limits<double>::quiet_NaN();
      kr.p = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (const auto& p : kr.pairs) sum += p.result.r;
      kr.mean_pcc = sum / static_cast<double>(kr.pairs.size());
      kr.p = kr.n_abstracts >= 3 ? stats::correlation_p(kr.mean_pcc, kr.n_abstracts)
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    report.keys.push_back(std::move(kr));
  }
  return report;
}

struct RetentionQuestion {
  std::string question_id;
  std::string phrase;
  bool truth_present = false;
};

// Each question is a full sentence, drawn with probability 1/2 from the
// target abstract and otherwise from a random pool abstract. Duplicate
// phrases are redrawn a bounded number of times.
inline std::vector<RetentionQuestion> generate_retention_questions(
    const corpus::DocumentPair& target, const std::vector<corpus::DocumentPair>& pool, std::size_t k,
    std::uint64_t seed) {
  if (k < 2) throw InputError("need at least 2 retention questions");
  const auto own = affinity::split_sentences(target.abstract_text);
  if (own.empty()) throw InputError("target abstract " + target.id + " has no sentences");
  std::vector<std::vector<std::string>> others;
  for (const auto& p : pool) {
    if (p.id == target.id) throw InputError("retention pool must exclude the target " + target.id);
    std::vector<std::string> sents;
    for (auto& sent : affinity::split_sentences(p.abstract_text)) {
      // A distractor that also occurs in the target would be a false "absent".
      if (std::find(own.begin(), own.end(), sent) == own.end()) sents.push_back(std::move(sent));
    }
    if (!sents.empty()) others.push_back(std::move(sents));
  }
  if (others.empty()) throw InputError("empty retention pool");

  std::mt19937_64 rng(seed ^ fnv1a64(target.id));
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  std::vector<RetentionQuestion> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < k; ++i) {
    RetentionQuestion q;
    q.question_id = target.id + "_q" + std::to_string(i + 1);
    for (int attempt = 0; attempt < 32; ++attempt) {
      q.truth_present = (rng() >> 63) != 0;
      if (q.truth_present) {
        q.phrase = own[pick(own.size())];
      } else {
        const auto& doc = others[pick(others.size())];
        q.phrase = doc[pick(doc.size())];
      }
      if (!used.count(q.phrase)) break;
    }
    used.insert(q.phrase);
    out.push_back(std::move(q));
  }
  return out;
}

// Column layout of a response CSV, read from a sidecar JSON:
//   {"abstract_id": "...", "rater_id": "...", "role": "...", "locale": "...",
//    "likert": {"<key>": "<column>", ...},
//    "retention": [{"id": "q1", "answer": "q1", "truth": "q1_truth"}, ...],
//    "polarity_normalized": false}
// Every field is optional; defaults use the key names as column names.
struct ResponseSchema {
  std::string abstract_id = "abstract_id";
  std::string rater_id = "rater_id";
  std::string role = "role";
  std::string locale = "locale";
  std::map<std::string, std::string> likert;
  struct Retention {
    std::string id, answer, truth;
  };
  std::vector<Retention> retention;
  bool polarity_normalized = false;

  static ResponseSchema defaults() {
    ResponseSchema s;
    for (const auto& k : expert_keys()) s.likert[k] = k;
    for (const auto& k : crowd_keys()) s.likert[k] = k;
    for (std::size_t i = 1; i <= kRetentionQuestions; ++i) {
      const std::string q = "q" + std::to_string(i);
      s.retention.push_back({q, q, q + "_truth"});
    }
    return s;
  }

  static ResponseSchema from_json(const nlohmann::json& j) {
    ResponseSchema s = defaults();
    try {
      s.abstract_id = j.value("abstract_id", s.abstract_id);
      s.rater_id = j.value("rater_id", s.rater_id);
      s.role = j.value("role", s.role);
      s.locale = j.value("locale", s.locale);
      s.polarity_normalized = j.value("polarity_normalized", false);
      if (j.contains("likert")) {
        for (auto& [k, v] : j["likert"].items()) s.likert[k] = v.get<std::string>();
      }
      if (j.contains("retention")) {
        s.retention.clear();
        for (const auto& q : j["retention"]) {
          s.retention.push_back({q.at("id").get<std::string>(), q.at("answer").get<std::string>(),
                                 q.at("truth").get<std::string>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("bad response schema: ") + e.what());
    }
    return s;
  }
};

inline bool parse_presence(const std::string& raw, const std::string& where) {
  std::string v = text::trim(raw);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "1" || v == "true" || v == "yes" || v == "y" || v == "present") return true;
  if (v == "0" || v == "false" || v == "no" || v == "n" || v == "absent") return false;
  throw InputError(where + ": cannot read '" + raw + "' as present/absent");
}

// Parses a response CSV. Rows without a role column take `default_role`.
inline std::vector<ResponseRecord> parse_responses(const std::string& data, const ResponseSchema& schema,
                                                   std::optional<Role> default_role = std::nullopt) {
  const auto table = csv::parse(data);
  const auto abs_col = table.require_column(schema.abstract_id);
  const auto rater_col = table.require_column(schema.rater_id);
  const auto role_col = table.column(schema.role);
  const auto locale_col = table.column(schema.locale);
  if (!role_col && !default_role) throw InputError("response file has no role column; pass a role");

  std::vector<ResponseRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "responses row " + std::to_string(r + 2);
    ResponseRecord rec;
    rec.abstract_id = text::trim(row[abs_col]);
    rec.rater_id = text::trim(row[rater_col]);
    rec.role = role_col ? parse_role(text::trim(row[*role_col])) : *default_role;
    if (locale_col && !row[*locale_col].empty()) rec.locale = row[*locale_col];
    for (const auto& key : keys_for(rec.role)) {
      auto col_name = schema.likert.count(key) ? schema.likert.at(key) : key;
      const auto col = table.require_column(col_name);
      const std::string cell = text::trim(row[col]);
      int v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw InputError(where + ": Likert value '" + cell + "' for " + key + " is not an integer");
      }
      rec.likert[key] = v;
    }
    if (rec.role == Role::Crowd) {
      for (const auto& q : schema.retention) {
        const auto a = table.require_column(q.answer);
        const auto t = table.require_column(q.truth);
        rec.retention.push_back({rec.abstract_id + "_" + q.id, parse_presence(row[a], where),
                                 parse_presence(row[t], where)});
      }
      rec.polarity_normalized = schema.polarity_normalized;
    }
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<ResponseRecord> load_responses(const std::filesystem::path& path,
                                                  std::optional<std::filesystem::path> schema_path = {},
                                                  std::optional<Role> default_role = std::nullopt) {
  ResponseSchema schema = ResponseSchema::defaults();
  if (!schema_path) {
    auto sidecar = path;
    sidecar.replace_extension(".schema.json");
    if (std::filesystem::exists(sidecar)) schema_path = sidecar;
  }
  if (schema_path) {
    try {
      schema = ResponseSchema::from_json(nlohmann::json::parse(read_file(*schema_path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("cannot parse schema " + schema_path->string() + ": " + e.what());
    }
  }
  return parse_responses(read_file(path), schema, default_role);
}

}  // namespace disclosure::survey
