#pragma once

// Command-line front end. dispatch() is the whole program; tools/ only
// forwards argv. Exit codes: 0 success, 1 input/usage error, 2 scorer or
// transport error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "disclosure/affinity.hpp"
#include "disclosure/corpus.hpp"
#include "disclosure/csv.hpp"
#include "disclosure/error.hpp"
#include "disclosure/hash.hpp"
#include "disclosure/manifest.hpp"
#include "disclosure/ngram.hpp"
#include "disclosure/parallel.hpp"
#include "disclosure/scorer_config.hpp"
#include "disclosure/scoring.hpp"
#include "disclosure/stats.hpp"
#include "disclosure/survey.hpp"

namespace disclosure::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitScorer = 2;

inline constexpr const char* kRrHeader =
    "# R_R: fraction of reference trigram self-information (natural log) recovered by generation; "
    "higher_means_more_replicable";
inline constexpr const char* kRaHeader =
    "# R_A: mean over iterated sentences of the best sentence BERTscore; higher_means_more_replicable";
inline constexpr const char* kSaHeader =
    "# C_higher_means_more_layperson_appropriate; C = -sum(logp_A - logp_V); log=natural; "
    "logprob_floor=-30; C_per_token = C / n_tokens";

namespace detail {

inline fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

inline void emit(const fs::path& path, const std::string& bytes, RunManifest& manifest) {
  write_file(path, bytes);
  manifest.add_output(path);
}

inline void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

inline std::string fmt(double v) { return text::format_double(v); }

struct ScorerSlot {
  std::string option;
  std::string value;
};

inline scorer::ScorerHandle open_recorded(const std::string& role, const std::string& name,
                                          const scorer::OpenOptions& opts, RunManifest& manifest) {
  auto cfg = scorer::load_config(name);
  auto handle = scorer::open_scorer(cfg, opts);
  manifest.config_hashes[role] = cfg.digest;
  manifest.model_ids[role] = handle.model_id();
  return handle;
}

inline std::optional<std::size_t> id_column(const csv::Table& t) {
  for (const char* name : {"id", "abstract_id", "doc_id"}) {
    if (auto c = t.column(name)) return c;
  }
  return std::nullopt;
}

inline bool parse_number(const std::string& cell, double& out) {
  const std::string s = text::trim(cell);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Numeric columns keyed by the id column. Counting columns (n_*), seeds and
// config hashes are skipped unless named explicitly.
inline std::vector<stats::Column> load_columns(const fs::path& path, const std::vector<std::string>& only,
                                               std::vector<std::string>& warnings) {
  const auto table = csv::parse(read_file(path));
  const auto idc = id_column(table);
  if (!idc) throw InputError(path.string() + ": no id/abstract_id/doc_id column");
  std::vector<stats::Column> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *idc) continue;
    const auto& name = table.header[c];
    if (!only.empty()) {
      if (std::find(only.begin(), only.end(), name) == only.end()) continue;
    } else if (name.rfind("n_", 0) == 0 || name == "seed" || name == "config_hash") {
      continue;
    }
    stats::Column col{name, {}};
    for (const auto& row : table.rows) {
      double v = 0;
      if (parse_number(row[c], v)) {
        if (!col.values.emplace(row[*idc], v).second) {
          warnings.push_back(path.string() + ": duplicate id " + row[*idc] + " in column " + name);
        }
      }
    }
    if (!col.values.empty()) cols.push_back(std::move(col));
  }
  for (const auto& name : only) {
    if (std::none_of(cols.begin(), cols.end(), [&](const auto& c) { return c.label == name; })) {
      throw InputError(path.string() + ": no numeric column '" + name + "'");
    }
  }
  return cols;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto& part : text::split(s, ',')) {
    auto t = text::trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace detail

struct GenOptions {
  int max_tokens = scorer::GenerationConfig{}.max_tokens;
  int n_samples = scorer::GenerationConfig{}.n_samples;
  double temperature = scorer::GenerationConfig{}.temperature;
  std::uint64_t seed = scorer::GenerationConfig{}.seed;

  scorer::GenerationConfig config() const { return {max_tokens, n_samples, temperature, seed}; }

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-tokens", max_tokens, "Tokens per generated sample")->capture_default_str();
    cmd->add_option("--n-samples", n_samples, "Generated samples per abstract")->capture_default_str();
    cmd->add_option("--temperature", temperature, "Sampling temperature (0 = greedy)")->capture_default_str();
    cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  }

  void record(RunManifest& m) const {
    m.seeds["generation"] = seed;
    m.parameters["max_tokens"] = std::to_string(max_tokens);
    m.parameters["n_samples"] = std::to_string(n_samples);
    m.parameters["temperature"] = text::format_double(temperature);
  }
};

class Program {
 public:
  Program(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Disclosive-transparency metrics over (abstract, document) corpora", "disclosure"};
    app.set_version_flag("--version", std::string("disclosure ") + kToolVersion);
    app.add_option("--jobs", jobs_, "Worker threads across all stages")->capture_default_str();
    app.add_flag("--allow-network", allow_network_, "Let cache misses fall through to network backends");
    app.require_subcommand(1);
    app.fallthrough();

    build_ingest(app);
    build_ngram(app);
    build_score(app);
    build_survey(app);
    build_analyze(app);
    build_curve(app);

    for (int i = 0; i < argc; ++i) {
      manifest_.argv.emplace_back(i == 0 ? fs::path(argv[0]).filename().string() : std::string(argv[i]));
    }
    if (argc <= 1) {
      err_ << app.help();
      return kExitInput;
    }
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out_ << "disclosure " << kToolVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n\n" << app.help();
      return kExitInput;
    }

    try {
      action_();
    } catch (const ScorerError& e) {
      err_ << "scorer error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
      return kExitScorer;
    } catch (const InputError& e) {
      err_ << "input error: " << e.what() << '\n';
      return kExitInput;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitInput;
    }
    return kExitOk;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::size_t jobs_ = 1;
  bool allow_network_ = false;
  std::function<void()> action_;
  RunManifest manifest_;

  scorer::OpenOptions open_options() const {
    scorer::OpenOptions o;
    o.allow_network = allow_network_;
    return o;
  }

  void finish(const fs::path& out) {
    manifest_.parameters["jobs"] = std::to_string(jobs_);
    manifest_.write(detail::manifest_path(out));
  }

  // ingest ------------------------------------------------------------------
  struct IngestArgs {
    std::string root, exclude, out;
  } ingest_;

  void build_ingest(CLI::App& app) {
    auto* cmd = app.add_subcommand("ingest", "Convert a tree of LaTeX manuscripts into pairs JSONL");
    cmd->add_option("--root", ingest_.root, "One subdirectory per manuscript")->required();
    cmd->add_option("--exclude", ingest_.exclude, "File of manuscript ids to skip (default ROOT/exclude.txt)");
    cmd->add_option("--out", ingest_.out, "Output JSONL")->required();
    cmd->add_option("--jobs", jobs_, "Worker threads");
    cmd->callback([this] { action_ = [this] { run_ingest(); }; });
  }

  void run_ingest() {
    manifest_.command = "ingest";
    std::set<std::string> excluded;
    fs::path exclude = ingest_.exclude;
    if (exclude.empty() && fs::exists(fs::path(ingest_.root) / "exclude.txt")) {
      exclude = fs::path(ingest_.root) / "exclude.txt";
    }
    if (!exclude.empty()) {
      excluded = corpus::read_exclusion_list(exclude);
      manifest_.add_input(exclude);
    }
    auto result = corpus::ingest_tree(ingest_.root, excluded, jobs_);
    detail::print_warnings(err_, result.warnings);
    for (const auto& f : result.failures) err_ << "failed: " << f.id << ": " << f.message << '\n';
    std::ostringstream os;
    corpus::write_jsonl(os, result.pairs);
    detail::emit(ingest_.out, os.str(), manifest_);
    manifest_.parameters["root"] = ingest_.root;
    manifest_.parameters["pairs"] = std::to_string(result.pairs.size());
    manifest_.parameters["failures"] = std::to_string(result.failures.size());
    manifest_.parameters["excluded"] = std::to_string(result.excluded.size());
    err_ << "ingested " << result.pairs.size() << " pairs, " << result.failures.size() << " failures, "
         << result.excluded.size() << " excluded\n";
    finish(ingest_.out);
  }

  // ngram -------------------------------------------------------------------
  struct NgramArgs {
    std::string pairs, field = "body", out;
    double alpha = 1.0;
  } ngram_;

  void build_ngram(CLI::App& app) {
    auto* grp = app.add_subcommand("ngram", "Trigram statistics");
    grp->require_subcommand(1);
    auto* cmd = grp->add_subcommand("build", "Build the global trigram table");
    cmd->add_option("--pairs", ngram_.pairs, "Pairs JSONL")->required();
    cmd->add_option("--field", ngram_.field, "Text field to count")
        ->check(CLI::IsMember({"body", "abstract"}))
        ->capture_default_str();
    cmd->add_option("--alpha", ngram_.alpha, "Add-alpha smoothing")->capture_default_str();
    cmd->add_option("--out", ngram_.out, "Table file")->required();
    cmd->callback([this] { action_ = [this] { run_ngram_build(); }; });
  }

  void run_ngram_build() {
    manifest_.command = "ngram build";
    const auto pairs = corpus::read_jsonl(ngram_.pairs);
    manifest_.add_input(ngram_.pairs);
    std::vector<std::string> texts;
    texts.reserve(pairs.size());
    for (const auto& p : pairs) texts.push_back(ngram_.field == "body" ? p.body_text : p.abstract_text);
    // Per-worker partial tables merged in a fixed order.
    const std::size_t shards = std::max<std::size_t>(1, std::min(jobs_, texts.size()));
    auto partial = parallel_map(shards, shards, [&](std::size_t s) {
      ngram::TrigramTable t(ngram_.alpha);
      for (std::size_t i = s; i < texts.size(); i += shards) t.add(ngram::tokenize(texts[i]));
      return t;
    });
    if (texts.empty()) throw InputError("cannot build a trigram table from an empty corpus");
    ngram::TrigramTable table(ngram_.alpha);
    for (const auto& t : partial) table.merge(t);
    if (table.total() == 0) throw InputError("corpus contains no trigrams");
    std::ostringstream os;
    ngram::write_table(os, table);
    detail::emit(ngram_.out, os.str(), manifest_);
    manifest_.parameters["alpha"] = text::format_double(ngram_.alpha);
    manifest_.parameters["field"] = ngram_.field;
    finish(ngram_.out);
  }

  // score -------------------------------------------------------------------
  struct ScoreArgs {
    std::string pairs, table, scorer, scorer_a, scorer_b, gen_scorer, embed_scorer, out, curves, audit;
    std::string direction = "doc";
  } score_;
  GenOptions gen_;

  void build_score(CLI::App& app) {
    auto* grp = app.add_subcommand("score", "Compute transparency metrics");
    grp->require_subcommand(1);

    auto* rr = grp->add_subcommand("rr", "Trigram information recovery R_R");
    rr->add_option("--pairs", score_.pairs)->required();
    rr->add_option("--table", score_.table, "Trigram table")->required();
    rr->add_option("--scorer", score_.scorer, "Generation scorer config")->required();
    rr->add_option("--audit", score_.audit, "Generated texts JSONL (default OUT.generations.jsonl)");
    rr->add_option("--out", score_.out)->required();
    gen_.attach(rr);
    rr->callback([this] { action_ = [this] { run_score_rr(); }; });

    auto* ra = grp->add_subcommand("ra", "Sentence-affinity replicability R_A");
    ra->add_option("--pairs", score_.pairs)->required();
    ra->add_option("--scorer", score_.scorer, "Embedding scorer config")->required();
    ra->add_option("--direction", score_.direction, "doc: iterate body sentences; abstract: iterate abstract")
        ->check(CLI::IsMember({"doc", "abstract"}))
        ->capture_default_str();
    ra->add_option("--curves", score_.curves, "Directory for per-document curve CSV/JSON");
    ra->add_option("--out", score_.out)->required();
    ra->callback([this] { action_ = [this] { run_score_ra(); }; });

    auto* sa = grp->add_subcommand("sa", "Style appropriateness C");
    sa->add_option("--pairs", score_.pairs)->required();
    sa->add_option("--scorer-a", score_.scorer_a, "Academic-tuned LM config")->required();
    sa->add_option("--scorer-b", score_.scorer_b, "General LM config")->required();
    sa->add_option("--out", score_.out)->required();
    sa->callback([this] { action_ = [this] { run_score_sa(); }; });

    auto* all = grp->add_subcommand("all", "R_R, R_A and C in one metrics table");
    all->add_option("--pairs", score_.pairs)->required();
    all->add_option("--table", score_.table)->required();
    all->add_option("--gen-scorer", score_.gen_scorer)->required();
    all->add_option("--embed-scorer", score_.embed_scorer)->required();
    all->add_option("--scorer-a", score_.scorer_a)->required();
    all->add_option("--scorer-b", score_.scorer_b)->required();
    all->add_option("--direction", score_.direction)
        ->check(CLI::IsMember({"doc", "abstract"}))
        ->capture_default_str();
    all->add_option("--curves", score_.curves);
    all->add_option("--audit", score_.audit);
    all->add_option("--out", score_.out)->required();
    gen_.attach(all);
    all->callback([this] { action_ = [this] { run_score_all(); }; });
  }

  std::vector<corpus::DocumentPair> load_pairs() {
    auto pairs = corpus::read_jsonl(score_.pairs);
    manifest_.add_input(score_.pairs);
    return pairs;
  }

  ngram::TrigramTable load_table() {
    std::ifstream in(score_.table, std::ios::binary);
    if (!in) throw InputError("cannot read " + score_.table);
    auto table = ngram::read_table(in);
    manifest_.add_input(score_.table);
    return table;
  }

  template <typename Fn>
  auto over_pairs(const std::vector<corpus::DocumentPair>& pairs, Fn fn) {
    return parallel_map(jobs_, pairs.size(), [&](std::size_t i) { return fn(pairs[i]); });
  }

  void write_audit(const std::vector<RrScore>& scores) {
    const fs::path path = score_.audit.empty() ? fs::path(score_.out + ".generations.jsonl") : fs::path(score_.audit);
    std::ostringstream os;
    for (const auto& s : scores) {
      nlohmann::ordered_json j;
      j["id"] = s.id;
      j["model_id"] = s.model_id;
      j["seed"] = s.seed;
      j["generated"] = s.generated;
      os << j.dump(-1, ' ', false) << '\n';
    }
    detail::emit(path, os.str(), manifest_);
  }

  void write_curves(const std::vector<RaScore>& scores) {
    if (score_.curves.empty()) return;
    for (const auto& s : scores) {
      std::ostringstream os;
      affinity::write_curve_csv(os, s.curve);
      detail::emit(fs::path(score_.curves) / (s.id + ".csv"), os.str(), manifest_);
      detail::emit(fs::path(score_.curves) / (s.id + ".json"),
                   affinity::curve_summary_json(s.curve, s.direction, s.model_id), manifest_);
    }
  }

  void run_score_rr() {
    manifest_.command = "score rr";
    const auto pairs = load_pairs();
    const auto table = load_table();
    auto gen = detail::open_recorded("generator", score_.scorer, open_options(), manifest_);
    gen_.record(manifest_);
    const auto cfg = gen_.config();
    auto scores = over_pairs(pairs, [&](const auto& p) { return score_rr(p, table, gen, cfg); });
    std::ostringstream os;
    os << kRrHeader << '\n';
    csv::write_row(os, {"id", "R_R", "n_ref_trigrams", "n_recovered_trigrams", "model_id", "seed"});
    for (const auto& s : scores) {
      csv::write_row(os, {s.id, detail::fmt(s.rr), std::to_string(s.reference_trigrams),
                          std::to_string(s.recovered_trigrams), s.model_id, std::to_string(s.seed)});
    }
    detail::emit(score_.out, os.str(), manifest_);
    write_audit(scores);
    finish(score_.out);
  }

  void run_score_ra() {
    manifest_.command = "score ra";
    const auto pairs = load_pairs();
    auto emb = detail::open_recorded("embedder", score_.scorer, open_options(), manifest_);
    const auto direction = affinity::parse_direction(score_.direction);
    manifest_.parameters["direction"] = score_.direction;
    auto scores = over_pairs(pairs, [&](const auto& p) { return score_ra(p, emb, direction); });
    std::ostringstream os;
    os << kRaHeader << '\n';
    csv::write_row(os, {"id", "R_A", "direction", "n_points", "model_id"});
    for (const auto& s : scores) {
      csv::write_row(os, {s.id, detail::fmt(s.ra), affinity::to_string(s.direction),
                          std::to_string(s.curve.points.size()), s.model_id});
    }
    detail::emit(score_.out, os.str(), manifest_);
    write_curves(scores);
    finish(score_.out);
  }

  void run_score_sa() {
    manifest_.command = "score sa";
    const auto pairs = load_pairs();
    auto a = detail::open_recorded("model_a", score_.scorer_a, open_options(), manifest_);
    auto b = detail::open_recorded("model_b", score_.scorer_b, open_options(), manifest_);
    auto scores = over_pairs(pairs, [&](const auto& p) { return score_sa(p, a, b); });
    std::ostringstream os;
    os << kSaHeader << '\n';
    csv::write_row(os, {"id", "C", "C_per_token", "n_tokens", "model_a", "model_b"});
    for (const auto& s : scores) {
      csv::write_row(os, {s.id, detail::fmt(s.c), detail::fmt(s.c_per_token), std::to_string(s.n_tokens),
                          s.model_a, s.model_b});
    }
    detail::emit(score_.out, os.str(), manifest_);
    finish(score_.out);
  }

  void run_score_all() {
    manifest_.command = "score all";
    const auto pairs = load_pairs();
    const auto table = load_table();
    auto gen = detail::open_recorded("generator", score_.gen_scorer, open_options(), manifest_);
    auto emb = detail::open_recorded("embedder", score_.embed_scorer, open_options(), manifest_);
    auto a = detail::open_recorded("model_a", score_.scorer_a, open_options(), manifest_);
    auto b = detail::open_recorded("model_b", score_.scorer_b, open_options(), manifest_);
    gen_.record(manifest_);
    const auto cfg = gen_.config();
    const auto direction = affinity::parse_direction(score_.direction);
    manifest_.parameters["direction"] = score_.direction;
    manifest_.parameters["alpha"] = text::format_double(table.alpha());

    // Ties every row to the exact scorer configs, generation settings and table.
    std::string material;
    for (const auto& [k, v] : manifest_.config_hashes) material += k + "=" + v + ";";
    for (const auto& [k, v] : manifest_.parameters) material += k + "=" + v + ";";
    material += "seed=" + std::to_string(cfg.seed) + ";table=" + manifest_.inputs[fs::path(score_.table).generic_string()];
    const std::string config_hash = sha256_hex(material).substr(0, 16);

    struct Row {
      RrScore rr;
      RaScore ra;
      SaScore sa;
    };
    auto rows = over_pairs(pairs, [&](const auto& p) {
      return Row{score_rr(p, table, gen, cfg), score_ra(p, emb, direction), score_sa(p, a, b)};
    });

    std::ostringstream os;
    os << kRrHeader << '\n' << kRaHeader << '\n' << kSaHeader << '\n';
    csv::write_row(os, {"id", "R_R", "R_A", "C", "C_per_token", "n_tokens", "ra_direction", "rr_model",
                        "ra_model", "model_a", "model_b", "seed", "config_hash"});
    for (const auto& r : rows) {
      csv::write_row(os, {r.rr.id, detail::fmt(r.rr.rr), detail::fmt(r.ra.ra), detail::fmt(r.sa.c),
                          detail::fmt(r.sa.c_per_token), std::to_string(r.sa.n_tokens),
                          affinity::to_string(r.ra.direction), r.rr.model_id, r.ra.model_id, r.sa.model_a,
                          r.sa.model_b, std::to_string(r.rr.seed), config_hash});
    }
    detail::emit(score_.out, os.str(), manifest_);
    std::vector<RrScore> rr;
    std::vector<RaScore> ra;
    for (auto& r : rows) {
      rr.push_back(r.rr);
      ra.push_back(r.ra);
    }
    write_audit(rr);
    write_curves(ra);
    finish(score_.out);
  }

  // survey ------------------------------------------------------------------
  struct SurveyArgs {
    std::string responses, schema, role = "crowd", out, pairs;
    std::size_t k = 5;
    std::uint64_t seed = 0;
    bool normalized = false;
  } survey_;

  void build_survey(CLI::App& app) {
    auto* grp = app.add_subcommand("survey", "Expert and crowd response analysis");
    grp->require_subcommand(1);

    auto* agg = grp->add_subcommand("aggregate", "Per-abstract means, variances, retention accuracy");
    agg->add_option("--responses", survey_.responses)->required();
    agg->add_option("--schema", survey_.schema, "Column schema JSON (default RESPONSES.schema.json)");
    agg->add_option("--role", survey_.role)->check(CLI::IsMember({"crowd", "expert"}))->capture_default_str();
    agg->add_flag("--polarity-normalized", survey_.normalized, "func_fair is already reversed in the file");
    agg->add_option("--out", survey_.out)->required();
    agg->callback([this] { action_ = [this] { run_survey_aggregate(); }; });

    auto* irr = grp->add_subcommand("irr", "Expert inter-rater reliability");
    irr->add_option("--responses", survey_.responses)->required();
    irr->add_option("--schema", survey_.schema);
    irr->add_option("--out", survey_.out)->required();
    irr->callback([this] { action_ = [this] { run_survey_irr(); }; });

    auto* gen = grp->add_subcommand("gen-retention", "Generate retention questions per abstract");
    gen->add_option("--pairs", survey_.pairs)->required();
    gen->add_option("--k", survey_.k)->capture_default_str();
    gen->add_option("--seed", survey_.seed)->required();
    gen->add_option("--out", survey_.out)->required();
    gen->callback([this] { action_ = [this] { run_survey_gen(); }; });
  }

  std::vector<survey::ResponseRecord> load_responses(std::optional<survey::Role> role) {
    std::optional<fs::path> schema;
    if (!survey_.schema.empty()) {
      schema = survey_.schema;
      manifest_.add_input(*schema);
    }
    auto records = survey::load_responses(survey_.responses, schema, role);
    manifest_.add_input(survey_.responses);
    return records;
  }

  void run_survey_aggregate() {
    manifest_.command = "survey aggregate";
    const auto role = survey::parse_role(survey_.role);
    auto records = load_responses(role);
    if (role == survey::Role::Crowd) {
      for (auto& r : records) {
        if (r.role != survey::Role::Crowd) continue;
        if (survey_.normalized) {
          r.polarity_normalized = true;
        } else if (!r.polarity_normalized) {
          r = survey::normalize_polarity(r);
        }
      }
    }
    auto report = survey::aggregate(records, role);
    detail::print_warnings(err_, report.warnings);
    const auto& keys = survey::keys_for(role);
    std::ostringstream os;
    os << "# variance=population; likert 1..5 higher_means_more_positive; func_fair reversed (6 - v)\n";
    std::vector<std::string> header = {"abstract_id", "n_raters"};
    for (const auto& k : keys) header.push_back(k + "_mean");
    for (const auto& k : keys) header.push_back(k + "_var");
    header.push_back("retention_accuracy");
    csv::write_row(os, header);
    for (const auto& a : report.aggregates) {
      std::vector<std::string> row = {a.abstract_id, std::to_string(a.n_raters)};
      for (const auto& k : keys) row.push_back(detail::fmt(a.means.at(k)));
      for (const auto& k : keys) row.push_back(detail::fmt(a.variances.at(k)));
      row.push_back(a.retention_accuracy ? detail::fmt(*a.retention_accuracy) : "");
      csv::write_row(os, row);
    }
    manifest_.parameters["role"] = survey_.role;
    detail::emit(survey_.out, os.str(), manifest_);
    finish(survey_.out);
  }

  void run_survey_irr() {
    manifest_.command = "survey irr";
    auto records = load_responses(survey::Role::Expert);
    auto report = survey::interrater_report(records);
    detail::print_warnings(err_, report.warnings);
    std::ostringstream os;
    os << "# variance=population (mean within-abstract); pcc=mean pairwise Pearson; "
          "p=two-tailed p of mean pcc at n=n_abstracts\n";
    csv::write_row(os, {"key", "mean_variance", "mean_pcc", "p", "n_abstracts", "n_pairs"});
    std::ostringstream pairs;
    csv::write_row(pairs, {"key", "rater_a", "rater_b", "n", "r", "t", "p"});
    for (const auto& k : report.keys) {
      csv::write_row(os, {k.key, detail::fmt(k.mean_variance), detail::fmt(k.mean_pcc), detail::fmt(k.p),
                          std::to_string(k.n_abstracts), std::to_string(k.pairs.size())});
      for (const auto& p : k.pairs) {
        csv::write_row(pairs, {k.key, p.rater_a, p.rater_b, std::to_string(p.result.n), detail::fmt(p.result.r),
                               detail::fmt(p.result.t_stat), detail::fmt(p.result.p_two_tailed)});
      }
    }
    detail::emit(survey_.out, os.str(), manifest_);
    detail::emit(survey_.out + ".pairs.csv", pairs.str(), manifest_);
    finish(survey_.out);
  }

  void run_survey_gen() {
    manifest_.command = "survey gen-retention";
    auto pairs = corpus::read_jsonl(survey_.pairs);
    manifest_.add_input(survey_.pairs);
    manifest_.seeds["retention"] = survey_.seed;
    std::ostringstream os;
    csv::write_row(os, {"abstract_id", "question_id", "phrase", "truth_present"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::vector<corpus::DocumentPair> pool;
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (j != i) pool.push_back(pairs[j]);
      }
      for (const auto& q : survey::generate_retention_questions(pairs[i], pool, survey_.k, survey_.seed)) {
        csv::write_row(os, {pairs[i].id, q.question_id, q.phrase, q.truth_present ? "1" : "0"});
      }
    }
    detail::emit(survey_.out, os.str(), manifest_);
    finish(survey_.out);
  }

  // analyze -----------------------------------------------------------------
  struct AnalyzeArgs {
    std::string x, y, x_cols, y_cols, groups, values, cols, out;
    std::size_t min_group = 5;
  } analyze_;

  void build_analyze(CLI::App& app) {
    auto* grp = app.add_subcommand("analyze", "Correlation and significance tables");
    grp->require_subcommand(1);

    auto* cor = grp->add_subcommand("correlate", "Pearson r and p for every (x, y) column pair");
    cor->add_option("--x", analyze_.x, "CSV keyed by id")->required();
    cor->add_option("--y", analyze_.y, "CSV keyed by id")->required();
    cor->add_option("--x-cols", analyze_.x_cols, "Comma-separated x columns (default: all numeric)");
    cor->add_option("--y-cols", analyze_.y_cols, "Comma-separated y columns (default: all numeric)");
    cor->add_option("--out", analyze_.out)->required();
    cor->callback([this] { action_ = [this] { run_correlate(); }; });

    auto* tt = grp->add_subcommand("ttest", "Welch t tests between keyword groups");
    tt->add_option("--groups", analyze_.groups, "CSV of (abstract_id, keyword)")->required();
    tt->add_option("--values", analyze_.values, "CSV of per-abstract values")->required();
    tt->add_option("--cols", analyze_.cols, "Comma-separated value columns (default: all numeric)");
    tt->add_option("--min-group", analyze_.min_group, "Minimum abstracts per keyword")->capture_default_str();
    tt->add_option("--out", analyze_.out)->required();
    tt->callback([this] { action_ = [this] { run_ttest(); }; });
  }

  void run_correlate() {
    manifest_.command = "analyze correlate";
    std::vector<std::string> warnings;
    const auto xs = detail::load_columns(analyze_.x, detail::split_list(analyze_.x_cols), warnings);
    const auto ys = detail::load_columns(analyze_.y, detail::split_list(analyze_.y_cols), warnings);
    manifest_.add_input(analyze_.x);
    manifest_.add_input(analyze_.y);

    std::set<std::string> x_ids, y_ids;
    for (const auto& c : xs) for (const auto& [id, v] : c.values) x_ids.insert(id);
    for (const auto& c : ys) for (const auto& [id, v] : c.values) y_ids.insert(id);
    std::size_t only_x = 0, only_y = 0;
    for (const auto& id : x_ids) only_x += !y_ids.count(id);
    for (const auto& id : y_ids) only_y += !x_ids.count(id);
    if (only_x || only_y) {
      warnings.push_back("id mismatch: " + std::to_string(only_x) + " ids only in --x, " + std::to_string(only_y) +
                         " only in --y; correlating the joined subset");
    }

    auto table = stats::pairwise_table(xs, ys);
    warnings.insert(warnings.end(), table.warnings.begin(), table.warnings.end());
    detail::print_warnings(err_, warnings);
    std::ostringstream os;
    os << "# pearson r; p two-tailed (Student t, n-2 df)\n";
    csv::write_row(os, {"x", "y", "n", "r", "t", "p"});
    for (const auto& r : table.rows) {
      csv::write_row(os, {r.x_label, r.y_label, std::to_string(r.result.n), detail::fmt(r.result.r),
                          detail::fmt(r.result.t_stat), detail::fmt(r.result.p_two_tailed)});
    }
    detail::emit(analyze_.out, os.str(), manifest_);
    finish(analyze_.out);
  }

  void run_ttest() {
    manifest_.command = "analyze ttest";
    std::vector<std::string> warnings;
    const auto groups_table = csv::parse(read_file(analyze_.groups));
    const auto idc = detail::id_column(groups_table);
    if (!idc) throw InputError(analyze_.groups + ": no id/abstract_id column");
    const auto kwc = groups_table.require_column("keyword");
    std::map<std::string, std::set<std::string>> members;
    for (const auto& row : groups_table.rows) {
      const auto kw = text::trim(row[kwc]);
      if (!kw.empty()) members[kw].insert(row[*idc]);
    }
    const auto values = detail::load_columns(analyze_.values, detail::split_list(analyze_.cols), warnings);
    manifest_.add_input(analyze_.groups);
    manifest_.add_input(analyze_.values);
    manifest_.parameters["min_group"] = std::to_string(analyze_.min_group);

    std::vector<std::string> keywords;
    for (const auto& [kw, ids] : members) {
      if (ids.size() >= analyze_.min_group) keywords.push_back(kw);
    }
    std::ostringstream os;
    os << "# welch unequal-variance t; p two-tailed; t > 0 means mean(keyword_a) > mean(keyword_b)\n";
    csv::write_row(os, {"keyword_a", "keyword_b", "variable", "n_a", "n_b", "t", "df", "p"});
    for (std::size_t i = 0; i < keywords.size(); ++i) {
      for (std::size_t j = i + 1; j < keywords.size(); ++j) {
        for (const auto& col : values) {
          std::vector<double> a, b;
          for (const auto& id : members[keywords[i]]) {
            if (auto it = col.values.find(id); it != col.values.end()) a.push_back(it->second);
          }
          for (const auto& id : members[keywords[j]]) {
            if (auto it = col.values.find(id); it != col.values.end()) b.push_back(it->second);
          }
          const std::string label = keywords[i] + " vs " + keywords[j] + " on " + col.label;
          try {
            auto r = stats::welch_t(a, b);
            csv::write_row(os, {keywords[i], keywords[j], col.label, std::to_string(a.size()),
                                std::to_string(b.size()), detail::fmt(r.t), detail::fmt(r.df), detail::fmt(r.p)});
          } catch (const InputError& e) {
            warnings.push_back(label + ": " + e.what() + ", skipped");
          }
        }
      }
    }
    detail::print_warnings(err_, warnings);
    detail::emit(analyze_.out, os.str(), manifest_);
    finish(analyze_.out);
  }

  // curve -------------------------------------------------------------------
  struct CurveArgs {
    std::string curves, out, out_dir;
  } curve_;

  std::vector<fs::path> curve_files() {
    std::vector<fs::path> files;
    std::error_code ec;
    if (!fs::is_directory(curve_.curves, ec)) throw InputError("not a directory: " + curve_.curves);
    for (const auto& e : fs::directory_iterator(curve_.curves)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
  }

  void build_curve(CLI::App& app) {
    auto* grp = app.add_subcommand("curve", "Affinity curves");
    grp->require_subcommand(1);

    auto* exp = grp->add_subcommand("export", "Concatenate per-document curves into one CSV");
    exp->add_option("--curves", curve_.curves, "Directory written by score ra --curves")->required();
    exp->add_option("--out", curve_.out)->required();
    exp->callback([this] { action_ = [this] { run_curve_export(); }; });

    auto* plot = grp->add_subcommand("plot", "One SVG line chart per document");
    plot->add_option("--curves", curve_.curves)->required();
    plot->add_option("--out-dir", curve_.out_dir)->required();
    plot->callback([this] { action_ = [this] { run_curve_plot(); }; });
  }

  void run_curve_export() {
    manifest_.command = "curve export";
    std::ostringstream os;
    csv::write_row(os, affinity::curve_csv_header());
    for (const auto& f : curve_files()) {
      manifest_.add_input(f);
      affinity::write_curve_rows(os, affinity::read_curve_csv(read_file(f)));
    }
    detail::emit(curve_.out, os.str(), manifest_);
    finish(curve_.out);
  }

  void run_curve_plot() {
    manifest_.command = "curve plot";
    std::size_t n = 0;
    for (const auto& f : curve_files()) {
      manifest_.add_input(f);
      auto curve = affinity::read_curve_csv(read_file(f));
      if (curve.doc_id.empty()) curve.doc_id = f.stem().string();
      detail::emit(fs::path(curve_.out_dir) / (f.stem().string() + ".svg"), affinity::curve_svg(curve), manifest_);
      ++n;
    }
    err_ << "plotted " << n << " curves\n";
    finish(fs::path(curve_.out_dir) / "plots");
  }
};

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  return Program(out, err).run(argc, argv);
}

inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.push_back("disclosure");
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace disclosure::cli
