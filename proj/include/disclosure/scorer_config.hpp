#pragma once

// Scorer configuration files: "key = value" lines, '#' comments.
//
//   backend       = cache | http | stub
//   model_id      = gpt2-arxiv
//   path          = store            (cache root; relative to the config file)
//   url           = http://127.0.0.1:8000
//   max_parallel  = 4
//   upstream      = bridge.cfg       (cache only: consulted on a miss)
//   allow_network = false
//   capabilities  = logprobs,embed,generate
//   stub          = echo | hash | table
//   dim           = 16               (hash stub)
//   table         = lm.tsv           (table stub: "token<TAB>logprob" lines)
//   default_logprob = -10            (table stub)
//   timeout_s     = 120              (http)

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "disclosure/hash.hpp"
#include "disclosure/scorer.hpp"
#include "disclosure/scorer_cache.hpp"
#include "disclosure/scorer_http.hpp"
#include "disclosure/scorer_stub.hpp"
#include "disclosure/text.hpp"

namespace disclosure::scorer {

inline constexpr const char* kScorerDirEnv = "DISCLOSURE_SCORER_DIR";

struct ScorerConfig {
  std::filesystem::path source;
  std::map<std::string, std::string> values;
  std::string digest;  // sha256 of the file bytes

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) {
      throw ScorerError(ScorerError::Kind::Config, source.string() + ": missing '" + key + "'");
    }
    return it->second;
  }

  std::filesystem::path resolve(const std::string& rel) const {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : source.parent_path() / p;
  }
};

inline ScorerConfig parse_config(const std::string& body, const std::filesystem::path& source) {
  ScorerConfig cfg;
  cfg.source = source;
  cfg.digest = sha256_hex(body);
  std::size_t lineno = 0;
  for (const auto& raw : text::split(body, '\n')) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ScorerError(ScorerError::Kind::Config,
                        source.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    cfg.values[text::trim(line.substr(0, eq))] = text::trim(line.substr(eq + 1));
  }
  return cfg;
}

// Accepts an existing path, or a name looked up in $DISCLOSURE_SCORER_DIR
// (with or without a .cfg suffix).
inline std::filesystem::path resolve_config_path(const std::string& name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(name, ec)) return name;
  if (const char* dir = std::getenv(kScorerDirEnv); dir && *dir) {
    for (const auto& candidate : {fs::path(dir) / name, fs::path(dir) / (name + ".cfg")}) {
      if (fs::exists(candidate, ec)) return candidate;
    }
  }
  throw ScorerError(ScorerError::Kind::Config, "scorer config not found: " + name);
}

inline ScorerConfig load_config(const std::string& name) {
  const auto path = resolve_config_path(name);
  std::string body;
  try {
    body = read_file(path);
  } catch (const InputError& e) {
    throw ScorerError(ScorerError::Kind::Config, e.what());
  }
  return parse_config(body, path);
}

struct OpenOptions {
  bool allow_network = false;
  RetryPolicy retry{};
};

inline unsigned parse_capabilities(const std::string& list) {
  unsigned caps = 0;
  for (auto item : text::split(list, ',')) {
    item = text::trim(item);
    for (auto& c : item) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (item == "logprobs") caps |= static_cast<unsigned>(Capability::Logprobs);
    else if (item == "embed") caps |= static_cast<unsigned>(Capability::Embed);
    else if (item == "generate") caps |= static_cast<unsigned>(Capability::Generate);
    else if (!item.empty()) throw ScorerError(ScorerError::Kind::Config, "unknown capability '" + item + "'");
  }
  return caps;
}

inline bool parse_bool(const std::string& v) {
  return v == "1" || v == "true" || v == "yes" || v == "on";
}

struct OpenedBackend {
  std::shared_ptr<ScorerBackend> backend;
  unsigned default_caps = kAllCapabilities;
  std::string endpoint;
  bool uses_network = false;
};

inline OpenedBackend open_backend(const ScorerConfig& cfg, const OpenOptions& opts, int depth = 0);

inline std::map<std::string, double> read_lm_table(const std::filesystem::path& path) {
  std::map<std::string, double> table;
  for (const auto& raw : text::split(read_file(path), '\n')) {
    auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto sep = line.find_first_of(" \t");
    if (sep == std::string::npos) throw ScorerError(ScorerError::Kind::Config, "bad LM table line: " + line);
    table[line.substr(0, sep)] = std::stod(text::trim(line.substr(sep + 1)));
  }
  return table;
}

inline OpenedBackend open_backend(const ScorerConfig& cfg, const OpenOptions& opts, int depth) {
  if (depth > 4) throw ScorerError(ScorerError::Kind::Config, "upstream chain too deep");
  const std::string kind = cfg.require("backend");
  OpenedBackend out;
  if (kind == "cache") {
    const auto root = cfg.resolve(cfg.require("path"));
    std::shared_ptr<ScorerBackend> upstream;
    if (auto up = cfg.get("upstream"); !up.empty()) {
      auto up_cfg = load_config(cfg.resolve(up).string());
      auto opened = open_backend(up_cfg, opts, depth + 1);
      const bool allowed = opts.allow_network || parse_bool(cfg.get("allow_network", "false"));
      if (opened.uses_network && !allowed) {
        // Misses stay misses unless network access is explicit.
        opened.backend.reset();
      }
      upstream = opened.backend;
      out.uses_network = opened.uses_network && upstream;
    }
    out.backend = std::make_shared<CacheBackend>(CacheStore(root), upstream);
    out.endpoint = root.string();
  } else if (kind == "http") {
    const std::string url = cfg.require("url");
    const int timeout = std::stoi(cfg.get("timeout_s", "120"));
    out.backend = std::make_shared<HttpBackend>(url, opts.retry, std::chrono::seconds(timeout));
    out.endpoint = url;
    out.uses_network = true;
  } else if (kind == "stub") {
    const std::string stub = cfg.require("stub");
    if (stub == "echo") {
      out.backend = std::make_shared<EchoBackend>();
      out.default_caps = static_cast<unsigned>(Capability::Generate);
    } else if (stub == "hash") {
      out.backend = std::make_shared<HashEmbeddingBackend>(std::stoul(cfg.get("dim", "16")));
      out.default_caps = static_cast<unsigned>(Capability::Embed);
    } else if (stub == "table") {
      std::map<std::string, double> table;
      if (auto t = cfg.get("table"); !t.empty()) table = read_lm_table(cfg.resolve(t));
      out.backend = std::make_shared<TableLmBackend>(std::move(table),
                                                     std::stod(cfg.get("default_logprob", "-10")));
      out.default_caps = static_cast<unsigned>(Capability::Logprobs);
    } else {
      throw ScorerError(ScorerError::Kind::Config, "unknown stub '" + stub + "'");
    }
    out.endpoint = "stub:" + stub;
  } else {
    throw ScorerError(ScorerError::Kind::Config, "unknown backend '" + kind + "'");
  }
  return out;
}

inline ScorerHandle open_scorer(const ScorerConfig& cfg, const OpenOptions& opts = {}) {
  auto opened = open_backend(cfg, opts);
  unsigned caps = opened.default_caps;
  if (auto c = cfg.get("capabilities"); !c.empty()) caps = parse_capabilities(c);
  std::size_t max_parallel = 1;
  try {
    max_parallel = std::stoul(cfg.get("max_parallel", "1"));
  } catch (const std::exception&) {
    throw ScorerError(ScorerError::Kind::Config, "max_parallel must be an integer");
  }
  return ScorerHandle(cfg.require("model_id"), caps, opened.endpoint, max_parallel, opened.backend);
}

inline ScorerHandle open_scorer(const std::string& name, const OpenOptions& opts = {}) {
  return open_scorer(load_config(name), opts);
}

}  // namespace disclosure::scorer
