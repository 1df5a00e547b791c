#pragma once

// LaTeX manuscript trees to normalized (abstract, body) plaintext pairs.
//
//   1. collate the manuscript's files by inlining \input / \insert
//   2. split out the abstract and document environments
//   3. render both spans to unicode text
//   4. collapse whitespace and lowercase

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <cctype>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "disclosure/error.hpp"
#include "disclosure/hash.hpp"
#include "disclosure/latex.hpp"
#include "disclosure/parallel.hpp"
#include "disclosure/text.hpp"

namespace disclosure::corpus {

struct RawManuscript {
  std::string id;
  std::map<std::string, std::string> files;  // relative path -> LaTeX source
  std::string main_file;
  std::map<std::string, std::string> meta;
};

struct DocumentPair {
  std::string id;
  std::string abstract_text;
  std::string body_text;
  std::map<std::string, std::string> meta;

  bool operator==(const DocumentPair&) const = default;
};

struct Collation {
  std::string text;
  std::vector<std::string> warnings;
};

struct Split {
  std::string abstract;
  std::string body;
  std::vector<std::string> warnings;
};

inline std::string normalize(std::string_view s) { return text::normalize(s); }

namespace detail {

inline std::string clean_relative(std::string p) {
  p = text::trim(p);
  while (p.rfind("./", 0) == 0) p.erase(0, 2);
  return p;
}

inline const std::string* resolve_include(const RawManuscript& m, const std::string& target) {
  const std::string name = clean_relative(target);
  if (auto it = m.files.find(name); it != m.files.end()) return &it->first;
  if (auto it = m.files.find(name + ".tex"); it != m.files.end()) return &it->first;
  return nullptr;
}

// Locates the next \input or \insert control word. Returns npos when none.
inline std::size_t find_include(std::string_view s, std::size_t from, std::size_t& name_len) {
  for (std::size_t i = s.find('\\', from); i != std::string_view::npos; i = s.find('\\', i + 1)) {
    if (i > 0 && s[i - 1] == '\\') {
      // "\\input" is a line break followed by the word, unless the backslash
      // itself is escaped; count the run.
      std::size_t run = 0;
      for (std::size_t k = i; k > 0 && s[k - 1] == '\\'; --k) ++run;
      if (run % 2 == 1) continue;
    }
    for (std::string_view word : {std::string_view("input"), std::string_view("insert")}) {
      if (s.substr(i + 1, word.size()) == word) {
        std::size_t after = i + 1 + word.size();
        if (after < s.size() && std::isalpha(static_cast<unsigned char>(s[after]))) continue;
        name_len = word.size() + 1;
        return i;
      }
    }
  }
  return std::string_view::npos;
}

inline std::string expand(const RawManuscript& m, const std::string& file,
                          std::vector<std::string>& stack, std::vector<std::string>& warnings) {
  if (std::find(stack.begin(), stack.end(), file) != stack.end()) {
    std::string cycle;
    auto it = std::find(stack.begin(), stack.end(), file);
    for (; it != stack.end(); ++it) cycle += *it + " -> ";
    cycle += file;
    throw InputError("cyclic include: " + cycle);
  }
  stack.push_back(file);
  const std::string src = latex::strip_comments(m.files.at(file));
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t name_len = 0;
    std::size_t at = find_include(src, pos, name_len);
    if (at == std::string::npos) {
      out.append(src, pos);
      break;
    }
    out.append(src, pos, at - pos);
    std::size_t p = at + name_len;
    while (p < src.size() && (src[p] == ' ' || src[p] == '\t')) ++p;
    std::string target;
    if (p < src.size() && src[p] == '{') {
      auto close = src.find('}', p);
      if (close == std::string::npos) {
        warnings.push_back(file + ": unterminated include argument");
        target = src.substr(p + 1);
        p = src.size();
      } else {
        target = src.substr(p + 1, close - p - 1);
        p = close + 1;
      }
    } else {
      std::size_t start = p;
      while (p < src.size() && !std::isspace(static_cast<unsigned char>(src[p])) &&
             src[p] != '\\' && src[p] != '}') {
        ++p;
      }
      target = src.substr(start, p - start);
    }
    if (const std::string* resolved = resolve_include(m, target)) {
      out += expand(m, *resolved, stack, warnings);
    } else {
      warnings.push_back(file + ": unresolved include '" + target + "'");
    }
    pos = p;
  }
  stack.pop_back();
  return out;
}

}  // namespace detail

inline Collation collate_manuscript(const RawManuscript& m) {
  if (m.files.find(m.main_file) == m.files.end()) {
    throw InputError("manuscript " + m.id + ": main file '" + m.main_file + "' not found");
  }
  Collation c;
  std::vector<std::string> stack;
  c.text = detail::expand(m, m.main_file, stack, c.warnings);
  return c;
}

inline Split split_abstract_body(std::string_view tex) {
  static constexpr std::string_view kBeginDoc = "\\begin{document}";
  static constexpr std::string_view kEndDoc = "\\end{document}";
  static constexpr std::string_view kBeginAbs = "\\begin{abstract}";
  static constexpr std::string_view kEndAbs = "\\end{abstract}";

  Split s;
  const auto doc_begin = tex.find(kBeginDoc);
  if (doc_begin == std::string_view::npos) throw InputError("missing \\begin{document}");
  const auto content_begin = doc_begin + kBeginDoc.size();
  auto content_end = tex.find(kEndDoc, content_begin);
  if (content_end == std::string_view::npos) {
    s.warnings.push_back("missing \\end{document}; using text to end of file");
    content_end = tex.size();
  }
  std::string_view doc = tex.substr(content_begin, content_end - content_begin);

  // Environment form inside the document.
  if (auto ab = doc.find(kBeginAbs); ab != std::string_view::npos) {
    auto inner = ab + kBeginAbs.size();
    auto ae = doc.find(kEndAbs, inner);
    if (ae == std::string_view::npos) {
      s.warnings.push_back("unterminated abstract environment");
      s.abstract = std::string(doc.substr(inner));
      s.body = std::string(doc.substr(0, ab));
    } else {
      s.abstract = std::string(doc.substr(inner, ae - inner));
      s.body = std::string(doc.substr(0, ab)) + std::string(doc.substr(ae + kEndAbs.size()));
    }
    return s;
  }

  // Command form \abstract{...}, in the preamble or the document.
  static constexpr std::string_view kAbsCmd = "\\abstract";
  for (auto at = tex.find(kAbsCmd); at != std::string_view::npos; at = tex.find(kAbsCmd, at + 1)) {
    auto p = at + kAbsCmd.size();
    if (p < tex.size() && std::isalpha(static_cast<unsigned char>(tex[p]))) continue;
    while (p < tex.size() && std::isspace(static_cast<unsigned char>(tex[p]))) ++p;
    if (p >= tex.size() || tex[p] != '{') continue;
    int depth = 0;
    auto q = p;
    for (; q < tex.size(); ++q) {
      if (tex[q] == '\\') {
        ++q;
        continue;
      }
      if (tex[q] == '{') ++depth;
      if (tex[q] == '}' && --depth == 0) break;
    }
    if (q >= tex.size()) break;
    s.abstract = std::string(tex.substr(p + 1, q - p - 1));
    const auto span_end = q + 1;
    if (at >= content_begin && span_end <= content_end) {
      s.body = std::string(tex.substr(content_begin, at - content_begin)) +
               std::string(tex.substr(span_end, content_end - span_end));
    } else {
      s.body = std::string(doc);
    }
    return s;
  }

  s.warnings.push_back("no abstract found");
  s.body = std::string(doc);
  return s;
}

inline latex::Conversion latex_to_plaintext(std::string_view tex) {
  return latex::latex_to_plaintext(tex);
}

struct ProcessedPair {
  DocumentPair pair;
  std::vector<std::string> warnings;
};

// Runs collate, split, render and normalize on one manuscript. Throws
// InputError when the result would violate the DocumentPair invariants.
inline ProcessedPair process_manuscript(const RawManuscript& m) {
  ProcessedPair out;
  auto collation = collate_manuscript(m);
  auto split = split_abstract_body(collation.text);
  auto abs = latex_to_plaintext(split.abstract);
  auto body = latex_to_plaintext(split.body);
  for (auto* ws : {&collation.warnings, &split.warnings, &abs.warnings, &body.warnings}) {
    for (auto& w : *ws) out.warnings.push_back(m.id + ": " + w);
  }
  out.pair.id = m.id;
  out.pair.abstract_text = normalize(abs.text);
  out.pair.body_text = normalize(body.text);
  out.pair.meta = m.meta;
  if (out.pair.abstract_text.empty()) throw InputError("manuscript " + m.id + ": empty abstract");
  if (out.pair.body_text.empty()) throw InputError("manuscript " + m.id + ": empty body");
  return out;
}

struct LoadedManuscript {
  RawManuscript manuscript;
  std::vector<std::string> warnings;
};

// Reads one manuscript directory: every *.tex file below it, plus an
// optional meta.json of string (or string-array) fields.
inline LoadedManuscript load_manuscript(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  LoadedManuscript out;
  RawManuscript& m = out.manuscript;
  m.id = dir.filename().string();

  std::vector<fs::path> tex_files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tex") {
      tex_files.push_back(entry.path());
    }
  }
  std::sort(tex_files.begin(), tex_files.end());
  for (const auto& p : tex_files) {
    const std::string rel = fs::relative(p, dir).generic_string();
    bool fallback = false;
    m.files[rel] = text::to_utf8(read_file(p), &fallback);
    if (fallback) out.warnings.push_back(m.id + ": " + rel + " decoded as Latin-1");
  }
  if (m.files.empty()) throw InputError("manuscript " + m.id + ": no .tex files");

  std::vector<std::string> candidates;
  for (const auto& [rel, src] : m.files) {
    if (latex::strip_comments(src).find("\\begin{document}") != std::string::npos) {
      candidates.push_back(rel);
    }
  }
  if (candidates.empty()) throw InputError("manuscript " + m.id + ": missing main file");
  if (std::find(candidates.begin(), candidates.end(), "main.tex") != candidates.end()) {
    m.main_file = "main.tex";
  } else {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
    m.main_file = candidates.front();
  }
  if (candidates.size() > 1) {
    out.warnings.push_back(m.id + ": several files contain \\begin{document}; using " + m.main_file);
  }

  if (auto meta_path = dir / "meta.json"; fs::exists(meta_path)) {
    try {
      auto j = nlohmann::json::parse(read_file(meta_path));
      for (auto& [k, v] : j.items()) {
        if (v.is_string()) {
          m.meta[k] = v.get<std::string>();
        } else if (v.is_array()) {
          std::vector<std::string> parts;
          for (auto& e : v) parts.push_back(e.is_string() ? e.get<std::string>() : e.dump());
          m.meta[k] = text::join(parts, ";");
        } else {
          m.meta[k] = v.dump();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      out.warnings.push_back(m.id + ": ignoring malformed meta.json (" + e.what() + ")");
    }
  }
  return out;
}

struct IngestFailure {
  std::string id;
  std::string message;
};

struct IngestResult {
  std::vector<DocumentPair> pairs;
  std::vector<IngestFailure> failures;
  std::vector<std::string> warnings;
  std::vector<std::string> excluded;
};

inline std::set<std::string> read_exclusion_list(const std::filesystem::path& path) {
  std::set<std::string> ids;
  for (const auto& line : text::split(read_file(path), '\n')) {
    auto id = text::trim(line);
    if (!id.empty() && id[0] != '#') ids.insert(id);
  }
  return ids;
}

// One subdirectory per manuscript. Output order is sorted manuscript id
// order for any number of jobs; per-manuscript failures are collected rather
// than thrown.
inline IngestResult ingest_tree(const std::filesystem::path& root,
                                const std::set<std::string>& exclusion_list,
                                std::size_t jobs = 1) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw InputError("cannot read corpus root " + root.string());

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  if (ec) throw InputError("cannot read corpus root " + root.string() + ": " + ec.message());
  std::sort(dirs.begin(), dirs.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });

  IngestResult result;
  std::vector<fs::path> todo;
  for (auto& d : dirs) {
    if (exclusion_list.count(d.filename().string())) {
      result.excluded.push_back(d.filename().string());
    } else {
      todo.push_back(d);
    }
  }

  struct Outcome {
    std::optional<DocumentPair> pair;
    std::optional<IngestFailure> failure;
    std::vector<std::string> warnings;
  };
  auto outcomes = parallel_map(jobs, todo.size(), [&](std::size_t i) {
    Outcome o;
    const std::string id = todo[i].filename().string();
    try {
      auto loaded = load_manuscript(todo[i]);
      o.warnings = std::move(loaded.warnings);
      auto processed = process_manuscript(loaded.manuscript);
      o.warnings.insert(o.warnings.end(), processed.warnings.begin(), processed.warnings.end());
      o.pair = std::move(processed.pair);
    } catch (const std::exception& e) {
      o.failure = IngestFailure{id, e.what()};
    }
    return o;
  });

  for (auto& o : outcomes) {
    result.warnings.insert(result.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (o.pair) result.pairs.push_back(std::move(*o.pair));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  return result;
}

// JSONL with fields id, abstract, body, meta (in that order).
inline std::string to_jsonl_line(const DocumentPair& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["abstract"] = p.abstract_text;
  j["body"] = p.body_text;
  j["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p.meta) j["meta"][k] = v;
  return j.dump(-1, ' ', false) + "\n";
}

inline void write_jsonl(std::ostream& os, const std::vector<DocumentPair>& pairs) {
  for (const auto& p : pairs) os << to_jsonl_line(p);
}

// Both texts non-empty and already normalized (lowercase, single spaces).
inline void validate_pair(const DocumentPair& p) {
  if (p.id.empty()) throw InputError("document pair without id");
  for (const auto* field : {&p.abstract_text, &p.body_text}) {
    const char* name = field == &p.abstract_text ? "abstract" : "body";
    if (field->empty()) throw InputError("pair " + p.id + ": empty " + name);
    if (normalize(*field) != *field) throw InputError("pair " + p.id + ": " + name + " is not normalized");
  }
}

inline std::vector<DocumentPair> read_jsonl(const std::filesystem::path& path) {
  std::vector<DocumentPair> pairs;
  std::size_t lineno = 0;
  for (const auto& line : text::split(read_file(path), '\n')) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      DocumentPair p;
      p.id = j.at("id").get<std::string>();
      p.abstract_text = j.at("abstract").get<std::string>();
      p.body_text = j.at("body").get<std::string>();
      if (j.contains("meta")) {
        for (auto& [k, v] : j["meta"].items()) p.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      validate_pair(p);
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace disclosure::corpus
