#pragma once

// LaTeX source to unicode plaintext.
//
// A single-pass scanner, not a TeX engine: macros are never expanded.
// Known macros are rendered to their unicode equivalent or dropped along with
// their arguments; unknown macros lose their name and keep their braced
// arguments as ordinary text groups.
//
// Placeholders:
//   display math (\[..\], $$..$$, equation-like environments)  -> ⟨eqn⟩
//   \cite-family                                               -> ⟨cit⟩
//   \ref-family                                                -> ⟨ref⟩
//   \url, bare http(s) links, the target of \href              -> ⟨url⟩
// Inline math keeps its literal characters with control words and braces
// removed.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "disclosure/text.hpp"

namespace disclosure::latex {

inline constexpr std::string_view kEqnToken = "⟨eqn⟩";
inline constexpr std::string_view kCitToken = "⟨cit⟩";
inline constexpr std::string_view kRefToken = "⟨ref⟩";
inline constexpr std::string_view kUrlToken = "⟨url⟩";

struct Conversion {
  std::string text;
  std::vector<std::string> warnings;
};

// Removes unescaped '%' comments. The newline ending a comment and the
// indentation of the following line are consumed, as TeX does.
inline std::string strip_comments(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\' && i + 1 < src.size()) {
      out += c;
      out += src[i + 1];
      i += 2;
      continue;
    }
    if (c == '%') {
      auto eol = src.find('\n', i);
      if (eol == std::string_view::npos) break;
      i = eol + 1;
      while (i < src.size() && (src[i] == ' ' || src[i] == '\t')) ++i;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

namespace detail {

inline bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

inline const std::unordered_map<std::string, char32_t>& accent_marks() {
  static const std::unordered_map<std::string, char32_t> m = {
      {"'", 0x0301}, {"`", 0x0300}, {"^", 0x0302}, {"\"", 0x0308}, {"~", 0x0303},
      {"=", 0x0304}, {".", 0x0307}, {"c", 0x0327}, {"v", 0x030C}, {"u", 0x0306},
      {"H", 0x030B}, {"k", 0x0328}, {"r", 0x030A}, {"d", 0x0323}, {"b", 0x0331},
  };
  return m;
}

inline const std::unordered_map<std::string, std::string>& symbol_macros() {
  static const std::unordered_map<std::string, std::string> m = {
      {"ss", "ß"}, {"SS", "SS"}, {"o", "ø"}, {"O", "Ø"}, {"ae", "æ"}, {"AE", "Æ"},
      {"oe", "œ"}, {"OE", "Œ"}, {"aa", "å"}, {"AA", "Å"}, {"l", "ł"}, {"L", "Ł"},
      {"i", "ı"}, {"j", "ȷ"}, {"ldots", "…"}, {"dots", "…"}, {"textellipsis", "…"},
      {"textendash", "–"}, {"textemdash", "—"}, {"textquoteleft", "‘"},
      {"textquoteright", "’"}, {"textquotedblleft", "“"}, {"textquotedblright", "”"},
      {"LaTeX", "LaTeX"}, {"TeX", "TeX"}, {"LaTeXe", "LaTeX2e"}, {"textbackslash", "\\"},
      {"copyright", "©"}, {"textcopyright", "©"}, {"textregistered", "®"},
      {"texttrademark", "™"}, {"euro", "€"}, {"pounds", "£"}, {"S", "§"}, {"P", "¶"},
      {"dag", "†"}, {"ddag", "‡"}, {"textbullet", "•"}, {"textdegree", "°"},
      {"quad", " "}, {"qquad", " "}, {"enspace", " "}, {"thinspace", " "},
      {"newline", " "}, {"linebreak", " "}, {"par", " "}, {"item", " "},
      {"and", " "}, {"AND", " "}, {"noindent", ""}, {"indent", ""},
      {"textasciitilde", "~"}, {"textasciicircum", "^"}, {"textunderscore", "_"},
      {"textbar", "|"}, {"textless", "<"}, {"textgreater", ">"}, {"slash", "/"},
      {"%", "%"}, {"&", "&"}, {"$", "$"}, {"#", "#"}, {"_", "_"}, {"{", "{"}, {"}", "}"},
      {"\\", " "}, {",", " "}, {";", " "}, {":", " "}, {"!", ""}, {" ", " "},
      {"-", ""}, {"@", ""}, {"/", ""},
  };
  return m;
}

// Macros dropped together with this many mandatory arguments (optional
// [..] arguments and a star are skipped as well).
inline const std::unordered_map<std::string, int>& discard_macros() {
  static const std::unordered_map<std::string, int> m = {
      {"label", 1}, {"includegraphics", 1}, {"usepackage", 1}, {"RequirePackage", 1},
      {"documentclass", 1}, {"bibliographystyle", 1}, {"bibliography", 1},
      {"nocite", 1}, {"vspace", 1}, {"hspace", 1}, {"setlength", 2},
      {"addtolength", 2}, {"setcounter", 2}, {"addtocounter", 2}, {"pagestyle", 1},
      {"thispagestyle", 1}, {"addcontentsline", 3}, {"bibitem", 1}, {"input", 1},
      {"include", 1}, {"insert", 1}, {"newcounter", 1}, {"hypersetup", 1},
      {"graphicspath", 1}, {"DeclareMathOperator", 2}, {"newtheorem", 2},
      {"definecolor", 3}, {"color", 1}, {"pagenumbering", 1}, {"fontsize", 2},
      {"linespread", 1}, {"titlerunning", 1}, {"authorrunning", 1}, {"keywords", 0},
      {"maketitle", 0}, {"centering", 0}, {"small", 0}, {"footnotesize", 0},
      {"scriptsize", 0}, {"tiny", 0}, {"large", 0}, {"Large", 0}, {"LARGE", 0},
      {"huge", 0}, {"Huge", 0}, {"normalsize", 0}, {"bfseries", 0}, {"itshape", 0},
      {"ttfamily", 0}, {"rmfamily", 0}, {"sffamily", 0}, {"scshape", 0},
      {"mdseries", 0}, {"upshape", 0}, {"normalfont", 0}, {"em", 0}, {"bf", 0},
      {"it", 0}, {"tt", 0}, {"rm", 0}, {"sc", 0}, {"sf", 0}, {"clearpage", 0},
      {"newpage", 0}, {"cleardoublepage", 0}, {"pagebreak", 0}, {"nopagebreak", 0},
      {"tableofcontents", 0}, {"appendix", 0}, {"hline", 0}, {"toprule", 0},
      {"midrule", 0}, {"bottomrule", 0}, {"cline", 1}, {"cmidrule", 1},
      {"smallskip", 0}, {"medskip", 0}, {"bigskip", 0}, {"vfill", 0}, {"hfill", 0},
      {"protect", 0}, {"relax", 0}, {"raggedright", 0}, {"raggedleft", 0},
      {"frenchspacing", 0}, {"sloppy", 0}, {"footnotemark", 0}, {"printbibliography", 0},
      {"makeatletter", 0}, {"makeatother", 0}, {"columnwidth", 0}, {"textwidth", 0},
      {"linewidth", 0}, {"baselineskip", 0}, {"multicolumn", 2}, {"multirow", 2},
  };
  return m;
}

// Macros whose name is dropped, whose optional arguments are skipped and
// whose mandatory argument is rendered as text, followed by a break.
inline const std::unordered_set<std::string>& heading_macros() {
  static const std::unordered_set<std::string> s = {
      "part", "chapter", "section", "subsection", "subsubsection", "paragraph",
      "subparagraph", "caption", "title", "author", "date", "thanks", "footnote",
      "footnotetext", "textbf", "textit", "emph", "texttt", "textsc", "textsf",
      "textrm", "textsl", "textup", "textmd", "textnormal", "underline", "mbox",
      "makebox", "fbox", "framebox", "text", "textsuperscript", "textsubscript",
      "uline", "hbox", "vbox", "parbox", "raisebox", "resizebox", "scalebox",
      "textcolor", "colorbox", "mathrm", "mathbf", "mathit", "mathsf", "mathtt",
  };
  return s;
}

// Number of leading mandatory arguments of these macros that are discarded
// before the rendered one (e.g. \textcolor{red}{x}, \parbox{w}{x}).
inline int leading_discards(const std::string& name) {
  if (name == "textcolor" || name == "colorbox" || name == "parbox") return 1;
  if (name == "resizebox") return 2;
  if (name == "scalebox" || name == "raisebox") return 1;
  return 0;
}

inline bool is_cite(const std::string& name) {
  if (name == "nocite") return false;
  return name.rfind("cite", 0) == 0 || (name.size() > 4 && name.ends_with("cite")) ||
         name == "citeauthor" || name == "citeyear";
}

inline bool is_ref(const std::string& name) {
  static const std::unordered_set<std::string> s = {
      "ref", "autoref", "cref", "Cref", "eqref", "pageref", "nameref", "vref",
      "Autoref", "subref", "fref", "Fref"};
  return s.count(name) != 0;
}

inline bool is_display_math_env(std::string_view env) {
  static const std::unordered_set<std::string_view> s = {
      "equation", "equation*", "align", "align*", "alignat", "alignat*", "gather",
      "gather*", "multline", "multline*", "eqnarray", "eqnarray*", "displaymath",
      "math", "flalign", "flalign*", "dmath", "dmath*", "subequations"};
  return s.count(env) != 0;
}

inline bool is_skipped_env(std::string_view env) {
  return env == "comment" || env == "thebibliography*";
}

inline bool is_verbatim_env(std::string_view env) {
  return env == "verbatim" || env == "verbatim*" || env == "lstlisting" || env == "minted";
}

class Renderer {
 public:
  explicit Renderer(std::string_view src) : src_(src) {}

  Conversion run() {
    render(0);
    Conversion c;
    c.text = text::nfc(out_);
    c.warnings = std::move(warnings_);
    return c;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::string out_;
  std::vector<std::string> warnings_;

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t k = 0) const {
    return pos_ + k < src_.size() ? src_[pos_ + k] : '\0';
  }

  void warn(std::string msg) {
    warnings_.push_back(std::move(msg) + " at offset " + std::to_string(pos_));
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
  }

  // Renders until the closing brace of the current group (depth > 0) or EOF.
  void render(int depth) {
    while (!at_end()) {
      char c = peek();
      if (c == '}') {
        if (depth > 0) {
          ++pos_;
          return;
        }
        warn("unbalanced '}'");
        ++pos_;
        continue;
      }
      step();
    }
    if (depth > 0) warn("unterminated group");
  }

  void step() {
    char c = peek();
    switch (c) {
      case '%': {
        auto eol = src_.find('\n', pos_);
        pos_ = eol == std::string_view::npos ? src_.size() : eol + 1;
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
        return;
      }
      case '\\':
        macro();
        return;
      case '{':
        ++pos_;
        render(1);
        return;
      case '$':
        dollar_math();
        return;
      case '~':
        out_ += ' ';
        ++pos_;
        return;
      case '&':
        out_ += ' ';
        ++pos_;
        return;
      case '#':
        ++pos_;
        return;
      case '-':
        if (peek(1) == '-' && peek(2) == '-') {
          out_ += "—";
          pos_ += 3;
        } else if (peek(1) == '-') {
          out_ += "–";
          pos_ += 2;
        } else {
          out_ += '-';
          ++pos_;
        }
        return;
      case '`':
        if (peek(1) == '`') {
          out_ += "“";
          pos_ += 2;
        } else {
          out_ += "‘";
          ++pos_;
        }
        return;
      case '\'':
        if (peek(1) == '\'') {
          out_ += "”";
          pos_ += 2;
        } else {
          out_ += '\'';
          ++pos_;
        }
        return;
      case 'h':
        if (src_.substr(pos_, 7) == "http://" || src_.substr(pos_, 8) == "https://") {
          bare_url();
          return;
        }
        break;
      default:
        break;
    }
    out_ += c;
    ++pos_;
  }

  void bare_url() {
    // Only treat it as a link when it starts a word.
    if (!out_.empty() && !std::isspace(static_cast<unsigned char>(out_.back())) &&
        out_.back() != '(' && out_.back() != '[') {
      out_ += peek();
      ++pos_;
      return;
    }
    while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '}' &&
           peek() != '{' && peek() != '\\') {
      ++pos_;
    }
    out_ += kUrlToken;
  }

  std::string read_macro_name() {
    // pos_ is just past the backslash.
    if (at_end()) return {};
    if (!is_letter(peek())) {
      return std::string(1, src_[pos_++]);
    }
    std::size_t start = pos_;
    while (!at_end() && is_letter(peek())) ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  bool skip_star() {
    if (peek() == '*') {
      ++pos_;
      return true;
    }
    return false;
  }

  // Returns the raw text of a balanced {...} group starting at pos_ (after
  // optional spaces), or the next single token when no brace follows.
  std::string read_arg_raw() {
    std::size_t save = pos_;
    skip_spaces();
    if (at_end()) return {};
    if (peek() != '{') {
      if (peek() == '\\') {
        std::size_t start = pos_;
        ++pos_;
        read_macro_name();
        return std::string(src_.substr(start, pos_ - start));
      }
      if (peek() == '}' || peek() == '[') {
        pos_ = save;
        return {};
      }
      return std::string(1, src_[pos_++]);
    }
    ++pos_;
    std::size_t start = pos_;
    int depth = 1;
    while (!at_end()) {
      char c = peek();
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        std::string arg(src_.substr(start, pos_ - start));
        ++pos_;
        return arg;
      }
      ++pos_;
    }
    warn("unterminated argument");
    pos_ = std::min(pos_, src_.size());
    return std::string(src_.substr(start));
  }

  void skip_optional_args() {
    while (true) {
      std::size_t save = pos_;
      skip_spaces();
      if (peek() != '[') {
        pos_ = save;
        return;
      }
      int depth = 0;
      while (!at_end()) {
        char c = peek();
        if (c == '\\') {
          pos_ += 2;
          continue;
        }
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') {
          --depth;
          if (depth == 0) {
            ++pos_;
            break;
          }
        }
        ++pos_;
      }
    }
  }

  std::string read_optional_arg() {
    std::size_t save = pos_;
    skip_spaces();
    if (peek() != '[') {
      pos_ = save;
      return {};
    }
    ++pos_;
    std::size_t start = pos_;
    int depth = 1;
    while (!at_end()) {
      char c = peek();
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '[' || c == '{') ++depth;
      if ((c == ']' || c == '}') && --depth == 0) {
        std::string arg(src_.substr(start, pos_ - start));
        ++pos_;
        return arg;
      }
      ++pos_;
    }
    return std::string(src_.substr(start));
  }

  void render_nested(std::string_view fragment) {
    Renderer inner(fragment);
    inner.render(0);
    out_ += inner.out_;
    for (auto& w : inner.warnings_) warnings_.push_back(std::move(w));
  }

  void render_group_arg() {
    std::string arg = read_arg_raw();
    render_nested(arg);
  }

  void accent(const std::string& name) {
    char32_t mark = accent_marks().at(name);
    std::string arg = read_arg_raw();
    std::string base;
    if (arg == "\\i" || arg == "i") {
      base = "i";
    } else if (arg == "\\j") {
      base = "j";
    } else {
      Renderer inner(arg);
      inner.render(0);
      base = inner.out_;
    }
    // The mark attaches to the first character of the argument.
    std::u32string cps = text::decode_lenient(base);
    std::u32string composed;
    if (cps.empty()) {
      composed.push_back(mark);
    } else {
      composed.push_back(cps.front());
      composed.push_back(mark);
      composed.append(cps.begin() + 1, cps.end());
    }
    out_ += text::encode_utf8(composed);
  }

  void emit_token(std::string_view token) {
    if (!out_.empty() && out_.back() != ' ' && out_.back() != '(' && out_.back() != '\n') out_ += ' ';
    out_ += token;
  }

  void macro() {
    ++pos_;  // backslash
    if (at_end()) {
      warn("dangling backslash");
      return;
    }
    std::string name = read_macro_name();

    if (name == "[") {
      skip_until("\\]");
      emit_token(kEqnToken);
      out_ += ' ';
      return;
    }
    if (name == "(") {
      inline_math(take_until("\\)"));
      return;
    }
    if (name == "\\") {
      skip_star();
      skip_optional_args();
      out_ += ' ';
      return;
    }
    if (accent_marks().count(name)) {
      accent(name);
      return;
    }
    if (name == "begin") {
      begin_env();
      return;
    }
    if (name == "end") {
      read_arg_raw();
      out_ += ' ';
      return;
    }
    if (is_cite(name)) {
      skip_star();
      skip_optional_args();
      read_arg_raw();
      emit_token(kCitToken);
      return;
    }
    if (is_ref(name)) {
      skip_star();
      read_arg_raw();
      emit_token(kRefToken);
      return;
    }
    if (name == "url" || name == "nolinkurl") {
      read_arg_raw();
      emit_token(kUrlToken);
      return;
    }
    if (name == "href") {
      read_arg_raw();
      render_group_arg();
      out_ += ' ';
      out_ += kUrlToken;
      return;
    }
    if (name == "newcommand" || name == "renewcommand" || name == "providecommand" ||
        name == "DeclareRobustCommand") {
      skip_star();
      read_arg_raw();
      skip_optional_args();
      read_arg_raw();
      return;
    }
    if (name == "newenvironment" || name == "renewenvironment") {
      skip_star();
      read_arg_raw();
      skip_optional_args();
      read_arg_raw();
      read_arg_raw();
      return;
    }
    if (name == "def" || name == "gdef" || name == "edef" || name == "xdef") {
      if (peek() == '\\') {
        ++pos_;
        read_macro_name();
      }
      while (!at_end() && peek() != '{') ++pos_;
      read_arg_raw();
      return;
    }
    if (name == "let") {
      read_arg_raw();
      skip_spaces();
      if (peek() == '=') ++pos_;
      read_arg_raw();
      return;
    }
    if (name == "verb") {
      if (at_end()) return;
      char delim = src_[pos_++];
      auto close = src_.find(delim, pos_);
      if (close == std::string_view::npos) {
        warn("unterminated \\verb");
        close = src_.size();
      }
      out_ += src_.substr(pos_, close - pos_);
      pos_ = std::min(close + 1, src_.size());
      return;
    }
    if (name == "item") {
      out_ += ' ';
      std::string label = read_optional_arg();
      if (!label.empty()) {
        render_nested(label);
        out_ += ' ';
      }
      return;
    }
    if (auto it = symbol_macros().find(name); it != symbol_macros().end()) {
      out_ += it->second;
      return;
    }
    if (auto it = discard_macros().find(name); it != discard_macros().end()) {
      skip_star();
      skip_optional_args();
      for (int k = 0; k < it->second; ++k) {
        read_arg_raw();
        skip_optional_args();
      }
      return;
    }
    if (heading_macros().count(name)) {
      skip_star();
      skip_optional_args();
      for (int k = leading_discards(name); k > 0; --k) read_arg_raw();
      bool block = name == "part" || name == "chapter" || name.find("section") != std::string::npos ||
                   name.find("paragraph") != std::string::npos || name == "caption" ||
                   name == "title" || name == "footnote" || name == "footnotetext" || name == "thanks";
      if (block) out_ += ' ';
      render_group_arg();
      if (block) out_ += ' ';
      return;
    }
    // Unknown macro: drop the name; following groups render as text.
  }

  std::string take_until(std::string_view close) {
    auto end = src_.find(close, pos_);
    if (end == std::string_view::npos) {
      warn("unterminated math");
      std::string body(src_.substr(pos_));
      pos_ = src_.size();
      return body;
    }
    std::string body(src_.substr(pos_, end - pos_));
    pos_ = end + close.size();
    return body;
  }

  void skip_until(std::string_view close) { take_until(close); }

  void dollar_math() {
    if (peek(1) == '$') {
      pos_ += 2;
      skip_until("$$");
      emit_token(kEqnToken);
      out_ += ' ';
      return;
    }
    ++pos_;
    std::size_t start = pos_;
    while (!at_end()) {
      if (peek() == '\\') {
        pos_ += 2;
        continue;
      }
      if (peek() == '$') break;
      ++pos_;
    }
    if (at_end()) {
      warn("unterminated inline math");
      inline_math(std::string(src_.substr(start)));
      pos_ = src_.size();
      return;
    }
    inline_math(std::string(src_.substr(start, pos_ - start)));
    ++pos_;
  }

  // Literal characters of inline math with control sequences and braces removed.
  void inline_math(const std::string& body) {
    std::size_t i = 0;
    while (i < body.size()) {
      char c = body[i];
      if (c == '\\') {
        ++i;
        if (i < body.size() && is_letter(body[i])) {
          while (i < body.size() && is_letter(body[i])) ++i;
        } else if (i < body.size()) {
          ++i;
        }
        continue;
      }
      if (c == '{' || c == '}') {
        ++i;
        continue;
      }
      out_ += c;
      ++i;
    }
  }

  void begin_env() {
    std::string env = read_arg_raw();
    if (is_display_math_env(env)) {
      skip_env_body(env);
      emit_token(kEqnToken);
      out_ += ' ';
      return;
    }
    if (is_skipped_env(env)) {
      skip_env_body(env);
      return;
    }
    if (is_verbatim_env(env)) {
      skip_optional_args();
      out_ += ' ';
      out_ += take_until("\\end{" + env + "}");
      out_ += ' ';
      return;
    }
    skip_optional_args();
    if (env == "tabular" || env == "tabular*" || env == "array" || env == "tabularx" ||
        env == "longtable" || env == "minipage" || env == "wrapfigure") {
      if (env == "tabular*" || env == "tabularx" || env == "wrapfigure") read_arg_raw();
      read_arg_raw();
    } else if (env == "thebibliography") {
      read_arg_raw();
    }
    out_ += ' ';
  }

  // Skips to the \end{env} matching this \begin{env}, honoring nesting.
  void skip_env_body(const std::string& env) {
    const std::string open = "\\begin{" + env + "}";
    const std::string close = "\\end{" + env + "}";
    int depth = 1;
    while (!at_end()) {
      auto next_open = src_.find(open, pos_);
      auto next_close = src_.find(close, pos_);
      if (next_close == std::string_view::npos) {
        warn("unterminated environment " + env);
        pos_ = src_.size();
        return;
      }
      if (next_open != std::string_view::npos && next_open < next_close) {
        ++depth;
        pos_ = next_open + open.size();
        continue;
      }
      pos_ = next_close + close.size();
      if (--depth == 0) return;
    }
  }
};

}  // namespace detail

inline Conversion latex_to_plaintext(std::string_view tex) {
  return detail::Renderer(tex).run();
}

}  // namespace disclosure::latex
