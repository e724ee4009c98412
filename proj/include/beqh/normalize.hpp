#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beqh/core.hpp"
#include "beqh/error.hpp"
#include "beqh/lexer.hpp"

namespace beqh::normalize {

/// Receives messages about regions that could not be transformed. Unset by
/// default (silent).
inline std::function<void(const std::string&)>& warning_sink() {
  static std::function<void(const std::string&)> sink;
  return sink;
}

namespace detail {

inline void warn(const std::string& msg) {
  if (auto& sink = warning_sink()) sink(msg);
}

inline bool is_decl_keyword(std::string_view t) {
  return t == "theorem" || t == "lemma" || t == "example";
}

// Keywords that open a new top-level command when they are the first token of
// a line.
inline bool is_command_keyword(std::string_view t) {
  static constexpr std::string_view kw[] = {
      "import",   "open",       "namespace", "section",   "end",       "variable",
      "variables", "universe",  "universes", "def",       "theorem",   "lemma",
      "instance", "structure",  "class",     "inductive", "abbrev",    "example",
      "noncomputable", "private", "protected", "attribute", "set_option", "notation",
      "infix",    "infixl",     "infixr",    "prefix",    "postfix",   "macro",
      "macro_rules", "syntax",  "elab",      "local",     "scoped",    "mutual",
      "opaque",   "axiom",      "partial",   "unsafe",    "irreducible_def", "alias",
      "@[",       "#check",     "#eval",     "#print",    "#reduce",   "#align",
      "#exit",    "#lint"};
  return std::find(std::begin(kw), std::end(kw), t) != std::end(kw);
}

inline bool is_modifier(std::string_view t) {
  return t == "private" || t == "protected" || t == "noncomputable" || t == "partial" ||
         t == "unsafe" || t == "nonrec";
}

struct Scan {
  std::string_view src;
  std::vector<lex::Token> tokens;

  explicit Scan(std::string_view s) : src(s), tokens(lex::tokenize(s)) {}

  std::string_view text(std::size_t i) const { return tokens[i].text(src); }

  // Bracket depth before each token.
  std::vector<int> depths() const {
    std::vector<int> d(tokens.size());
    int depth = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      d[i] = depth;
      if (tokens[i].kind != lex::Kind::Symbol) continue;
      std::string_view t = text(i);
      if (lex::is_open_bracket(t)) {
        ++depth;
      } else if (lex::is_close_bracket(t) && depth > 0) {
        --depth;
      }
    }
    return d;
  }

  bool at_line_start(std::size_t i) const {
    return tokens[i].begin == 0 || src[tokens[i].begin - 1] == '\n';
  }

  std::optional<std::size_t> first_decl_keyword(std::size_t from = 0) const {
    auto d = depths();
    for (std::size_t i = from; i < tokens.size(); ++i) {
      if (tokens[i].kind == lex::Kind::Ident && d[i] == 0 && is_decl_keyword(text(i))) return i;
    }
    return std::nullopt;
  }
};

inline std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Byte offset where the statement of the first declaration ends, or nullopt
// if the text carries no proof and no following command.
inline std::optional<std::size_t> statement_end(const Scan& scan, std::size_t decl) {
  auto depth = scan.depths();
  int pending_binds = 0;  // `let`/`have` whose `:=` belongs to the statement
  for (std::size_t i = decl + 1; i < scan.tokens.size(); ++i) {
    const auto& tok = scan.tokens[i];
    if (depth[i] != 0 || tok.is_trivia()) continue;
    std::string_view t = scan.text(i);
    if (tok.kind == lex::Kind::Ident) {
      if (t == "let" || t == "have" || t == "letI" || t == "haveI") {
        ++pending_binds;
      } else if (t == "by" || t == "where") {
        return tok.begin;
      } else if (scan.at_line_start(i) && is_command_keyword(t)) {
        return tok.begin;
      }
    } else if (tok.kind == lex::Kind::Symbol) {
      if (t == ":=") {
        if (pending_binds > 0) {
          --pending_binds;
        } else {
          return tok.begin;
        }
      } else if (t == "@[" && scan.at_line_start(i)) {
        return tok.begin;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Truncates the first theorem/lemma/example at the end of its statement. The
/// top-level `:=` is found with a bracket-depth scan, so `:=` nested inside
/// binders, structure instances or anonymous constructors is left alone.
inline std::string strip_proof(std::string_view raw) {
  detail::Scan scan(raw);
  auto decl = scan.first_decl_keyword();
  if (!decl) throw Error(ErrorCode::NoDeclarationFound, "no theorem, lemma or example declaration");
  auto end = detail::statement_end(scan, *decl);
  if (!end) return std::string(raw);
  return std::string(detail::rstrip(raw.substr(0, *end)));
}

/// Replaces the declaration's name token. `example` becomes `theorem <dummy>`.
inline std::string rename_theorem(std::string_view src, std::string_view dummy) {
  detail::Scan scan(src);
  auto decl = scan.first_decl_keyword();
  if (!decl) throw Error(ErrorCode::NoDeclarationFound, "no theorem, lemma or example declaration");
  const auto& kw = scan.tokens[*decl];
  std::string out;
  if (scan.text(*decl) == "example") {
    out.append(src.substr(0, kw.begin));
    out += "theorem ";
    out += dummy;
    out.append(src.substr(kw.end));
    return out;
  }
  std::size_t i = *decl + 1;
  while (i < scan.tokens.size() && scan.tokens[i].is_trivia()) ++i;
  if (i < scan.tokens.size() && scan.tokens[i].kind == lex::Kind::Ident) {
    const auto& name = scan.tokens[i];
    out.append(src.substr(0, name.begin));
    out += dummy;
    out.append(src.substr(name.end));
  } else {
    // Nameless `theorem : ...`: insert the dummy after the keyword.
    out.append(src.substr(0, kw.end));
    out += ' ';
    out += dummy;
    out.append(src.substr(kw.end));
  }
  return out;
}

/// Collapses space/tab runs, trims every line and drops blank lines.
inline std::string normalize_whitespace(std::string_view src) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    std::size_t nl = src.find('\n', pos);
    std::string_view line = src.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string collapsed;
    bool in_space = false;
    for (char c : line) {
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        in_space = true;
      } else {
        if (in_space && !collapsed.empty()) collapsed += ' ';
        in_space = false;
        collapsed += c;
      }
    }
    if (!collapsed.empty()) {
      if (!out.empty()) out += '\n';
      out += collapsed;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

/// Removes line comments, block comments and docstrings.
inline std::string strip_comments(std::string_view src) {
  std::string out;
  for (const auto& tok : lex::tokenize(src)) {
    if (tok.is_comment()) {
      if (tok.kind != lex::Kind::LineComment) out += ' ';
      continue;
    }
    out.append(tok.text(src));
  }
  return out;
}

/// Body of the first fenced code block, whatever its language tag; the input
/// itself when there is no fence.
inline std::string extract_code_block(std::string_view text) {
  std::size_t open = text.find("```");
  if (open == std::string_view::npos) return std::string(text);
  std::size_t body = text.find('\n', open);
  if (body == std::string_view::npos) return "";
  ++body;
  std::size_t close = text.find("```", body);
  std::string_view inner = text.substr(body, close == std::string_view::npos ? std::string_view::npos : close - body);
  return std::string(inner);
}

/// Generator output -> cleaned prediction. Text before the declaration keyword
/// (imports, opens, attributes) is dropped; the pool supplies the context.
inline FormalStatement clean(std::string_view raw, std::string_view dummy, std::string_view context = {}) {
  std::string code = strip_comments(extract_code_block(raw));
  detail::Scan scan(code);
  auto decl = scan.first_decl_keyword();
  if (!decl) throw Error(ErrorCode::NoDeclarationFound, "generator output holds no theorem statement");
  std::string from_decl = code.substr(scan.tokens[*decl].begin);
  FormalStatement s;
  s.name = std::string(dummy);
  s.context = std::string(context);
  s.signature_src = normalize_whitespace(rename_theorem(strip_proof(from_decl), dummy));
  s.origin = Origin::Prediction;
  return s;
}

/// Spacing-insensitive canonical text: tokens joined by single spaces.
inline std::string canonical_tokens(std::string_view src) {
  std::string out;
  for (const auto& w : lex::word_tokens(src)) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// --- context preparation ----------------------------------------------------

namespace detail {

struct Chunk {
  std::string text;
  bool is_theorem = false;
  bool prefix_only = false;  // docstrings, attributes and modifiers only
  bool ends_with_in = false; // `open Foo in` style prefix command
};

inline std::vector<Chunk> split_commands(std::string_view file) {
  Scan scan(file);
  auto depth = scan.depths();
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < scan.tokens.size(); ++i) {
    const auto& tok = scan.tokens[i];
    if (tok.begin == 0 || depth[i] != 0 || !scan.at_line_start(i)) continue;
    std::string_view t = scan.text(i);
    bool starts_command = (tok.kind == lex::Kind::Ident || tok.kind == lex::Kind::Symbol) && is_command_keyword(t);
    if (tok.kind == lex::Kind::Symbol && t == "#" ) starts_command = true;
    if (tok.kind == lex::Kind::DocComment) starts_command = true;
    if (starts_command) starts.push_back(tok.begin);
  }
  starts.push_back(file.size());

  std::vector<Chunk> chunks;
  for (std::size_t c = 0; c + 1 < starts.size(); ++c) {
    if (starts[c] == starts[c + 1]) continue;
    Chunk chunk;
    chunk.text = std::string(file.substr(starts[c], starts[c + 1] - starts[c]));
    Scan inner(chunk.text);
    auto d = inner.depths();
    bool saw_body = false;
    std::string_view last;
    for (std::size_t i = 0; i < inner.tokens.size(); ++i) {
      const auto& tok = inner.tokens[i];
      if (tok.is_trivia()) {
        if (tok.kind == lex::Kind::DocComment) continue;
        continue;
      }
      std::string_view t = inner.text(i);
      last = t;
      if (d[i] > 0 || t == "@[" || t == "]") continue;
      if (!saw_body && tok.kind == lex::Kind::Ident && is_modifier(t)) continue;
      if (!saw_body) {
        saw_body = true;
        chunk.is_theorem = tok.kind == lex::Kind::Ident && is_decl_keyword(t);
      }
    }
    chunk.prefix_only = !saw_body;
    chunk.ends_with_in = last == "in";
    chunks.push_back(std::move(chunk));
  }

  // Attach docstrings/attributes and `... in` prefixes to the command they
  // annotate.
  std::vector<Chunk> merged;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    Chunk cur = std::move(chunks[c]);
    while ((cur.prefix_only || cur.ends_with_in) && c + 1 < chunks.size()) {
      Chunk& next = chunks[++c];
      cur.text += next.text;
      cur.is_theorem = next.is_theorem;
      cur.prefix_only = next.prefix_only;
      cur.ends_with_in = next.ends_with_in;
    }
    merged.push_back(std::move(cur));
  }
  return merged;
}

inline std::string_view trailing_whitespace(std::string_view s) {
  return s.substr(rstrip(s).size());
}

}  // namespace detail

/// Prepares in-file context for a prompt. NoProofs replaces theorem proofs by
/// `sorry`; NoTheoremsProofs drops theorem declarations and keeps everything
/// else.
inline std::string prepare_context(std::string_view file_content, ContextMode mode) {
  switch (mode) {
    case ContextMode::None: return "";
    case ContextMode::FullFile: return std::string(file_content);
    case ContextMode::NoProofs:
    case ContextMode::NoTheoremsProofs: break;
  }
  std::string out;
  for (const auto& chunk : detail::split_commands(file_content)) {
    if (!chunk.is_theorem) {
      out += chunk.text;
      continue;
    }
    if (mode == ContextMode::NoTheoremsProofs) continue;
    detail::Scan scan(chunk.text);
    auto decl = scan.first_decl_keyword();
    auto end = decl ? detail::statement_end(scan, *decl) : std::nullopt;
    if (!end) {
      detail::warn("prepare_context: no proof found, passing through: " +
                   std::string(detail::rstrip(chunk.text).substr(0, 80)));
      out += chunk.text;
      continue;
    }
    out += detail::rstrip(std::string_view(chunk.text).substr(0, *end));
    out += " := sorry";
    out += detail::trailing_whitespace(chunk.text);
  }
  std::string_view kept = detail::rstrip(out);
  std::string result(kept);
  result += detail::trailing_whitespace(file_content);
  return result;
}

}  // namespace beqh::normalize
