#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace beqh::lex {

// A lossless lexer for the subset of Lean 4 surface syntax that statement
// cleaning needs: identifiers, numbers, operators, brackets, strings and
// comments. Concatenating the text of every token reproduces the input.

enum class Kind {
  Whitespace,
  Newline,
  Ident,
  Number,
  Symbol,
  String,
  Char,
  LineComment,
  BlockComment,
  DocComment,
};

struct Token {
  Kind kind;
  std::size_t begin;
  std::size_t end;

  std::string_view text(std::string_view src) const { return src.substr(begin, end - begin); }
  bool is_trivia() const {
    return kind == Kind::Whitespace || kind == Kind::Newline || kind == Kind::LineComment ||
           kind == Kind::BlockComment || kind == Kind::DocComment;
  }
  bool is_comment() const {
    return kind == Kind::LineComment || kind == Kind::BlockComment || kind == Kind::DocComment;
  }
};

struct CodePoint {
  char32_t value;
  std::size_t length;
};

inline CodePoint decode(std::string_view s, std::size_t i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
    }
  }
  return {0xFFFD, 1};
}

// Mirrors Lean's `isLetterLike` / `isSubScriptAlnum`.
inline bool is_letter_like(char32_t c) {
  return (0x3b1 <= c && c <= 0x3c9 && c != 0x3bb) ||
         (0x391 <= c && c <= 0x3A9 && c != 0x3A0 && c != 0x3A3) ||
         (0x3ca <= c && c <= 0x3fb) || (0x1f00 <= c && c <= 0x1ffe) ||
         (0x2100 <= c && c <= 0x214f) || (0x1d49c <= c && c <= 0x1d59f);
}

inline bool is_subscript_alnum(char32_t c) {
  return (0x2080 <= c && c <= 0x2089) || (0x2090 <= c && c <= 0x209c) ||
         (0x1d62 <= c && c <= 0x1d6a) || c == 0x2c7c;
}

inline bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ascii_digit(char32_t c) { return c >= '0' && c <= '9'; }

inline bool is_ident_start(char32_t c) { return is_ascii_alpha(c) || c == '_' || is_letter_like(c); }

inline bool is_ident_rest(char32_t c) {
  return is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' || c == '\'' || c == '!' || c == '?' ||
         is_letter_like(c) || is_subscript_alnum(c);
}

inline constexpr std::array<std::string_view, 20> kMultiCharSymbols = {
    "...", "<->", "<;>", "|>.", ":=", "=>", "->", "<-", "<=", ">=",
    "!=",  "==",  "++",  "&&",  "||", "::", "..", "|>", "<|", "@["};

inline bool is_open_bracket(std::string_view t) {
  return t == "(" || t == "[" || t == "{" || t == "⟨" || t == "⦃" || t == "@[" || t == "#[" ||
         t == "⟪" || t == "⁅";
}

inline bool is_close_bracket(std::string_view t) {
  return t == ")" || t == "]" || t == "}" || t == "⟩" || t == "⦄" || t == "⟫" || t == "⁆";
}

namespace detail {

inline std::size_t scan_block_comment(std::string_view s, std::size_t i) {
  // s[i..] starts with "/-"; comments nest.
  int depth = 0;
  while (i < s.size()) {
    if (s.compare(i, 2, "/-") == 0) {
      ++depth;
      i += 2;
    } else if (s.compare(i, 2, "-/") == 0) {
      --depth;
      i += 2;
      if (depth == 0) return i;
    } else {
      ++i;
    }
  }
  return s.size();
}

inline std::size_t scan_ident(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    if (s[i] == '\xC2' && i + 1 < s.size() && s[i + 1] == '\xAB') {  // «...»
      std::size_t close = s.find("\xC2\xBB", i + 2);
      i = close == std::string_view::npos ? s.size() : close + 2;
    } else {
      CodePoint cp = decode(s, i);
      if (!is_ident_start(cp.value)) break;
      i += cp.length;
      while (i < s.size()) {
        CodePoint r = decode(s, i);
        if (!is_ident_rest(r.value)) break;
        i += r.length;
      }
    }
    // Dotted continuation: `Nat.succ`, `h.symm`, `x.1`.
    if (i + 1 < s.size() && s[i] == '.') {
      CodePoint next = decode(s, i + 1);
      bool guillemet = s[i + 1] == '\xC2' && i + 2 < s.size() && s[i + 2] == '\xAB';
      if (is_ident_start(next.value) || guillemet) {
        ++i;
        continue;
      }
      if (is_ascii_digit(next.value)) {
        ++i;
        while (i < s.size() && is_ascii_digit(static_cast<unsigned char>(s[i]))) ++i;
      }
    }
    break;
  }
  return i;
}

inline std::size_t char_literal_length(std::string_view s, std::size_t i) {
  if (i + 2 >= s.size()) return 0;
  if (s[i + 1] == '\\') return (i + 3 < s.size() && s[i + 3] == '\'') ? 4 : 0;
  std::size_t len = decode(s, i + 1).length;
  return (i + 1 + len < s.size() && s[i + 1 + len] == '\'') ? 2 + len : 0;
}

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Kind k, std::size_t end) {
    out.push_back({k, i, end});
    i = end;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      push(Kind::Newline, i + 1);
    } else if (c == ' ' || c == '\t' || c == '\r') {
      std::size_t j = i;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r')) ++j;
      push(Kind::Whitespace, j);
    } else if (s.compare(i, 2, "--") == 0) {
      std::size_t j = s.find('\n', i);
      push(Kind::LineComment, j == std::string_view::npos ? s.size() : j);
    } else if (s.compare(i, 2, "/-") == 0) {
      bool doc = s.compare(i, 3, "/--") == 0 || s.compare(i, 3, "/-!") == 0;
      push(doc ? Kind::DocComment : Kind::BlockComment, detail::scan_block_comment(s, i));
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '"') j += (s[j] == '\\' && j + 1 < s.size()) ? 2 : 1;
      push(Kind::String, std::min(s.size(), j + 1));
    } else if (c == '\'' && detail::char_literal_length(s, i) > 0) {
      push(Kind::Char, i + detail::char_literal_length(s, i));
    } else if (is_ascii_digit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size()) {
        unsigned char d = s[j];
        if (std::isalnum(d) || d == '_') {
          ++j;
        } else if (d == '.' && j + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
          j += 2;
        } else {
          break;
        }
      }
      push(Kind::Number, j);
    } else {
      CodePoint cp = decode(s, i);
      bool guillemet = c == '\xC2' && i + 1 < s.size() && s[i + 1] == '\xAB';
      if (is_ident_start(cp.value) || guillemet) {
        push(Kind::Ident, detail::scan_ident(s, i));
        continue;
      }
      std::size_t len = cp.length;
      if (cp.value < 0x80) {
        for (std::string_view sym : kMultiCharSymbols) {
          if (s.compare(i, sym.size(), sym) == 0) {
            len = sym.size();
            break;
          }
        }
        if (len == 1 && c == '#' && i + 1 < s.size() && s[i + 1] == '[') len = 2;
      }
      push(Kind::Symbol, i + len);
    }
  }
  return out;
}

/// Non-trivia token texts; the tokenization used for Self-BLEU and for
/// spacing-insensitive statement comparison.
inline std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> words;
  for (const Token& t : tokenize(s)) {
    if (!t.is_trivia()) words.emplace_back(t.text(s));
  }
  return words;
}

}  // namespace beqh::lex
