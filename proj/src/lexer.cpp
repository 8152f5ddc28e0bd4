#include "cexgen/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "cexgen/errors.hpp"

namespace cexgen {

namespace {

constexpr std::array kKeywords = {
    "theorem", "lemma", "example", "def",    "fun",  "λ",     "if",    "then", "else",
    "let",     "have",  "show",    "from",   "by",   "at",    "with",  "match", "in",
    "do",      "where", "suffices", "calc",  "obtain", "instance", "structure",
};

// Longest match first.
constexpr std::array<std::pair<std::string_view, std::string_view>, 18> kMultiSymbols = {{
    {"<->", "↔"},
    {"<;>", "<;>"},
    {":=", ":="},
    {"=>", "=>"},
    {"->", "→"},
    {"<=", "≤"},
    {">=", "≥"},
    {"!=", "≠"},
    {"==", "=="},
    {"&&", "&&"},
    {"||", "||"},
    {"/\\", "∧"},
    {"\\/", "∨"},
    {"<|", "<|"},
    {"|>", "|>"},
    {"..", ".."},
    {"⁻¹", "⁻¹"},
    {"::", "::"},
}};

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_subscript_alnum(char32_t c) {
  return (c >= 0x2080 && c <= 0x2089) || (c >= 0x2090 && c <= 0x209c) ||
         (c >= 0x1d62 && c <= 0x1d6a) || c == 0x2c7c;
}

bool is_letter_like(char32_t c) {
  return (c >= 0x3b1 && c <= 0x3c9 && c != 0x3bb) ||                 // lower greek, no λ
         (c >= 0x391 && c <= 0x3a9 && c != 0x3a0 && c != 0x3a3) ||  // upper greek, no Π Σ
         (c >= 0x3ca && c <= 0x3fb) ||                              // coptic
         (c >= 0x1f00 && c <= 0x1ffe) ||                            // polytonic greek
         (c >= 0x2100 && c <= 0x214f) ||                            // letterlike block
         (c >= 0x1d49c && c <= 0x1d59f);                            // script/double-struck
}

}  // namespace

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int len = 1;
  char32_t cp = b0;
  if (b0 >= 0xf0) {
    len = 4;
    cp = b0 & 0x07;
  } else if (b0 >= 0xe0) {
    len = 3;
    cp = b0 & 0x0f;
  } else if (b0 >= 0xc0) {
    len = 2;
    cp = b0 & 0x1f;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xfffd;
  }
  for (int i = 1; i < len; ++i) cp = (cp << 6) | (static_cast<unsigned char>(s[pos + i]) & 0x3f);
  pos += len;
  return cp;
}

bool is_ident_start(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || is_letter_like(c);
}

bool is_ident_rest(char32_t c) {
  return is_ident_start(c) || is_digit(c) || c == '\'' || c == '!' || c == '?' ||
         is_subscript_alnum(c);
}

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::string strip_comments(std::string_view text) {
  std::string out(text);
  std::size_t i = 0;
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < out.size(); ++k)
      if (out[k] != '\n') out[k] = ' ';
  };
  while (i < text.size()) {
    if (text[i] == '"') {
      // string literal; skip to the closing quote
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += (text[j] == '\\') ? 2 : 1;
      i = j + 1;
    } else if (text.compare(i, 2, "--") == 0) {
      std::size_t j = text.find('\n', i);
      if (j == std::string_view::npos) j = text.size();
      blank(i, j);
      i = j;
    } else if (text.compare(i, 2, "/-") == 0) {
      int depth = 0;
      std::size_t j = i;
      while (j < text.size()) {
        if (text.compare(j, 2, "/-") == 0) {
          ++depth;
          j += 2;
        } else if (text.compare(j, 2, "-/") == 0) {
          --depth;
          j += 2;
          if (depth == 0) break;
        } else {
          ++j;
        }
      }
      if (depth != 0) throw SyntaxMalformed("unterminated block comment", {i, text.size()});
      blank(i, j);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  bool space = false;
  while (i < text.size()) {
    const unsigned char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = true;
      ++i;
      continue;
    }
    Token tok;
    tok.begin = i;
    tok.space_before = space;
    space = false;

    std::size_t probe = i;
    const char32_t cp = decode_utf8(text, probe);

    if (is_ident_start(cp)) {
      std::size_t j = probe;
      for (;;) {
        std::size_t k = j;
        if (k >= text.size()) break;
        if (text[k] == '.') {
          // dotted continuation: `Nat.succ`, `h.1`
          std::size_t m = k + 1;
          if (m >= text.size()) break;
          const char32_t nx = decode_utf8(text, m);
          if (!is_ident_start(nx) && !is_digit(nx)) break;
          j = m;
          continue;
        }
        const char32_t nx = decode_utf8(text, k);
        if (!is_ident_rest(nx)) break;
        // `x!=y` and `x?=`: leave the operator intact
        if ((nx == '!' || nx == '?') && k < text.size() && text[k] == '=') break;
        j = k;
      }
      tok.text = std::string(text.substr(i, j - i));
      tok.kind = is_keyword(tok.text) ? TokenKind::Keyword : TokenKind::Ident;
      tok.end = j;
      i = j;
    } else if (is_digit(cp)) {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(text.substr(i, j - i));
      tok.end = j;
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += (text[j] == '\\') ? 2 : 1;
      if (j >= text.size()) throw SyntaxMalformed("unterminated string literal", {i, text.size()});
      tok.kind = TokenKind::String;
      tok.text = std::string(text.substr(i, j + 1 - i));
      tok.end = j + 1;
      i = j + 1;
    } else {
      tok.kind = TokenKind::Symbol;
      bool matched = false;
      for (const auto& [spelling, canonical] : kMultiSymbols) {
        if (text.compare(i, spelling.size(), spelling) == 0) {
          tok.text = std::string(canonical);
          tok.end = i + spelling.size();
          i = tok.end;
          matched = true;
          break;
        }
      }
      if (!matched) {
        tok.text = std::string(text.substr(i, probe - i));
        tok.end = probe;
        i = probe;
      }
      if (tok.text == "λ") tok.kind = TokenKind::Keyword;
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<std::string> lex_identifiers(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(strip_comments(text)))
    if (t.kind == TokenKind::Ident) out.push_back(std::move(t.text));
  return out;
}

std::string join_tokens(const std::vector<Token>& tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i > first && tokens[i].space_before) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

}  // namespace cexgen
