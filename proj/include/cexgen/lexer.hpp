#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cexgen {

enum class TokenKind { Ident, Number, String, Symbol, Keyword };

struct Token {
  TokenKind kind = TokenKind::Symbol;
  std::string text;
  std::size_t begin = 0;  // byte offsets into the lexed text
  std::size_t end = 0;
  bool space_before = false;

  bool is(std::string_view s) const { return kind != TokenKind::String && text == s; }
};

// Replaces `--` line comments and nested `/- -/` block comments with
// spaces. Newlines and byte offsets are preserved.
std::string strip_comments(std::string_view text);

// Lean 4 identifier character classes (ASCII letters, letter-like unicode,
// subscripts).
bool is_ident_start(char32_t cp);
bool is_ident_rest(char32_t cp);

bool is_keyword(std::string_view word);

// Tokenizes comment-free text. ASCII spellings of connectives (`->`, `<=`,
// `!=`, ...) are normalized to their unicode forms.
std::vector<Token> tokenize(std::string_view text);

// Identifier tokens of `text` (after comment stripping), in order.
std::vector<std::string> lex_identifiers(std::string_view text);

// Joins tokens back to text with one space wherever the source had
// whitespace between them.
std::string join_tokens(const std::vector<Token>& tokens, std::size_t first, std::size_t last);

// Decodes one UTF-8 code point starting at `pos`; advances `pos`.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

}  // namespace cexgen
