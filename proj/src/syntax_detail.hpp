#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cexgen/lexer.hpp"

namespace cexgen::detail {

bool is_open_bracket(std::string_view s);
bool is_close_bracket(std::string_view s);

// For each opening bracket token, the index of its closer (and vice
// versa); -1 elsewhere. Throws SyntaxMalformed on imbalance.
std::vector<long> match_brackets(const std::vector<Token>& tokens);

// Index of the first token in [first, last) at bracket depth 0 that equals
// `text`, or `last`.
std::size_t find_top_level(const std::vector<Token>& tokens, const std::vector<long>& match,
                           std::size_t first, std::size_t last, std::string_view text);

// Splits a statement at top-level `→` until a token that could capture the
// rest of the statement (binders, `↔`, `fun`, ...). Returns piece
// boundaries; the last piece is the conclusion.
std::vector<std::pair<std::size_t, std::size_t>> split_arrows(const std::vector<Token>& tokens,
                                                               const std::vector<long>& match,
                                                               std::size_t first, std::size_t last);

}  // namespace cexgen::detail
