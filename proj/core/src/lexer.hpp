#pragma once

// Tokenizer shared by the tree DSL and the predicate language.

#include <string>
#include <string_view>
#include <vector>

namespace atdecor::detail {

enum class Tok {
  kString,   // "double quoted", escapes \" and \\ .
  kNumber,
  kIdent,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kAt,
  kColon,
  kPlus,
  kMinus,
  kStar,
  kEq,       // = or ==
  kLe,       // <=
  kGe,       // >=
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;  // unescaped for strings, raw otherwise
  double number = 0.0;
  int line = 1;
  int column = 1;
};

// Splits `source` into tokens. `#` starts a comment running to end of line.
// `line_offset` is added to reported line numbers. Throws ParseError.
std::vector<Token> tokenize(std::string_view source, int line_offset = 0);

std::string_view describe(Tok kind);

// Quotes a label for the DSLs.
std::string quote(std::string_view label);

}  // namespace atdecor::detail
