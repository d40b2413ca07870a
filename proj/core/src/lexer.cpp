#include "lexer.hpp"

#include <cctype>
#include <charconv>

#include "atdecor/errors.hpp"

namespace atdecor::detail {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

}  // namespace

std::vector<Token> tokenize(std::string_view source, int line_offset) {
  std::vector<Token> out;
  int line = 1 + line_offset;
  int column = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < source.size(); ++k, ++i) {
      if (source[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  auto push = [&](Tok kind, std::string text, int l, int c) {
    out.push_back(Token{kind, std::move(text), 0.0, l, c});
  };

  while (i < source.size()) {
    const char c = source[i];
    const int l = line;
    const int col = column;
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '"') {
      std::string text;
      advance(1);
      bool closed = false;
      while (i < source.size()) {
        const char d = source[i];
        if (d == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i + 1 >= source.size()) break;
          const char e = source[i + 1];
          if (e != '"' && e != '\\') {
            throw ParseError(std::string("unsupported escape \\") + e, line, column);
          }
          text.push_back(e);
          advance(2);
          continue;
        }
        text.push_back(d);
        advance(1);
      }
      if (!closed) throw ParseError("unterminated string", l, col);
      push(Tok::kString, std::move(text), l, col);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < source.size() &&
         std::isdigit(static_cast<unsigned char>(source[i + 1])))) {
      double value = 0.0;
      const char* first = source.data() + i;
      const char* last = source.data() + source.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc()) throw ParseError("malformed number", l, col);
      const auto len = static_cast<std::size_t>(ptr - first);
      Token tok{Tok::kNumber, std::string(source.substr(i, len)), value, l, col};
      advance(len);
      if (i < source.size() && is_ident_start(source[i])) {
        throw ParseError("malformed number", l, col);
      }
      out.push_back(std::move(tok));
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < source.size() && is_ident_char(source[j])) ++j;
      push(Tok::kIdent, std::string(source.substr(i, j - i)), l, col);
      advance(j - i);
      continue;
    }
    auto two = [&](char next) { return i + 1 < source.size() && source[i + 1] == next; };
    switch (c) {
      case '(': push(Tok::kLParen, "(", l, col); advance(1); continue;
      case ')': push(Tok::kRParen, ")", l, col); advance(1); continue;
      case '[': push(Tok::kLBracket, "[", l, col); advance(1); continue;
      case ']': push(Tok::kRBracket, "]", l, col); advance(1); continue;
      case ',': push(Tok::kComma, ",", l, col); advance(1); continue;
      case '@': push(Tok::kAt, "@", l, col); advance(1); continue;
      case ':': push(Tok::kColon, ":", l, col); advance(1); continue;
      case '+': push(Tok::kPlus, "+", l, col); advance(1); continue;
      case '-': push(Tok::kMinus, "-", l, col); advance(1); continue;
      case '*': push(Tok::kStar, "*", l, col); advance(1); continue;
      case '=':
        push(Tok::kEq, "=", l, col);
        advance(two('=') ? 2 : 1);
        continue;
      case '<':
        if (two('=')) {
          push(Tok::kLe, "<=", l, col);
          advance(2);
          continue;
        }
        throw ParseError("strict '<' is not supported; use <=", l, col);
      case '>':
        if (two('=')) {
          push(Tok::kGe, ">=", l, col);
          advance(2);
          continue;
        }
        throw ParseError("strict '>' is not supported; use >=", l, col);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l, col);
    }
  }
  push(Tok::kEnd, "", line, column);
  return out;
}

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::kString: return "string";
    case Tok::kNumber: return "number";
    case Tok::kIdent: return "identifier";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kComma: return "','";
    case Tok::kAt: return "'@'";
    case Tok::kColon: return "':'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kEq: return "'='";
    case Tok::kLe: return "'<='";
    case Tok::kGe: return "'>='";
    case Tok::kEnd: return "end of input";
  }
  return "token";
}

std::string quote(std::string_view label) {
  std::string out;
  out.reserve(label.size() + 2);
  out.push_back('"');
  for (char c : label) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace atdecor::detail
