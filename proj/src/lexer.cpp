#include "ptyck/lexer.hpp"

#include <array>
#include <cctype>
#include <limits>

namespace ptyck {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "state", "case",  "of",     "method",    "var",    "val",    "type",  "Pi",
    "match", "default", "while", "invariant", "skip",  "new",    "let",   "in",
    "unique", "immutable", "return", "true",  "false", "exists", "forall", "div",
    "int",   "bool",  "string", "void",      "nat",    "and",    "or",    "not",
    "main",  "inst",  "print"};

// Longest first.
constexpr std::array<std::string_view, 11> kMultiPunct = {
    "<=>", ">>", "->", "<-", "<=", ">=", "==", "!=", "&&", "||", "=>"};

constexpr std::string_view kSinglePunct = "(){}[],;.:|+-*/<>=!~_?%";

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Int: return "integer '" + t.text + "'";
    case TokenKind::String: return "string literal";
    default: return "'" + t.text + "'";
  }
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') { ++line; col = 1; }
      else ++col;
    }
  };
  auto here = [&]() {
    Span s;
    s.line = s.end_line = line;
    s.col = s.end_col = col;
    s.begin = s.end = i;
    return s;
  };
  auto finish = [&](Span s) {
    s.end = i;
    s.end_line = line;
    s.end_col = col;
    return s;
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      Span s = here();
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance(1);
      if (i + 1 >= src.size()) throw SyntaxError(s, "unterminated comment");
      advance(2);
      continue;
    }

    Token t;
    Span s = here();
    if (std::isalpha(static_cast<unsigned char>(c)) ||
        (c == '_' && i + 1 < src.size() && (std::isalnum(static_cast<unsigned char>(src[i + 1])) || src[i + 1] == '_'))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      while (j < src.size() && src[j] == '\'') ++j;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      t.kind = is_keyword(t.text) ? TokenKind::Keyword : TokenKind::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::int64_t v = 0;
      bool binary = false;
      auto overflow = [&]() { throw SyntaxError(s, "integer literal out of range"); };
      if (c == '0' && i + 1 < src.size() && (src[i + 1] == 'b' || src[i + 1] == 'B')) {
        binary = true;
        j = i + 2;
        std::size_t digits = 0;
        while (j < src.size() && (src[j] == '0' || src[j] == '1')) {
          if (v > (std::numeric_limits<std::int64_t>::max() >> 1)) overflow();
          v = v * 2 + (src[j] - '0');
          ++j;
          ++digits;
        }
        if (digits == 0) throw SyntaxError(s, "binary literal needs at least one digit");
      } else {
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) overflow();
          v = v * 10 + (src[j] - '0');
          ++j;
        }
      }
      if (j < src.size() && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        throw SyntaxError(s, "malformed number");
      t.kind = TokenKind::Int;
      t.value = v;
      t.binary = binary;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::string val;
      advance(1);
      while (i < src.size() && src[i] != '"') {
        if (src[i] == '\\' && i + 1 < src.size()) {
          char e = src[i + 1];
          val.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
          advance(2);
        } else {
          if (src[i] == '\n') throw SyntaxError(s, "newline in string literal");
          val.push_back(src[i]);
          advance(1);
        }
      }
      if (i >= src.size()) throw SyntaxError(s, "unterminated string literal");
      advance(1);
      t.kind = TokenKind::String;
      t.text = val;
    } else {
      bool matched = false;
      for (auto p : kMultiPunct) {
        if (src.substr(i, p.size()) == p) {
          t.kind = TokenKind::Punct;
          t.text = std::string(p);
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (kSinglePunct.find(c) == std::string_view::npos)
          throw SyntaxError(s, std::string("unexpected character '") + c + "'");
        t.kind = TokenKind::Punct;
        t.text = std::string(1, c);
        advance(1);
      }
    }
    t.span = finish(s);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokenKind::End;
  end.span = here();
  out.push_back(end);
  return out;
}

}  // namespace ptyck
