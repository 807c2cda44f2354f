#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ptyck {

struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
  std::size_t begin = 0;  // byte offsets
  std::size_t end = 0;

  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  std::string str() const {
    return std::to_string(line) + ":" + std::to_string(col);
  }
  friend bool operator==(const Span&, const Span&) = default;
};

inline Span join(const Span& a, const Span& b) {
  Span s = a;
  if (b.end > s.end) {
    s.end = b.end;
    s.end_line = b.end_line;
    s.end_col = b.end_col;
  }
  return s;
}

/// Error carrying a source position. Used by every textual front end.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const Span& where, const std::string& msg)
      : std::runtime_error(where.str() + ": " + msg), span_(where), message_(msg) {}
  const Span& span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  Span span_;
  std::string message_;
};

enum class TokenKind { Ident, Keyword, Int, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  std::int64_t value = 0;  // Int only
  bool binary = false;     // Int written as 0b...
  Span span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_kw(std::string_view t) const { return is(TokenKind::Keyword, t); }
};

bool is_keyword(std::string_view word);

/// Splits source text into tokens. Comments (`//`, `/* */`) are dropped.
/// Identifiers may carry trailing primes (`ns'`). Throws SyntaxError.
std::vector<Token> tokenize(std::string_view source);

std::string describe(const Token& t);

/// Cursor over a token vector shared by the formula, counter-system,
/// automaton and program parsers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  std::size_t mark() const { return pos_; }
  void reset(std::size_t m) { pos_ = m; }
  const Token& previous() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) { next(); return true; }
    return false;
  }
  bool accept_kw(std::string_view k) {
    if (peek().is_kw(k)) { next(); return true; }
    return false;
  }
  const Token& expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail("expected '" + std::string(p) + "'");
    return next();
  }
  const Token& expect_kw(std::string_view k) {
    if (!peek().is_kw(k)) fail("expected '" + std::string(k) + "'");
    return next();
  }
  std::string expect_ident(std::string_view what = "identifier") {
    if (peek().kind != TokenKind::Ident) fail("expected " + std::string(what));
    return next().text;
  }
  std::int64_t expect_int() {
    bool neg = accept_punct("-");
    if (peek().kind != TokenKind::Int) fail("expected integer literal");
    std::int64_t v = next().value;
    return neg ? -v : v;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(peek().span, msg + ", found " + describe(peek()));
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace ptyck
