#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "contractc/error.hpp"

namespace contractc::lex {

enum class Tok {
  Ident,
  Integer,  // digits only
  Real,     // digits with fraction or exponent
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

/// Tokenizer shared by the contract and payoff-text parsers. Punctuation is
/// longest-match over a fixed set; `//` and `#` start line comments.
inline std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::string_view kPuncts[] = {"<=", ">=", "==", "&&", "||", "->", "(",
                                                 ")",  "[",  "]",  ",",  ";",  ":",  "=",
                                                 "+",  "-",  "*",  "/",  "<",  ">",  "!"};
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      // Fractions; repeated `.ddd` groups are accepted as digit grouping
      // ("1.000.000").
      while (j + 1 < src.size() && src[j] == '.' &&
             std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        real = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          real = true;
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.kind = real ? Tok::Real : Tok::Integer;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (src.substr(i, p.size()) == p) {
        t.kind = Tok::Punct;
        t.text = std::string(p);
        advance(p.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ParseError(ErrorCode::Parse, std::string("unexpected character '") + c + "'", line,
                       col);
    }
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

/// Numeric value of a Real/Integer token. Multiple dots mean digit grouping.
inline double number_value(const Token& t) {
  std::string s = t.text;
  if (std::count(s.begin(), s.end(), '.') > 1) {
    std::string digits;
    for (char c : s)
      if (c != '.') digits += c;
    s = digits;
  }
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(ErrorCode::Parse, "malformed number '" + t.text + "'", t.line, t.column);
  }
  return v;
}

/// Cursor over a token vector with the usual expect/accept helpers.
class Cursor {
 public:
  explicit Cursor(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const {
    std::size_t idx = pos_ + k;
    return idx < toks_.size() ? toks_[idx] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  bool accept(std::string_view p) {
    if (is_punct(p)) {
      next();
      return true;
    }
    return false;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "'");
  }
  std::string expect_ident(std::string_view what = "identifier") {
    if (peek().kind != Tok::Ident) fail("expected " + std::string(what));
    return next().text;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(ErrorCode::Parse, msg + ", found " + found, t.line, t.column);
  }
  [[noreturn]] void fail_at(const Token& t, ErrorCode code, const std::string& msg) const {
    throw ParseError(code, msg, t.line, t.column);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

/// Shortest round-trip decimal form that always reads back as a real literal.
inline std::string format_real(double v) {
  char buf[64];
  double a = std::fabs(v);
  bool fixed = a == 0.0 || (a >= 1e-4 && a < 1e16);
  auto [p, ec] = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                       : std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace contractc::lex
