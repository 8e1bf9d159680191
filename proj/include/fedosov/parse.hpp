#pragma once

/**
 * Recursive-descent parser for the polynomial input grammar:
 *
 *   expr   := ['-'] term ( ('+' | '-') term )*
 *   term   := factor ( '*' factor )*
 *   factor := base ( '^' natural )?
 *   base   := rational | variable | '(' expr ')'
 *
 * Variables are x1 .. x<dim>; coefficients are "a" or "a/b". Whitespace may
 * separate tokens. Errors carry the 1-based character position at which the
 * input stopped making sense.
 */

#include <cctype>
#include <stdexcept>
#include <string>

#include "fedosov/poly.hpp"
#include "fedosov/rational.hpp"

namespace fedosov {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;  // 1-based character column
};

namespace detail {

class PolyParser {
 public:
  PolyParser(const std::string& text, int dim) : text_(text), dim_(dim) {}

  Poly parse() {
    Poly p = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return p;
  }

 private:
  Poly expr() {
    skip_space();
    bool negate = accept('-');
    Poly p = term();
    if (negate) p = -p;
    while (true) {
      skip_space();
      if (accept('+'))
        p += term();
      else if (accept('-'))
        p -= term();
      else
        return p;
    }
  }

  Poly term() {
    Poly p = factor();
    while (true) {
      skip_space();
      if (!accept('*')) return p;
      p *= factor();
    }
  }

  Poly factor() {
    Poly base = this->base();
    skip_space();
    if (!accept('^')) return base;
    skip_space();
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
      fail("exponent must be a nonnegative integer");
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected exponent");
    unsigned e = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      e = e * 10 + static_cast<unsigned>(text_[pos_] - '0');
      if (e > Monomial::kMaxExponent) fail("exponent exceeds 255");
      ++pos_;
    }
    return base.pow(e);
  }

  Poly base() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Poly p = expr();
      skip_space();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (c == 'x') return variable();
    if (std::isdigit(static_cast<unsigned char>(c))) return rational();
    fail("expected a coefficient, variable, or '('");
  }

  Poly variable() {
    const std::size_t start = pos_;
    ++pos_;  // consume 'x'
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected a variable index after 'x'");
    unsigned long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      if (v <= 1000) v = v * 10 + static_cast<unsigned long>(text_[pos_] - '0');
      ++pos_;
    }
    if (v < 1 || v > static_cast<unsigned long>(dim_))
      throw ParseError("variable x" + std::to_string(v) + " outside chart of dimension " +
                           std::to_string(dim_),
                       start + 1);
    return Poly::variable(dim_, static_cast<int>(v) - 1);
  }

  Poly rational() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '/') {
      ++pos_;
      const std::size_t den = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == den) fail("expected digits after '/'");
      if (Integer(text_.substr(den, pos_ - den)) == 0)
        throw ParseError("zero denominator", den + 1);
    }
    return Poly(dim_, parse_rational(text_.substr(start, pos_ - start)));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_ + 1); }

  const std::string& text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/** Parses the grammar above on a chart with `dim` variables. */
inline Poly parse_poly(const std::string& text, int dim) {
  return detail::PolyParser(text, dim).parse();
}

}  // namespace fedosov
