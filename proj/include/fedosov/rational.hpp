#pragma once

/**
 * Exact rational scalars.
 *
 * GMP's mpq_class supplies the arithmetic; the helpers here pin the textual
 * format used throughout the project: an optional minus sign, a decimal
 * numerator, and an optional "/denominator". No other notation (whitespace,
 * exponents, decimals) is accepted, and a zero denominator is an input error.
 */

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace fedosov {

using Rational = mpq_class;
using Integer = mpz_class;

/** True when q reduces to an integer. */
inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/**
 * n/d in lowest terms. GMP's two-argument constructor stores the pair
 * verbatim, and its comparisons assume canonical form, so this helper is the
 * only sanctioned way to build a rational from numerator and denominator.
 */
inline Rational frac(long n, long d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

/** Canonical text: "p" for integers, otherwise "p/q" with q > 0 and gcd(p,q)=1. */
inline std::string to_string(const Rational& q) { return q.get_str(); }

/** Parses "a" or "a/b" (optional leading '-'); throws std::invalid_argument otherwise. */
inline Rational parse_rational(const std::string& text) {
  const auto fail = [&](const char* why) {
    throw std::invalid_argument("bad rational literal \"" + text + "\": " + why);
  };
  std::size_t i = 0;
  if (i < text.size() && text[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i, ++digits;
  if (digits == 0) fail("expected digits");
  if (i < text.size()) {
    if (text[i] != '/') fail("unexpected character");
    ++i;
    const std::size_t den_begin = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
    if (i == den_begin || i != text.size()) fail("malformed denominator");
    if (Integer(text.substr(den_begin)) == 0) fail("zero denominator");
  }
  Rational q(text);
  q.canonicalize();
  return q;
}

}  // namespace fedosov
