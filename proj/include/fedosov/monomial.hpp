#pragma once

/**
 * Packed exponent vectors for up to eight chart variables.
 *
 * Variable x1 occupies the most significant byte of a 64-bit word, so the raw
 * words compare lexicographically exactly as the exponent vectors do; paired
 * with the total degree this yields the graded-lex order used for every
 * canonical term listing. Exponents are capped at 255 per variable; both
 * limits are enforced with explicit errors.
 */

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedosov/rational.hpp"

namespace fedosov {

class Monomial {
 public:
  static constexpr int kMaxVars = 8;
  static constexpr unsigned kMaxExponent = 255;

  /** The constant monomial 1. */
  Monomial() = default;

  /** x_v (variables are indexed from 0 in code, printed as x<v+1>). */
  static Monomial variable(int v) { return Monomial().times_var(v, 1); }

  static Monomial from_exponents(const std::vector<unsigned>& exps) {
    if (exps.size() > kMaxVars)
      throw std::invalid_argument("monomial supports at most 8 variables");
    Monomial m;
    for (std::size_t v = 0; v < exps.size(); ++v) m = m.times_var(static_cast<int>(v), exps[v]);
    return m;
  }

  unsigned exponent(int v) const { return (bits_ >> shift(v)) & 0xffu; }

  int degree() const {
    int d = 0;
    for (int v = 0; v < kMaxVars; ++v) d += static_cast<int>(exponent(v));
    return d;
  }

  bool is_constant() const { return bits_ == 0; }

  /** This monomial with the exponent of x_v raised by `by`. */
  Monomial times_var(int v, unsigned by) const {
    check_var(v);
    const unsigned e = exponent(v) + by;
    if (e > kMaxExponent) throw std::overflow_error("monomial exponent exceeds 255");
    Monomial m = *this;
    m.bits_ = (bits_ & ~(0xffull << shift(v))) | (static_cast<std::uint64_t>(e) << shift(v));
    return m;
  }

  Monomial operator*(const Monomial& o) const {
    Monomial m;
    for (int v = 0; v < kMaxVars; ++v) {
      const unsigned e = exponent(v) + o.exponent(v);
      if (e > kMaxExponent) throw std::overflow_error("monomial exponent exceeds 255");
      m.bits_ |= static_cast<std::uint64_t>(e) << shift(v);
    }
    return m;
  }

  bool divides(const Monomial& o) const {
    for (int v = 0; v < kMaxVars; ++v)
      if (exponent(v) > o.exponent(v)) return false;
    return true;
  }

  /** Exponent-wise difference; requires divides(o) the other way around. */
  Monomial operator/(const Monomial& o) const {
    Monomial m;
    for (int v = 0; v < kMaxVars; ++v) {
      if (o.exponent(v) > exponent(v))
        throw std::invalid_argument("monomial division with negative exponent");
      m.bits_ |= static_cast<std::uint64_t>(exponent(v) - o.exponent(v)) << shift(v);
    }
    return m;
  }

  bool operator==(const Monomial& o) const { return bits_ == o.bits_; }

  /** Graded-lex, ascending: first by total degree, then lex with x1 dominant. */
  std::strong_ordering operator<=>(const Monomial& o) const {
    if (const auto c = degree() <=> o.degree(); c != 0) return c;
    return bits_ <=> o.bits_;
  }

  /** Canonical text "x1^2*x3"; the constant monomial renders as "1". */
  std::string to_string() const {
    std::string s;
    for (int v = 0; v < kMaxVars; ++v) {
      const unsigned e = exponent(v);
      if (e == 0) continue;
      if (!s.empty()) s += '*';
      s += 'x';
      s += std::to_string(v + 1);
      if (e > 1) {
        s += '^';
        s += std::to_string(e);
      }
    }
    return s.empty() ? "1" : s;
  }

 private:
  static int shift(int v) { return 8 * (kMaxVars - 1 - v); }
  static void check_var(int v) {
    if (v < 0 || v >= kMaxVars)
      throw std::invalid_argument("variable index out of range (at most 8 variables)");
  }

  std::uint64_t bits_ = 0;
};

/** n! as an exact integer. */
inline Integer factorial(unsigned n) {
  Integer r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

/** Binomial coefficient C(n, k). */
inline Integer binomial(unsigned n, unsigned k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

/** Multi-index factorial: the product of the exponent factorials. */
inline Integer monomial_factorial(const Monomial& m) {
  Integer r = 1;
  for (int v = 0; v < Monomial::kMaxVars; ++v) r *= factorial(m.exponent(v));
  return r;
}

/** Multi-index binomial: the product of per-variable binomials (0 unless b <= a). */
inline Integer monomial_binomial(const Monomial& a, const Monomial& b) {
  Integer r = 1;
  for (int v = 0; v < Monomial::kMaxVars; ++v) r *= binomial(a.exponent(v), b.exponent(v));
  return r;
}

/** Coefficient in d^gamma y^alpha = c * y^{alpha - gamma}; 0 unless gamma divides alpha. */
inline Integer partial_coefficient(const Monomial& alpha, const Monomial& gamma);

/** Falling factorial n (n-1) ... (n-k+1); equals 0 when k > n. */
inline Integer falling_factorial(unsigned n, unsigned k) {
  if (k > n) return 0;
  Integer r = 1;
  for (unsigned i = 0; i < k; ++i) r *= n - i;
  return r;
}

inline Integer partial_coefficient(const Monomial& alpha, const Monomial& gamma) {
  Integer r = 1;
  for (int v = 0; v < Monomial::kMaxVars && r != 0; ++v)
    r *= falling_factorial(alpha.exponent(v), gamma.exponent(v));
  return r;
}

}  // namespace fedosov
