#pragma once

/**
 * Sparse multivariate polynomials over exact rationals.
 *
 * Terms are kept in an ordered map keyed by graded-lex monomial order with no
 * zero coefficients stored, so structural equality is semantic equality and
 * iteration order (hence printing) is canonical. Every binary operation
 * checks that both operands live on the same chart dimension.
 */

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedosov/monomial.hpp"
#include "fedosov/rational.hpp"

namespace fedosov {

class Poly {
 public:
  /** The zero polynomial on a chart with `dim` variables. */
  explicit Poly(int dim) : dim_(checked_dim(dim)) {}

  Poly(int dim, const Rational& constant) : dim_(checked_dim(dim)) {
    add_term(Monomial(), constant);
  }

  static Poly variable(int dim, int v) {
    Poly p(dim);
    if (v < 0 || v >= dim) throw std::invalid_argument("variable index out of range");
    p.add_term(Monomial::variable(v), 1);
    return p;
  }

  static Poly monomial(int dim, const Monomial& m, const Rational& c) {
    Poly p(dim);
    p.check_monomial(m);
    p.add_term(m, c);
    return p;
  }

  int dim() const { return dim_; }
  bool is_zero() const { return terms_.empty(); }
  /** Total degree; -1 for the zero polynomial. */
  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }
  const std::map<Monomial, Rational>& terms() const { return terms_; }

  /** Coefficient of m (zero when absent). */
  Rational coeff(const Monomial& m) const {
    const auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /** Adds c * m in place, dropping the term if it cancels. */
  Poly& add_term(const Monomial& m, const Rational& c) {
    if (sgn(c) == 0) return *this;
    check_monomial(m);
    const auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
    return *this;
  }

  Poly& operator+=(const Poly& o) {
    check_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Poly operator+(const Poly& o) const { return Poly(*this) += o; }
  Poly operator-(const Poly& o) const { return Poly(*this) -= o; }
  Poly operator-() const {
    Poly p(dim_);
    for (const auto& [m, c] : terms_) p.terms_.emplace(m, -c);
    return p;
  }

  Poly operator*(const Poly& o) const {
    check_dim(o);
    Poly p(dim_);
    for (const auto& [ma, ca] : terms_)
      for (const auto& [mb, cb] : o.terms_) p.add_term(ma * mb, ca * cb);
    return p;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  Poly operator*(const Rational& s) const {
    Poly p(dim_);
    if (sgn(s) == 0) return p;
    for (const auto& [m, c] : terms_) p.terms_.emplace(m, c * s);
    return p;
  }
  Poly& operator*=(const Rational& s) { return *this = *this * s; }
  friend Poly operator*(const Rational& s, const Poly& p) { return p * s; }

  Poly pow(unsigned e) const {
    Poly r(dim_, 1);
    for (unsigned i = 0; i < e; ++i) r *= *this;
    return r;
  }

  bool operator==(const Poly& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

  /** Partial derivative with respect to x_{v+1}. */
  Poly partial(int v) const {
    if (v < 0 || v >= dim_) throw std::invalid_argument("derivative index out of range");
    Poly p(dim_);
    for (const auto& [m, c] : terms_) {
      const unsigned e = m.exponent(v);
      if (e == 0) continue;
      p.terms_.emplace(m / Monomial::variable(v), c * e);
    }
    return p;
  }

  /** Iterated partial derivative, one per exponent of `alpha`. */
  Poly partial(const Monomial& alpha) const {
    Poly p = *this;
    for (int v = 0; v < dim_; ++v)
      for (unsigned i = 0; i < alpha.exponent(v); ++i) p = p.partial(v);
    return p;
  }

  /** Substitutes subs[v] for x_{v+1}; all subs must share one dimension. */
  Poly compose(const std::vector<Poly>& subs) const {
    if (static_cast<int>(subs.size()) != dim_)
      throw std::invalid_argument("compose needs one substitution per variable");
    const int target = subs.empty() ? dim_ : subs.front().dim();
    std::vector<std::vector<Poly>> powers(dim_);
    for (int v = 0; v < dim_; ++v) {
      if (subs[v].dim() != target) throw std::invalid_argument("dimension mismatch");
      powers[v].push_back(Poly(target, 1));
    }
    Poly r(target);
    for (const auto& [m, c] : terms_) {
      Poly t(target, c);
      for (int v = 0; v < dim_; ++v) {
        auto& pw = powers[v];
        while (pw.size() <= m.exponent(v)) pw.push_back(pw.back() * subs[v]);
        t *= pw[m.exponent(v)];
      }
      r += t;
    }
    return r;
  }

  /**
   * The integral over t in [0,1] of p(t x) t^weight, i.e. each term c x^g
   * becomes c x^g / (|g| + weight + 1). Inverts the exterior derivative on
   * closed one-forms via the radial homotopy. Negative weights are allowed
   * as long as every term keeps |g| + weight + 1 > 0 (weight -1 on a
   * polynomial with no constant term divides by the homogeneity degree).
   */
  Poly radial_homotopy_integral(int weight) const {
    Poly p(dim_);
    for (const auto& [m, c] : terms_) {
      const int divisor = m.degree() + weight + 1;
      if (divisor <= 0)
        throw std::invalid_argument("radial weight makes a term non-integrable");
      p.terms_.emplace(m, c / Rational(divisor));
    }
    return p;
  }

  /** Canonical text: terms in descending graded-lex order, explicit * and ^. */
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      const bool negative = sgn(c) < 0;
      const Rational mag = negative ? Rational(-c) : c;
      if (s.empty()) {
        if (negative) s += '-';
      } else {
        s += negative ? " - " : " + ";
      }
      if (m.is_constant()) {
        s += fedosov::to_string(mag);
      } else {
        if (mag != 1) {
          s += fedosov::to_string(mag);
          s += '*';
        }
        s += m.to_string();
      }
    }
    return s;
  }

 private:
  static int checked_dim(int dim) {
    if (dim < 1 || dim > Monomial::kMaxVars)
      throw std::invalid_argument("chart dimension must be between 1 and 8");
    return dim;
  }
  void check_dim(const Poly& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("dimension mismatch");
  }
  void check_monomial(const Monomial& m) const {
    for (int v = dim_; v < Monomial::kMaxVars; ++v)
      if (m.exponent(v) != 0)
        throw std::invalid_argument("monomial uses a variable beyond the chart dimension");
  }

  int dim_;
  std::map<Monomial, Rational> terms_;
};

}  // namespace fedosov
