#pragma once

/**
 * Sections of the formal Weyl algebra bundle over a polynomial chart.
 *
 * A section is a finite sum of terms  nu^k * c(x) * y^alpha * dx^J  where c is
 * a polynomial in the chart coordinates, alpha is a fiber multi-index, and J
 * is a strictly increasing set of one-form factors (a bitmask). The Weyl
 * degree of a term is 2k + |alpha|; dx factors do not count. All containers
 * are kept truncated to a fixed nu order and Weyl degree cap, which is sound
 * for every operator here because none of them raises a dropped term back
 * below the caps.
 */

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "fedosov/formal.hpp"
#include "fedosov/poly.hpp"

namespace fedosov {

/** Series order in nu and cap on the Weyl degree 2k + |alpha|. */
struct Truncation {
  int nu_order;
  int degree_cap;

  /** Default degree cap 2N + 2: tight enough for star products exact to nu^N. */
  explicit Truncation(int n) : Truncation(n, 2 * n + 2) {}
  Truncation(int n, int cap) : nu_order(n), degree_cap(cap) {
    if (n < 0 || cap < 0) throw std::invalid_argument("truncation bounds must be nonnegative");
  }

  bool operator==(const Truncation&) const = default;
};

/** Set of dx factors; bit v stands for dx^{v+1}. */
using FormMask = std::uint8_t;

inline int form_degree(FormMask j) { return std::popcount(static_cast<unsigned>(j)); }

/** Sign of wedging dx^{v+1} onto the left of dx^J (J must not contain v). */
inline int insert_sign(FormMask j, int v) {
  return std::popcount(static_cast<unsigned>(j & ((1u << v) - 1u))) % 2 == 0 ? 1 : -1;
}

/** Sign of dx^{J1} wedge dx^{J2} relative to the sorted union (disjoint masks). */
inline int wedge_sign(FormMask j1, FormMask j2) {
  int inversions = 0;
  for (int v = 0; v < 8; ++v)
    if (j2 & (1u << v)) inversions += std::popcount(static_cast<unsigned>(j1 >> (v + 1)));
  return inversions % 2 == 0 ? 1 : -1;
}

struct WeylKey {
  int k = 0;          // power of nu
  Monomial alpha;     // fiber monomial in y
  FormMask j = 0;     // dx factors

  int weyl_degree() const { return 2 * k + alpha.degree(); }
  int form_deg() const { return form_degree(j); }

  bool operator==(const WeylKey&) const = default;

  /** Canonical order: Weyl degree, nu power, y graded-lex, form degree, dx set. */
  std::strong_ordering operator<=>(const WeylKey& o) const {
    if (const auto c = weyl_degree() <=> o.weyl_degree(); c != 0) return c;
    if (const auto c = k <=> o.k; c != 0) return c;
    if (const auto c = alpha <=> o.alpha; c != 0) return c;
    if (const auto c = form_deg() <=> o.form_deg(); c != 0) return c;
    return j <=> o.j;
  }
};

class WeylSection {
 public:
  WeylSection(int dim, const Truncation& trunc) : dim_(dim), trunc_(trunc) {
    if (dim < 1 || dim > Monomial::kMaxVars)
      throw std::invalid_argument("chart dimension must be between 1 and 8");
  }

  int dim() const { return dim_; }
  const Truncation& truncation() const { return trunc_; }
  const std::map<WeylKey, Poly>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

  /** Lowest Weyl degree present; -1 for the zero section. */
  int lowest_weyl_degree() const {
    return terms_.empty() ? -1 : terms_.begin()->first.weyl_degree();
  }
  int highest_weyl_degree() const {
    return terms_.empty() ? -1 : terms_.rbegin()->first.weyl_degree();
  }

  /** Adds c * nu^k y^alpha dx^J, silently dropping anything past the truncation. */
  WeylSection& add_term(int k, const Monomial& alpha, FormMask j, const Poly& c) {
    if (k < 0) throw std::invalid_argument("negative nu power");
    if (c.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    if (static_cast<unsigned>(j) >> dim_)
      throw std::invalid_argument("dx factor beyond the chart dimension");
    for (int v = dim_; v < Monomial::kMaxVars; ++v)
      if (alpha.exponent(v) != 0)
        throw std::invalid_argument("fiber variable beyond the chart dimension");
    if (c.is_zero()) return *this;
    const WeylKey key{k, alpha, j};
    if (k > trunc_.nu_order || key.weyl_degree() > trunc_.degree_cap) return *this;
    const auto [it, fresh] = terms_.emplace(key, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
    return *this;
  }

  /** Coefficient polynomial of nu^k y^alpha dx^J (zero when absent). */
  Poly coeff(int k, const Monomial& alpha, FormMask j) const {
    const auto it = terms_.find(WeylKey{k, alpha, j});
    return it == terms_.end() ? Poly(dim_) : it->second;
  }

  WeylSection& operator+=(const WeylSection& o) {
    check_shape(o);
    for (const auto& [key, c] : o.terms_) add_term(key.k, key.alpha, key.j, c);
    return *this;
  }
  WeylSection& operator-=(const WeylSection& o) {
    check_shape(o);
    for (const auto& [key, c] : o.terms_) add_term(key.k, key.alpha, key.j, -c);
    return *this;
  }
  WeylSection operator+(const WeylSection& o) const { return WeylSection(*this) += o; }
  WeylSection operator-(const WeylSection& o) const { return WeylSection(*this) -= o; }
  WeylSection operator-() const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_) s.terms_.emplace(key, -c);
    return s;
  }

  WeylSection operator*(const Rational& scale) const {
    WeylSection s(dim_, trunc_);
    if (sgn(scale) == 0) return s;
    for (const auto& [key, c] : terms_) s.terms_.emplace(key, c * scale);
    return s;
  }
  friend WeylSection operator*(const Rational& scale, const WeylSection& s) { return s * scale; }

  /** Multiplies every coefficient by a polynomial in x. */
  WeylSection scaled_by(const Poly& p) const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_) {
      Poly q = c * p;
      if (!q.is_zero()) s.terms_.emplace(key, std::move(q));
    }
    return s;
  }

  /** Multiplies by nu^shift, dropping what the truncation no longer holds. */
  WeylSection shifted_nu(int shift) const {
    if (shift < 0) throw std::invalid_argument("nu shift must be nonnegative");
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_) s.add_term(key.k + shift, key.alpha, key.j, c);
    return s;
  }

  bool operator==(const WeylSection& o) const {
    return dim_ == o.dim_ && trunc_ == o.trunc_ && terms_ == o.terms_;
  }

  /** The terms of one fixed Weyl degree. */
  WeylSection slice(int weyl_degree) const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_)
      if (key.weyl_degree() == weyl_degree) s.terms_.emplace(key, c);
    return s;
  }

  /** The terms of one fixed form degree. */
  WeylSection form_slice(int q) const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_)
      if (key.form_deg() == q) s.terms_.emplace(key, c);
    return s;
  }

  /** Embeds a formal function as its fiberwise-constant section. */
  static WeylSection embed(const FormalFunction& f, const Truncation& trunc) {
    WeylSection s(f.dim(), trunc);
    for (int k = 0; k <= f.order(); ++k) s.add_term(k, Monomial(), 0, f.at(k));
    return s;
  }

  /** The (y = 0, zero-form) part as a formal function. */
  FormalFunction scalar_part() const {
    FormalFunction f(dim_, trunc_.nu_order);
    for (const auto& [key, c] : terms_)
      if (key.alpha.is_constant() && key.j == 0) f.at(key.k) = c;
    return f;
  }

  /** delta: dx^v wedge d/dy^v, the fiber Koszul differential. */
  WeylSection delta() const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_)
      for (int v = 0; v < dim_; ++v) {
        const unsigned e = key.alpha.exponent(v);
        if (e == 0 || (key.j & (1u << v))) continue;
        s.add_term(key.k, key.alpha / Monomial::variable(v),
                   static_cast<FormMask>(key.j | (1u << v)),
                   c * Rational(e) * insert_sign(key.j, v));
      }
    return s;
  }

  /**
   * delta^{-1}: (p + q)^{-1} y^v i(d/dx^v) on terms of y-degree p and form
   * degree q, zero on the p = q = 0 part.
   */
  WeylSection delta_inv() const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_) {
      const int p = key.alpha.degree(), q = key.form_deg();
      if (p + q == 0) continue;
      for (int v = 0; v < dim_; ++v) {
        if (!(key.j & (1u << v))) continue;
        s.add_term(key.k, key.alpha * Monomial::variable(v),
                   static_cast<FormMask>(key.j & ~(1u << v)),
                   c * frac(insert_sign(key.j, v), p + q));
      }
    }
    return s;
  }

  /** Interior product with a polynomial vector field (contracts dx slots). */
  WeylSection interior(const std::vector<Poly>& x_field) const {
    if (static_cast<int>(x_field.size()) != dim_)
      throw std::invalid_argument("vector field needs one component per coordinate");
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_)
      for (int v = 0; v < dim_; ++v) {
        if (!(key.j & (1u << v))) continue;
        s.add_term(key.k, key.alpha, static_cast<FormMask>(key.j & ~(1u << v)),
                   c * x_field[v] * Rational(insert_sign(key.j, v)));
      }
    return s;
  }

  /** Coordinate exterior derivative dx^v wedge d/dx^v on the coefficients. */
  WeylSection exterior_d() const {
    WeylSection s(dim_, trunc_);
    for (const auto& [key, c] : terms_)
      for (int v = 0; v < dim_; ++v) {
        if (key.j & (1u << v)) continue;
        Poly dc = c.partial(v);
        if (dc.is_zero()) continue;
        s.add_term(key.k, key.alpha, static_cast<FormMask>(key.j | (1u << v)),
                   dc * Rational(insert_sign(key.j, v)));
      }
    return s;
  }

  /** Canonical text, terms in key order: nu^k * (poly) * y1^2*y3 * dx1^dx3. */
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [key, c] : terms_) {
      if (!out.empty()) out += " + ";
      std::string factors;
      if (key.k > 0) factors += key.k == 1 ? "nu" : "nu^" + std::to_string(key.k);
      std::string body = "(" + c.to_string() + ")";
      if (!factors.empty()) factors += " * ";
      factors += body;
      if (!key.alpha.is_constant()) {
        std::string y;
        for (int v = 0; v < dim_; ++v) {
          const unsigned e = key.alpha.exponent(v);
          if (e == 0) continue;
          if (!y.empty()) y += '*';
          y += "y" + std::to_string(v + 1);
          if (e > 1) y += "^" + std::to_string(e);
        }
        factors += " * " + y;
      }
      if (key.j != 0) {
        std::string f;
        for (int v = 0; v < dim_; ++v) {
          if (!(key.j & (1u << v))) continue;
          if (!f.empty()) f += '^';
          f += "dx" + std::to_string(v + 1);
        }
        factors += " * " + f;
      }
      out += factors;
    }
    return out;
  }

 private:
  void check_shape(const WeylSection& o) const {
    if (dim_ != o.dim_ || !(trunc_ == o.trunc_))
      throw std::invalid_argument("section shape mismatch");
  }

  int dim_;
  Truncation trunc_;
  std::map<WeylKey, Poly> terms_;
};

}  // namespace fedosov
