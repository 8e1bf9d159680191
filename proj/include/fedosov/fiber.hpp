#pragma once

/**
 * The fiberwise Weyl product and its graded brackets.
 *
 * The product pairs sections through the exponential bidifferential
 *
 *   a o b = exp( (nu/2) Lambda^{ij} d/dy^i d/dz^j ) a(x, y) b(x, z) |_{z=y},
 *
 * wedging the dx parts; Lambda may have polynomial entries. The m-fold
 * contraction tensors W_m(gamma, delta) — sums over index sequences of
 * products of Lambda entries, grouped by the derivative multi-indices they
 * apply — are cached on the algebra instance (lazy, not thread-safe).
 *
 * The graded bracket divided by nu is computed natively from the m >= 1
 * contraction orders: the m = 0 layers of the two orientations always cancel
 * (the wedge signs match the bracket's Koszul sign), so dividing by nu just
 * shifts each surviving term's nu power down by one. Doing this inside the
 * product, instead of dividing a truncated bracket, keeps the top nu order.
 */

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedosov/weyl.hpp"

namespace fedosov {

class FiberAlgebra {
 public:
  FiberAlgebra(std::vector<std::vector<Poly>> lambda, const Truncation& trunc)
      : dim_(static_cast<int>(lambda.size())), trunc_(trunc), lambda_(std::move(lambda)) {
    if (dim_ < 1 || dim_ > Monomial::kMaxVars)
      throw std::invalid_argument("chart dimension must be between 1 and 8");
    for (const auto& row : lambda_)
      if (static_cast<int>(row.size()) != dim_)
        throw std::invalid_argument("bivector matrix must be square");
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        if (lambda_[i][j].dim() != dim_) throw std::invalid_argument("dimension mismatch");
        if (!(lambda_[i][j] == -lambda_[j][i]))
          throw std::invalid_argument("bivector matrix must be antisymmetric");
      }
    tables_.push_back(Table{{{Monomial(), Monomial()}, Poly(dim_, 1)}});
  }

  int dim() const { return dim_; }
  const Truncation& truncation() const { return trunc_; }
  const std::vector<std::vector<Poly>>& lambda() const { return lambda_; }

  /** The truncated fiber product a o b. */
  WeylSection mul(const WeylSection& a, const WeylSection& b) const {
    check(a, b);
    WeylSection out(dim_, trunc_);
    for (const auto& ta : a.terms())
      for (const auto& tb : b.terms()) accumulate(ta, tb, 0, 0, 1, out);
    return out;
  }

  /** Graded commutator [a, b] = a o b - (-1)^{q_a q_b} b o a, termwise. */
  WeylSection bracket(const WeylSection& a, const WeylSection& b) const {
    return bracket_impl(a, b, 0, 0);
  }

  /** [a, b] / nu, computed from the m >= 1 contraction orders only. */
  WeylSection bracket_div_nu(const WeylSection& a, const WeylSection& b) const {
    return bracket_impl(a, b, 1, -1);
  }

  /**
   * The y-free, form-free layer of mul(a, b) as a truncated nu-series of
   * polynomials. Only full contractions m = |alpha| = |beta| of 0-form term
   * pairs reach that layer, so this is much cheaper than mul followed by a
   * restriction — it is the hot path of the star product.
   */
  FormalFunction scalar_product(const WeylSection& a, const WeylSection& b) const {
    check(a, b);
    FormalFunction out(dim_, trunc_.nu_order);
    for (const auto& [ka, f] : a.terms()) {
      if (ka.j != 0) continue;
      for (const auto& [kb, g] : b.terms()) {
        if (kb.j != 0) continue;
        const int m = ka.alpha.degree();
        if (kb.alpha.degree() != m) continue;
        const int k = ka.k + kb.k + m;
        if (k > trunc_.nu_order) continue;
        if (m == 0) {
          out.at(k) += f * g;
          continue;
        }
        const Table& tab = table(m);
        const auto it = tab.find({ka.alpha, kb.alpha});
        if (it == tab.end()) continue;
        Rational scale(1);
        for (int i = 0; i < m; ++i) scale /= 2 * (i + 1);
        const Integer ff = monomial_factorial(ka.alpha) * monomial_factorial(kb.alpha);
        out.at(k) += f * g * it->second * (scale * Rational(ff));
      }
    }
    return out;
  }

 private:
  using TermPair = std::pair<Monomial, Monomial>;
  using Table = std::map<TermPair, Poly>;
  using Term = std::pair<const WeylKey, Poly>;

  WeylSection bracket_impl(const WeylSection& a, const WeylSection& b, int min_m,
                           int nu_off) const {
    check(a, b);
    WeylSection out(dim_, trunc_);
    for (const auto& ta : a.terms())
      for (const auto& tb : b.terms()) {
        const int koszul = (ta.first.form_deg() * tb.first.form_deg()) % 2 == 0 ? 1 : -1;
        accumulate(ta, tb, min_m, nu_off, 1, out);
        accumulate(tb, ta, min_m, nu_off, -koszul, out);
      }
    return out;
  }

  /** Adds `outer` times the contraction orders m >= min_m of ta o tb, at nu offset nu_off. */
  void accumulate(const Term& ta, const Term& tb, int min_m, int nu_off, int outer,
                  WeylSection& out) const {
    const auto& [ka, f] = ta;
    const auto& [kb, g] = tb;
    if (ka.j & kb.j) return;  // repeated dx factor kills the wedge
    if (2 * (ka.k + kb.k + nu_off) + ka.alpha.degree() + kb.alpha.degree() > trunc_.degree_cap)
      return;  // every contraction order lands at this same Weyl degree
    const int m_max = std::min({ka.alpha.degree(), kb.alpha.degree(),
                                trunc_.nu_order - ka.k - kb.k - nu_off});
    if (m_max < min_m) return;
    const int sign = outer * wedge_sign(ka.j, kb.j);
    const FormMask j = ka.j | kb.j;
    const Poly fg = f * g;
    Rational scale(sign);  // sign / (2^m m!) for the current m
    for (int m = min_m; m <= m_max; ++m) {
      for (int i = 0; i < m; ++i) scale /= 2 * (i + 1);
      if (m == 0) {
        out.add_term(ka.k + kb.k + nu_off, ka.alpha * kb.alpha, j, fg * scale);
        continue;
      }
      for (const auto& [pair, w] : table(m)) {
        const auto& [gamma, delta] = pair;
        if (!gamma.divides(ka.alpha) || !delta.divides(kb.alpha)) continue;
        const Integer ff =
            partial_coefficient(ka.alpha, gamma) * partial_coefficient(kb.alpha, delta);
        out.add_term(ka.k + kb.k + m + nu_off, (ka.alpha / gamma) * (kb.alpha / delta), j,
                     fg * w * (scale * Rational(ff)));
      }
      scale = Rational(sign);  // reset; the loop above re-applies 1/(2^m m!)
    }
  }

  const Table& table(int m) const {
    while (static_cast<int>(tables_.size()) <= m) {
      const Table& prev = tables_.back();
      Table next;
      for (const auto& [pair, w] : prev)
        for (int i = 0; i < dim_; ++i)
          for (int j = 0; j < dim_; ++j) {
            if (lambda_[i][j].is_zero()) continue;
            const TermPair key{pair.first * Monomial::variable(i),
                               pair.second * Monomial::variable(j)};
            const auto [it, fresh] = next.emplace(key, w * lambda_[i][j]);
            if (!fresh) it->second += w * lambda_[i][j];
          }
      for (auto it = next.begin(); it != next.end();)
        it = it->second.is_zero() ? next.erase(it) : std::next(it);
      tables_.push_back(std::move(next));
    }
    return tables_[static_cast<std::size_t>(m)];
  }

  void check(const WeylSection& a, const WeylSection& b) const {
    if (a.dim() != dim_ || b.dim() != dim_ || !(a.truncation() == trunc_) ||
        !(b.truncation() == trunc_))
      throw std::invalid_argument("section does not belong to this algebra");
  }

  int dim_;
  Truncation trunc_;
  std::vector<std::vector<Poly>> lambda_;
  mutable std::vector<Table> tables_;
};

}  // namespace fedosov
