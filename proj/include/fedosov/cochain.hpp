#pragma once

/**
 * Differential operators and bidifferential cochains with polynomial
 * coefficients, and the calculus built on them: the Hochschild coboundary,
 * the Gerstenhaber ad-action, equivalence transforms Exp(ad E) of star-product
 * tables, cobounding of symmetric 2-cocycles, naturality audits, and recovery
 * of the symplectic connection encoded in the nu^2 cochain of a natural star
 * product.
 *
 * Conventions, fixed once and used everywhere:
 *   - tables act by raw partials: E(u) = sum_alpha e_alpha * d^alpha u;
 *   - the coboundary is dE(u,v) = E(u)v - E(uv) + uE(v), which is symmetric
 *     because the underlying multiplication is commutative;
 *   - cobound_symmetric_cocycle(B) returns E with dE = -B.
 */

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedosov/formal.hpp"
#include "fedosov/geometry.hpp"
#include "fedosov/report.hpp"

namespace fedosov {

/** Runs fn on every monomial dividing gamma (gamma itself and 1 included). */
template <typename Fn>
inline void for_each_divisor(int dim, const Monomial& gamma, Fn&& fn) {
  std::vector<unsigned> e(static_cast<std::size_t>(dim), 0);
  for (;;) {
    fn(Monomial::from_exponents(e));
    int v = 0;
    while (v < dim && e[static_cast<std::size_t>(v)] == gamma.exponent(v)) {
      e[static_cast<std::size_t>(v)] = 0;
      ++v;
    }
    if (v == dim) return;
    ++e[static_cast<std::size_t>(v)];
  }
}

/** All monomials of total degree <= max_degree, ascending graded-lex. */
inline std::vector<Monomial> monomials_up_to(int dim, int max_degree) {
  if (dim < 1 || dim > Monomial::kMaxVars)
    throw std::invalid_argument("chart dimension must be between 1 and 8");
  if (max_degree < 0) throw std::invalid_argument("degree bound must be nonnegative");
  std::vector<Monomial> out;
  std::vector<unsigned> e(static_cast<std::size_t>(dim), 0);
  for (;;) {
    int total = 0;
    for (unsigned x : e) total += static_cast<int>(x);
    if (total <= max_degree) out.push_back(Monomial::from_exponents(e));
    int v = 0;
    while (v < dim && e[static_cast<std::size_t>(v)] == static_cast<unsigned>(max_degree)) {
      e[static_cast<std::size_t>(v)] = 0;
      ++v;
    }
    if (v == dim) break;
    ++e[static_cast<std::size_t>(v)];
  }
  std::sort(out.begin(), out.end());
  return out;
}

/** A differential operator sum_alpha e_alpha(x) d^alpha with Poly coefficients. */
class DiffOperator {
 public:
  explicit DiffOperator(int dim) : dim_(checked_dim(dim)) {}

  int dim() const { return dim_; }
  const std::map<Monomial, Poly>& table() const { return table_; }
  bool is_zero() const { return table_.empty(); }

  /** Highest |alpha| in the table; -1 for the zero operator. */
  int order() const {
    int o = -1;
    for (const auto& [alpha, c] : table_) o = std::max(o, alpha.degree());
    return o;
  }

  /** True when there is no order-zero entry, i.e. E(1) = 0. */
  bool annihilates_constants() const { return table_.find(Monomial()) == table_.end(); }

  Poly coeff(const Monomial& alpha) const {
    const auto it = table_.find(alpha);
    return it == table_.end() ? Poly(dim_) : it->second;
  }

  DiffOperator& add(const Monomial& alpha, const Poly& c) {
    if (c.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    for (int v = dim_; v < Monomial::kMaxVars; ++v)
      if (alpha.exponent(v) != 0)
        throw std::invalid_argument("derivative index beyond the chart dimension");
    if (c.is_zero()) return *this;
    const auto [it, fresh] = table_.emplace(alpha, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) table_.erase(it);
    }
    return *this;
  }

  Poly apply(const Poly& u) const {
    if (u.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    Poly out(dim_);
    for (const auto& [alpha, c] : table_) out += c * u.partial(alpha);
    return out;
  }

  /** Acts on each nu-coefficient separately (the operator is nu-independent). */
  FormalFunction apply(const FormalFunction& u) const {
    FormalFunction out(dim_, u.order());
    for (int k = 0; k <= u.order(); ++k) out.at(k) = apply(u.at(k));
    return out;
  }

  DiffOperator& operator+=(const DiffOperator& o) {
    check_shape(o);
    for (const auto& [alpha, c] : o.table_) add(alpha, c);
    return *this;
  }
  DiffOperator& operator-=(const DiffOperator& o) {
    check_shape(o);
    for (const auto& [alpha, c] : o.table_) add(alpha, -c);
    return *this;
  }
  DiffOperator operator+(const DiffOperator& o) const { return DiffOperator(*this) += o; }
  DiffOperator operator-(const DiffOperator& o) const { return DiffOperator(*this) -= o; }
  DiffOperator operator-() const { return *this * Rational(-1); }
  DiffOperator operator*(const Rational& s) const {
    DiffOperator e(dim_);
    if (sgn(s) == 0) return e;
    for (const auto& [alpha, c] : table_) e.table_.emplace(alpha, c * s);
    return e;
  }
  friend DiffOperator operator*(const Rational& s, const DiffOperator& e) { return e * s; }

  bool operator==(const DiffOperator& o) const { return dim_ == o.dim_ && table_ == o.table_; }

  std::string to_string() const {
    std::string s;
    for (const auto& [alpha, c] : table_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.to_string() + ")*d[" + alpha.to_string() + "]";
    }
    return s.empty() ? "0" : s;
  }

 private:
  static int checked_dim(int dim) {
    if (dim < 1 || dim > Monomial::kMaxVars)
      throw std::invalid_argument("chart dimension must be between 1 and 8");
    return dim;
  }
  void check_shape(const DiffOperator& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("dimension mismatch");
  }

  int dim_;
  std::map<Monomial, Poly> table_;
};

/** Composition (E o F)(u) = E(F(u)), expanded symbolically via Leibniz. */
inline DiffOperator compose(const DiffOperator& e, const DiffOperator& f) {
  if (e.dim() != f.dim()) throw std::invalid_argument("dimension mismatch");
  DiffOperator out(e.dim());
  for (const auto& [alpha, a] : e.table())
    for (const auto& [beta, b] : f.table())
      for_each_divisor(e.dim(), alpha, [&](const Monomial& gamma) {
        const Poly db = b.partial(gamma);
        if (db.is_zero()) return;
        out.add((alpha / gamma) * beta, a * db * Rational(monomial_binomial(alpha, gamma)));
      });
  return out;
}

inline DiffOperator commutator(const DiffOperator& e, const DiffOperator& f) {
  return compose(e, f) - compose(f, e);
}

/** A bidifferential operator sum b_{alpha,beta}(x) d^alpha (x) d^beta. */
class BidiffOperator {
 public:
  using Key = std::pair<Monomial, Monomial>;

  explicit BidiffOperator(int dim) : dim_(checked_dim(dim)) {}

  int dim() const { return dim_; }
  const std::map<Key, Poly>& table() const { return table_; }
  bool is_zero() const { return table_.empty(); }

  /** Highest |alpha| and |beta| per argument; (-1, -1) for the zero operator. */
  std::pair<int, int> orders() const {
    std::pair<int, int> o{-1, -1};
    for (const auto& [key, c] : table_) {
      o.first = std::max(o.first, key.first.degree());
      o.second = std::max(o.second, key.second.degree());
    }
    return o;
  }

  Poly coeff(const Monomial& alpha, const Monomial& beta) const {
    const auto it = table_.find({alpha, beta});
    return it == table_.end() ? Poly(dim_) : it->second;
  }

  BidiffOperator& add(const Monomial& alpha, const Monomial& beta, const Poly& c) {
    if (c.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    for (int v = dim_; v < Monomial::kMaxVars; ++v)
      if (alpha.exponent(v) != 0 || beta.exponent(v) != 0)
        throw std::invalid_argument("derivative index beyond the chart dimension");
    if (c.is_zero()) return *this;
    const auto [it, fresh] = table_.emplace(Key{alpha, beta}, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) table_.erase(it);
    }
    return *this;
  }

  Poly apply(const Poly& u, const Poly& v) const {
    if (u.dim() != dim_ || v.dim() != dim_) throw std::invalid_argument("dimension mismatch");
    Poly out(dim_);
    for (const auto& [key, c] : table_) out += c * u.partial(key.first) * v.partial(key.second);
    return out;
  }

  /** nu-bilinear action on series; the result keeps the arguments' order. */
  FormalFunction apply(const FormalFunction& u, const FormalFunction& v) const {
    if (u.order() != v.order()) throw std::invalid_argument("series order mismatch");
    FormalFunction out(dim_, u.order());
    for (int a = 0; a <= u.order(); ++a)
      for (int b = 0; a + b <= u.order(); ++b) out.at(a + b) += apply(u.at(a), v.at(b));
    return out;
  }

  BidiffOperator& operator+=(const BidiffOperator& o) {
    check_shape(o);
    for (const auto& [key, c] : o.table_) add(key.first, key.second, c);
    return *this;
  }
  BidiffOperator& operator-=(const BidiffOperator& o) {
    check_shape(o);
    for (const auto& [key, c] : o.table_) add(key.first, key.second, -c);
    return *this;
  }
  BidiffOperator operator+(const BidiffOperator& o) const { return BidiffOperator(*this) += o; }
  BidiffOperator operator-(const BidiffOperator& o) const { return BidiffOperator(*this) -= o; }
  BidiffOperator operator-() const { return *this * Rational(-1); }
  BidiffOperator operator*(const Rational& s) const {
    BidiffOperator b(dim_);
    if (sgn(s) == 0) return b;
    for (const auto& [key, c] : table_) b.table_.emplace(key, c * s);
    return b;
  }
  friend BidiffOperator operator*(const Rational& s, const BidiffOperator& b) { return b * s; }

  /** The transposed table, (alpha, beta) -> (beta, alpha). */
  BidiffOperator transposed() const {
    BidiffOperator b(dim_);
    for (const auto& [key, c] : table_) b.table_.emplace(Key{key.second, key.first}, c);
    return b;
  }

  bool operator==(const BidiffOperator& o) const { return dim_ == o.dim_ && table_ == o.table_; }

  std::string to_string() const {
    std::string s;
    for (const auto& [key, c] : table_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.to_string() + ")*d[" + key.first.to_string() + "]xd[" +
           key.second.to_string() + "]";
    }
    return s.empty() ? "0" : s;
  }

 private:
  static int checked_dim(int dim) {
    if (dim < 1 || dim > Monomial::kMaxVars)
      throw std::invalid_argument("chart dimension must be between 1 and 8");
    return dim;
  }
  void check_shape(const BidiffOperator& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("dimension mismatch");
  }

  int dim_;
  std::map<Key, Poly> table_;
};

inline BidiffOperator symmetric_part(const BidiffOperator& b) {
  return (b + b.transposed()) * frac(1, 2);
}
inline BidiffOperator skew_part(const BidiffOperator& b) {
  return (b - b.transposed()) * frac(1, 2);
}

/** The pointwise multiplication table m(u,v) = uv. */
inline BidiffOperator multiplication_table(int dim) {
  BidiffOperator m(dim);
  m.add(Monomial(), Monomial(), Poly(dim, 1));
  return m;
}

/** The Poisson bracket table {u,v} = Lambda^{ij} d_i u d_j v. */
inline BidiffOperator poisson_table(const Matrix& lambda) {
  const int n = static_cast<int>(lambda.size());
  BidiffOperator br(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      br.add(Monomial::variable(i), Monomial::variable(j), lambda[i][j]);
  return br;
}

/**
 * Hochschild coboundary dE(u,v) = E(u)v - E(uv) + uE(v). For an entry
 * e_gamma with gamma != 0 the boundary splits of E(uv) at (gamma, 0) and
 * (0, gamma) cancel the first and last terms, so the result's table is
 * -binom(gamma, alpha) e_gamma at every split gamma = alpha + beta with both
 * parts nonzero; a gamma = 0 entry survives as +e_0 at (0, 0).
 */
inline BidiffOperator hochschild_coboundary(const DiffOperator& e) {
  BidiffOperator out(e.dim());
  for (const auto& [gamma, c] : e.table()) {
    out.add(gamma, Monomial(), c);
    out.add(Monomial(), gamma, c);
    for_each_divisor(e.dim(), gamma, [&](const Monomial& alpha) {
      out.add(alpha, gamma / alpha, c * Rational(-monomial_binomial(gamma, alpha)));
    });
  }
  return out;
}

/**
 * Gerstenhaber action (ad E C)(u,v) = E(C(u,v)) - C(Eu,v) - C(u,Ev),
 * expanded symbolically via Leibniz. When E kills constants the order law
 * [D0_r, D1_s] < D1_{r+s-1} holds (the top-order compositions cancel) and is
 * asserted here.
 */
inline BidiffOperator gerstenhaber_ad(const DiffOperator& e, const BidiffOperator& c) {
  if (e.dim() != c.dim()) throw std::invalid_argument("dimension mismatch");
  const int n = e.dim();
  BidiffOperator out(n);
  for (const auto& [mu, w] : e.table()) {
    for (const auto& [key, p] : c.table()) {
      const auto& [alpha, beta] = key;
      // E(C(u,v)): d^mu (p d^alpha u d^beta v) split three ways.
      for_each_divisor(n, mu, [&](const Monomial& gamma) {
        const Poly dp = p.partial(gamma);
        if (dp.is_zero()) return;
        const Monomial rest = mu / gamma;
        const Rational outer(monomial_binomial(mu, gamma));
        for_each_divisor(n, rest, [&](const Monomial& delta) {
          out.add(alpha * delta, beta * (rest / delta),
                  w * dp * (outer * Rational(monomial_binomial(rest, delta))));
        });
      });
      // -C(Eu, v): p d^alpha(w d^mu u) d^beta v.
      for_each_divisor(n, alpha, [&](const Monomial& gamma) {
        const Poly dw = w.partial(gamma);
        if (dw.is_zero()) return;
        out.add((alpha / gamma) * mu, beta,
                p * dw * Rational(-monomial_binomial(alpha, gamma)));
      });
      // -C(u, Ev): p d^alpha u d^beta(w d^mu v).
      for_each_divisor(n, beta, [&](const Monomial& gamma) {
        const Poly dw = w.partial(gamma);
        if (dw.is_zero()) return;
        out.add(alpha, (beta / gamma) * mu,
                p * dw * Rational(-monomial_binomial(beta, gamma)));
      });
    }
  }
  const int r = e.order();
  if (r >= 1 && e.annihilates_constants() && !c.is_zero()) {
    const auto co = c.orders();
    const int s = std::max(co.first, co.second);
    const auto oo = out.orders();
    if (std::max(oo.first, oo.second) > r + s - 1)
      throw std::logic_error("cochain order law violated");
  }
  return out;
}

/** A star product as explicit cochain tables C_0..C_N. */
struct StarProduct {
  int dim;
  int nu_order;
  std::vector<BidiffOperator> cochains;

  StarProduct(int dim_in, int nu_order_in)
      : dim(dim_in), nu_order(nu_order_in),
        cochains(static_cast<std::size_t>(checked_order(nu_order_in)) + 1,
                 BidiffOperator(dim_in)) {}

  const BidiffOperator& at(int r) const { return cochains.at(static_cast<std::size_t>(r)); }
  BidiffOperator& at(int r) { return cochains.at(static_cast<std::size_t>(r)); }

  /** u*v = sum_r nu^r C_r(u,v), truncated at the series order. */
  FormalFunction multiply(const FormalFunction& u, const FormalFunction& v) const {
    if (u.dim() != dim || v.dim() != dim) throw std::invalid_argument("dimension mismatch");
    if (u.order() != nu_order || v.order() != nu_order)
      throw std::invalid_argument("series order mismatch");
    FormalFunction out(dim, nu_order);
    for (int r = 0; r <= nu_order; ++r) {
      if (cochains[static_cast<std::size_t>(r)].is_zero()) continue;
      for (int a = 0; r + a <= nu_order; ++a)
        for (int b = 0; r + a + b <= nu_order; ++b)
          out.at(r + a + b) +=
              cochains[static_cast<std::size_t>(r)].apply(u.at(a), v.at(b));
    }
    return out;
  }

  bool operator==(const StarProduct& o) const {
    return dim == o.dim && nu_order == o.nu_order && cochains == o.cochains;
  }

 private:
  static int checked_order(int n) {
    if (n < 0) throw std::invalid_argument("series order must be nonnegative");
    return n;
  }
};

/** Per-cochain audit of the differential-order bound order(C_r) <= r. */
inline ValidationReport naturality_check(const StarProduct& s) {
  ValidationReport rep;
  for (int r = 0; r <= s.nu_order; ++r) {
    const auto o = s.at(r).orders();
    const bool ok = o.first <= r && o.second <= r;
    std::string detail =
        "orders (" + std::to_string(o.first) + ", " + std::to_string(o.second) + ")";
    if (!ok) {
      for (const auto& [key, c] : s.at(r).table())
        if (key.first.degree() > r || key.second.degree() > r) {
          detail += ", offending entry (d[" + key.first.to_string() + "], d[" +
                    key.second.to_string() + "])";
          break;
        }
    }
    rep.add("C" + std::to_string(r) + "_order", ok, detail);
  }
  return rep;
}

/** Associator audit (u*v)*w - u*(v*w) = 0 through nu^N for each triple. */
inline ValidationReport check_associativity(
    const StarProduct& s, const std::vector<std::array<FormalFunction, 3>>& triples) {
  ValidationReport rep;
  int idx = 0;
  for (const auto& t : triples) {
    const FormalFunction lhs = s.multiply(s.multiply(t[0], t[1]), t[2]);
    const FormalFunction rhs = s.multiply(t[0], s.multiply(t[1], t[2]));
    const FormalFunction diff = lhs - rhs;
    rep.add("triple_" + std::to_string(++idx), diff.is_zero(),
            diff.is_zero() ? "" : "associator " + diff.to_string());
  }
  return rep;
}

/** A formal series Exp(sum_r nu^r E_r) acting as an equivalence. */
struct EquivalenceSeries {
  int dim;
  int nu_order;
  std::vector<DiffOperator> generators;  // index r-1 holds E_r, r = 1..N

  EquivalenceSeries(int dim_in, int nu_order_in)
      : dim(dim_in), nu_order(nu_order_in),
        generators(static_cast<std::size_t>(checked_order(nu_order_in)),
                   DiffOperator(dim_in)) {}

  const DiffOperator& generator(int r) const {
    return generators.at(static_cast<std::size_t>(r) - 1);
  }
  DiffOperator& generator(int r) { return generators.at(static_cast<std::size_t>(r) - 1); }

  bool is_zero() const {
    for (const auto& e : generators)
      if (!e.is_zero()) return false;
    return true;
  }

  EquivalenceSeries negated() const {
    EquivalenceSeries e = *this;
    for (auto& g : e.generators) g = -g;
    return e;
  }

  /** Enforces order(E_r) <= r + 1 and E_r(1) = 0 for every generator. */
  void check_admissible() const {
    for (int r = 1; r <= nu_order; ++r) {
      if (generator(r).order() > r + 1)
        throw std::invalid_argument("equivalence generator E_" + std::to_string(r) +
                                    " exceeds the order bound " + std::to_string(r + 1));
      if (!generator(r).annihilates_constants())
        throw std::invalid_argument("equivalence generator E_" + std::to_string(r) +
                                    " does not kill constants");
    }
  }

 private:
  static int checked_order(int n) {
    if (n < 0) throw std::invalid_argument("series order must be nonnegative");
    return n;
  }
};

/** (Exp E)(f) = sum_j (1/j!) E^j f with E = sum_r nu^r E_r, truncated. */
inline FormalFunction apply_exponential(const EquivalenceSeries& e, const FormalFunction& f) {
  if (f.dim() != e.dim || f.order() != e.nu_order)
    throw std::invalid_argument("series shape mismatch");
  FormalFunction out = f;
  FormalFunction cur = f;  // E^j f / j!
  for (int j = 1; j <= e.nu_order && !cur.is_zero(); ++j) {
    FormalFunction next(e.dim, e.nu_order);
    for (int n = j; n <= e.nu_order; ++n)
      for (int r = 1; r <= n; ++r) {
        if (e.generator(r).is_zero()) continue;
        next.at(n) += e.generator(r).apply(cur.at(n - r));
      }
    cur = next * frac(1, j);
    out += cur;
  }
  return out;
}

/**
 * Exp(ad E) applied to the cochain tables: C' = sum_j (1/j!)(ad E)^j C with
 * each ad E raising the nu-grade by at least one, so the sum is finite per
 * order. The result represents f *' g = (Exp E)((Exp -E)f * (Exp -E)g).
 */
inline StarProduct apply_equivalence(const StarProduct& s, const EquivalenceSeries& e) {
  if (s.dim != e.dim || s.nu_order != e.nu_order)
    throw std::invalid_argument("star product and equivalence shapes differ");
  e.check_admissible();
  StarProduct out = s;
  std::vector<BidiffOperator> cur = s.cochains;  // (ad E)^j C / j!, nu-graded
  for (int j = 1; j <= s.nu_order; ++j) {
    std::vector<BidiffOperator> next(static_cast<std::size_t>(s.nu_order) + 1,
                                     BidiffOperator(s.dim));
    bool any = false;
    for (int n = j; n <= s.nu_order; ++n) {
      for (int r = 1; r <= n; ++r) {
        if (e.generator(r).is_zero() || cur[static_cast<std::size_t>(n - r)].is_zero())
          continue;
        next[static_cast<std::size_t>(n)] +=
            gerstenhaber_ad(e.generator(r), cur[static_cast<std::size_t>(n - r)]);
      }
      next[static_cast<std::size_t>(n)] =
          next[static_cast<std::size_t>(n)] * frac(1, j);
      any = any || !next[static_cast<std::size_t>(n)].is_zero();
    }
    cur = std::move(next);
    for (int n = 0; n <= s.nu_order; ++n)
      out.cochains[static_cast<std::size_t>(n)] += cur[static_cast<std::size_t>(n)];
    if (!any) break;
  }
  return out;
}

/**
 * Inverts the coboundary on a symmetric 2-cocycle: every entry b_{alpha,beta}
 * of B must equal -binom(gamma, alpha) e_gamma for gamma = alpha + beta and a
 * single consistent e; returns E with dE = -B (an exact reproduction check is
 * run, which is the full cocycle condition). The vector-field part of E is
 * not determined by B and is left at zero.
 */
inline DiffOperator cobound_symmetric_cocycle(const BidiffOperator& b) {
  DiffOperator e(b.dim());
  for (const auto& [key, c] : b.table()) {
    if (key.first.is_constant() || key.second.is_constant())
      throw std::invalid_argument("cocycle table acts on constants");
    if (!(b.coeff(key.second, key.first) == c))
      throw std::invalid_argument("cocycle table has antisymmetric part");
  }
  std::map<Monomial, Poly> assembled;
  for (const auto& [key, c] : b.table()) {
    const Monomial gamma = key.first * key.second;
    const Poly cand = c * (Rational(1) / Rational(monomial_binomial(gamma, key.first)));
    const auto [it, fresh] = assembled.emplace(gamma, cand);
    if (!fresh && !(it->second == cand)) throw std::invalid_argument("not a cocycle");
  }
  for (const auto& [gamma, c] : assembled) e.add(gamma, c);
  if (!(hochschild_coboundary(e) == -b)) throw std::invalid_argument("not a cocycle");
  return e;
}

/**
 * Solves apply_equivalence(s, E) = s2 order by order. At step k the defect
 * at nu^k is a symmetric cocycle killed by choosing E_k with dE_k = defect
 * (ad E_k m = -dE_k changes only orders >= k); a skew defect means the two
 * products differ in characteristic data and no equivalence exists.
 */
inline EquivalenceSeries construct_equivalence(const StarProduct& s, const StarProduct& s2) {
  if (s.dim != s2.dim || s.nu_order != s2.nu_order)
    throw std::invalid_argument("star product shapes differ");
  if (!(s.at(0) == s2.at(0)))
    throw std::invalid_argument("products differ already at nu^0");
  if (!(skew_part(s.at(1)) == skew_part(s2.at(1))))
    throw std::invalid_argument("products not equivalent as given");
  EquivalenceSeries e(s.dim, s.nu_order);
  StarProduct cur = s;
  for (int k = 1; k <= s.nu_order; ++k) {
    const BidiffOperator defect = cur.at(k) - s2.at(k);
    if (defect.is_zero()) continue;
    if (!skew_part(defect).is_zero())
      throw std::invalid_argument("products not equivalent as given");
    DiffOperator ek(s.dim);
    try {
      ek = cobound_symmetric_cocycle(-defect);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("products not equivalent as given");
    }
    e.generator(k) = ek;
    cur = apply_equivalence(s, e);
    if (!(cur.at(k) == s2.at(k)))
      throw std::invalid_argument("products not equivalent as given");
  }
  if (!(cur == s2)) throw std::invalid_argument("products not equivalent as given");
  return e;
}

/** The unique symplectic connection carried by a natural product's nu^2 term. */
struct ConnectionExtraction {
  Tensor3 gamma;
  DiffOperator e1;
  BidiffOperator remainder;  // the order <= 1 residue of the normalized C_2
  ValidationReport diagnostics;
};

/**
 * Reference second-order table (1/8) Lambda^{ij} Lambda^{kl} nabla2_{ik} (x)
 * nabla2_{jl} with nabla2_{ik} u = d_i d_k u - Gamma^m_{ik} d_m u; with
 * Gamma = 0 this is exactly the nu^2 term of the Moyal expansion.
 */
inline BidiffOperator second_order_reference(const Matrix& lambda, const Tensor3& gamma) {
  const int n = static_cast<int>(lambda.size());
  BidiffOperator out(n);
  const Rational eighth = frac(1, 8);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (lambda[i][j].is_zero()) continue;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (lambda[k][l].is_zero()) continue;
          const Poly scale = lambda[i][j] * lambda[k][l] * eighth;
          const Monomial du = Monomial::variable(i) * Monomial::variable(k);
          const Monomial dv = Monomial::variable(j) * Monomial::variable(l);
          out.add(du, dv, scale);
          for (int m = 0; m < n; ++m) {
            if (!gamma[m][j][l].is_zero())
              out.add(du, Monomial::variable(m), -(scale * gamma[m][j][l]));
            if (!gamma[m][i][k].is_zero())
              out.add(Monomial::variable(m), dv, -(scale * gamma[m][i][k]));
            for (int q = 0; q < n; ++q)
              if (!gamma[m][i][k].is_zero() && !gamma[q][j][l].is_zero())
                out.add(Monomial::variable(m), Monomial::variable(q),
                        scale * gamma[m][i][k] * gamma[q][j][l]);
          }
        }
    }
  return out;
}

/**
 * Steps 2-4 of the extraction with a caller-supplied E_1; exposed separately
 * so the vector-field ambiguity of E_1 can be exercised (the result must not
 * depend on a first-order part added to E_1).
 * Step 2: Delta = C_2 - (1/2)(ad E_1)^2 m - (ad E_1){,} must carry the Moyal
 * (2,2) entries. Step 3: the (2,1) entries are -(1/8) Lambda Lambda Gamma
 * contractions, inverted in closed form as Gamma^q_{ab} =
 * -8 omega_{ia} omega_{kb} T^{ikq}. Step 4: Gamma must be symmetric with
 * nabla omega = 0, and the remainder A_2 = Delta - reference(Lambda, Gamma)
 * must have order <= 1 per argument.
 */
inline ConnectionExtraction extract_connection_with(const StarProduct& s, const Matrix& omega,
                                                    const Matrix& lambda,
                                                    const DiffOperator& e1) {
  const int n = s.dim;
  if (static_cast<int>(omega.size()) != n || static_cast<int>(lambda.size()) != n)
    throw std::invalid_argument("dimension mismatch");
  if (s.nu_order < 2) throw std::invalid_argument("need cochains through nu^2");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly dot(omega[0][0].dim());
      for (int k = 0; k < n; ++k) dot += omega[i][k] * lambda[k][j];
      if (!(dot == Poly(omega[0][0].dim(), i == j ? 1 : 0)))
        throw std::invalid_argument("omega and lambda are not inverse");
    }
  {
    const auto o1 = s.at(1).orders();
    const auto o2 = s.at(2).orders();
    if (o1.first > 1 || o1.second > 1 || o2.first > 2 || o2.second > 2)
      throw std::invalid_argument("product is not natural through nu^2");
  }

  ConnectionExtraction out{make_tensor3(n), e1, BidiffOperator(n), {}};
  out.diagnostics.add("e1_order",
                      out.e1.order() <= 2,
                      "order " + std::to_string(out.e1.order()));

  const BidiffOperator half_bracket = poisson_table(lambda) * frac(1, 2);
  if (!(skew_part(s.at(1)) == half_bracket))
    throw std::invalid_argument("product's first-order bracket does not match lambda");

  // Step 2: strip the E_1 dressing and check the top (2,2) block. Undoing
  // Exp(ad E_1) on C_2 subtracts (ad E_1) skew(C_1) + (1/2)(ad E_1)^2 m.
  const BidiffOperator m = multiplication_table(n);
  const BidiffOperator ad1m = gerstenhaber_ad(out.e1, m);
  BidiffOperator delta = s.at(2) - gerstenhaber_ad(out.e1, ad1m) * frac(1, 2) -
                         gerstenhaber_ad(out.e1, half_bracket);
  const BidiffOperator top = second_order_reference(lambda, make_tensor3(n));
  BidiffOperator observed_top(n);
  for (const auto& [key, c] : delta.table())
    if (key.first.degree() == 2 && key.second.degree() == 2)
      observed_top.add(key.first, key.second, c);
  if (!(observed_top == top)) throw std::invalid_argument("not of natural second-order shape");
  out.diagnostics.add("second_order_shape", true);

  // Step 3: read Gamma off the (2,1) entries.
  const int poly_dim = omega[0][0].dim();
  Tensor3 t = make_tensor3(n);  // T^{ikq}, symmetric in (i,k)
  for (const auto& [key, c] : delta.table()) {
    if (key.first.degree() != 2 || key.second.degree() != 1) continue;
    int i = -1, k = -1, q = -1;
    for (int v = 0; v < n; ++v) {
      if (key.second.exponent(v) == 1) q = v;
      if (key.first.exponent(v) == 2) i = k = v;
      if (key.first.exponent(v) == 1) (i < 0 ? i : k) = v;
    }
    const Poly val = c * (i == k ? Rational(1) : frac(1, 2));
    t[i][k][q] = val;
    t[k][i][q] = val;
  }
  for (int q = 0; q < n; ++q)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Poly sum(poly_dim);
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) sum += omega[i][a] * omega[k][b] * t[i][k][q];
        out.gamma[q][a][b] = sum * Rational(-8);
      }

  // Step 4: symplectic-connection checks and the order <= 1 remainder.
  for (int q = 0; q < n; ++q)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (!(out.gamma[q][a][b] == out.gamma[q][b][a]))
          throw std::invalid_argument("no symplectic connection fits");
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Poly nabla = omega[i][j].partial(r);
        for (int k = 0; k < n; ++k)
          nabla -= out.gamma[k][r][i] * omega[k][j] + out.gamma[k][r][j] * omega[i][k];
        if (!nabla.is_zero()) throw std::invalid_argument("no symplectic connection fits");
      }
  out.diagnostics.add("gamma_symmetric", true);
  out.diagnostics.add("nabla_omega_zero", true);
  out.remainder = delta - second_order_reference(lambda, out.gamma);
  {
    const auto ro = out.remainder.orders();
    if (ro.first > 1 || ro.second > 1)
      throw std::invalid_argument("no symplectic connection fits");
    out.diagnostics.add("remainder_order", true,
                        "orders (" + std::to_string(ro.first) + ", " +
                            std::to_string(ro.second) + ")");
  }
  return out;
}

/**
 * Full extraction: Step 1 cobounds the symmetric part of C_1 (which is
 * -dE_1) into E_1 with its undetermined vector-field part set to zero, then
 * runs Steps 2-4.
 */
inline ConnectionExtraction extract_connection(const StarProduct& s, const Matrix& omega,
                                               const Matrix& lambda) {
  const BidiffOperator sym1 = symmetric_part(s.at(1));
  const DiffOperator e1 =
      sym1.is_zero() ? DiffOperator(s.dim) : cobound_symmetric_cocycle(sym1);
  return extract_connection_with(s, omega, lambda, e1);
}

}  // namespace fedosov
