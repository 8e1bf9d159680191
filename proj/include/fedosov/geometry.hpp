#pragma once

/**
 * Polynomial chart geometry: a symplectic form with polynomial entries and
 * polynomial inverse, a symplectic (torsion-free, omega-preserving)
 * connection, and an optional central series of closed two-forms. Everything
 * the flat-connection construction needs — curvature, the quadratic
 * connection section, its curvature section, covariant and Lie derivatives —
 * lives here as exact tensor calculus.
 *
 * Index conventions: gamma[l][i][j] = Gamma^l_{ij} (upper index first),
 * curvature R[l][i][j][k] = R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
 * + Gamma^l_{ir} Gamma^r_{jk} - Gamma^l_{jr} Gamma^r_{ik}.
 */

#include <bit>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedosov/fiber.hpp"
#include "fedosov/report.hpp"
#include "fedosov/weyl.hpp"

namespace fedosov {

using VectorField = std::vector<Poly>;
using Matrix = std::vector<std::vector<Poly>>;
using Tensor3 = std::vector<Matrix>;
using Tensor4 = std::vector<Tensor3>;

inline Matrix make_matrix(int dim) { return Matrix(dim, std::vector<Poly>(dim, Poly(dim))); }
inline Tensor3 make_tensor3(int dim) { return Tensor3(dim, make_matrix(dim)); }
inline Tensor4 make_tensor4(int dim) { return Tensor4(dim, make_tensor3(dim)); }

namespace detail {

inline void check_square(const Matrix& m, int dim, const char* what) {
  if (static_cast<int>(m.size()) != dim) throw std::invalid_argument(std::string(what) + " size");
  for (const auto& row : m) {
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument(std::string(what) + " is not square");
    for (const auto& p : row)
      if (p.dim() != dim) throw std::invalid_argument(std::string(what) + " dimension mismatch");
  }
}

}  // namespace detail

struct ChartGeometry {
  int dim;
  Matrix omega;                 // omega_{ij}, antisymmetric, closed
  Matrix lambda;                // Lambda^{ij} with omega * Lambda = Id
  Tensor3 gamma;                // Gamma^l_{ij}, symmetric in (i, j)
  std::map<int, Matrix> center; // nu power >= 1 -> closed two-form

  ChartGeometry(Matrix omega_in, Matrix lambda_in, Tensor3 gamma_in,
                std::map<int, Matrix> center_in = {})
      : dim(static_cast<int>(omega_in.size())),
        omega(std::move(omega_in)),
        lambda(std::move(lambda_in)),
        gamma(std::move(gamma_in)),
        center(std::move(center_in)) {
    if (dim < 2 || dim > Monomial::kMaxVars || dim % 2 != 0)
      throw std::invalid_argument("chart dimension must be even and between 2 and 8");
    detail::check_square(omega, dim, "omega");
    detail::check_square(lambda, dim, "lambda");
    if (static_cast<int>(gamma.size()) != dim)
      throw std::invalid_argument("connection needs one matrix per upper index");
    for (const auto& g : gamma) detail::check_square(g, dim, "gamma");
    for (const auto& [k, form] : center) {
      if (k < 1) throw std::invalid_argument("central forms start at nu^1");
      detail::check_square(form, dim, "center");
    }
  }

  /** Flat chart: the standard constant form, zero connection. */
  static ChartGeometry flat(int dim) {
    Matrix w = make_matrix(dim), l = make_matrix(dim);
    for (int i = 0; i + 1 < dim; i += 2) {
      w[i][i + 1] = Poly(dim, 1);
      w[i + 1][i] = Poly(dim, -1);
      l[i][i + 1] = Poly(dim, -1);
      l[i + 1][i] = Poly(dim, 1);
    }
    return ChartGeometry(std::move(w), std::move(l), make_tensor3(dim));
  }
};

/** Exact determinant by Laplace expansion over column subsets. */
inline Poly determinant(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) throw std::invalid_argument("empty matrix");
  const int dim = m[0][0].dim();
  // minors[S] = det of the first popcount(S) rows restricted to columns S.
  std::vector<Poly> minors(1u << n, Poly(dim));
  minors[0] = Poly(dim, 1);
  for (unsigned s = 1; s < (1u << n); ++s) {
    const int r = std::popcount(s) - 1;  // row index to expand along
    Poly d(dim);
    int pos = 0;  // position of the column within the subset
    for (int c = 0; c < n; ++c) {
      if (!(s & (1u << c))) continue;
      const int sign = (r + pos) % 2 == 0 ? 1 : -1;
      if (!m[r][c].is_zero()) d += m[r][c] * minors[s & ~(1u << c)] * Rational(sign);
      ++pos;
    }
    minors[s] = d;
  }
  return minors[(1u << n) - 1];
}

/**
 * Inverse of a polynomial matrix whose determinant is a nonzero constant
 * (adjugate over determinant); throws std::invalid_argument otherwise.
 * A symplectic form has a polynomial Poisson inverse exactly in this case.
 */
inline Matrix symplectic_inverse(const Matrix& m) {
  const int n = static_cast<int>(m.size());
  const Poly det = determinant(m);
  if (det.is_zero() || det.degree() > 0)
    throw std::invalid_argument("matrix determinant is not a nonzero constant: " +
                                det.to_string());
  const Rational inv_det = Rational(1) / det.coeff(Monomial());
  Matrix out = make_matrix(n);
  Matrix minor(n - 1, std::vector<Poly>(n - 1, Poly(m[0][0].dim())));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor[rr][cc++] = m[r][c];
        }
        ++rr;
      }
      const int sign = (i + j) % 2 == 0 ? 1 : -1;
      out[j][i] = determinant(minor) * (inv_det * sign);  // adjugate transposes
    }
  return out;
}

/** Structural checks: shapes, antisymmetry, closedness, inverse, symplectic connection. */
inline ValidationReport validate_geometry(const ChartGeometry& g) {
  ValidationReport rep;
  const int n = g.dim;

  bool anti = true, closed = true;
  std::string where;
  for (int i = 0; i < n && anti; ++i)
    for (int j = 0; j <= i && anti; ++j)
      if (!(g.omega[i][j] == -g.omega[j][i])) {
        anti = false;
        where = "omega[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]";
      }
  rep.add("omega_antisymmetric", anti, anti ? "" : where + " + transpose is nonzero");

  for (int i = 0; i < n && closed; ++i)
    for (int j = i + 1; j < n && closed; ++j)
      for (int k = j + 1; k < n && closed; ++k)
        if (!(g.omega[j][k].partial(i) + g.omega[k][i].partial(j) + g.omega[i][j].partial(k))
                 .is_zero()) {
          closed = false;
          where = "(d omega)_{" + std::to_string(i + 1) + std::to_string(j + 1) +
                  std::to_string(k + 1) + "}";
        }
  rep.add("omega_closed", closed, closed ? "" : where + " is nonzero");

  bool lanti = true;
  for (int i = 0; i < n && lanti; ++i)
    for (int j = 0; j <= i && lanti; ++j)
      if (!(g.lambda[i][j] == -g.lambda[j][i])) lanti = false;
  rep.add("lambda_antisymmetric", lanti);

  bool inverse = true;
  for (int i = 0; i < n && inverse; ++i)
    for (int k = 0; k < n && inverse; ++k) {
      Poly sum(n);
      for (int j = 0; j < n; ++j) sum += g.omega[i][j] * g.lambda[j][k];
      if (!(sum == (i == k ? Poly(n, 1) : Poly(n)))) inverse = false;
    }
  rep.add("omega_lambda_inverse", inverse, inverse ? "" : "omega * lambda is not the identity");

  bool sym = true;
  for (int l = 0; l < n && sym; ++l)
    for (int i = 0; i < n && sym; ++i)
      for (int j = 0; j < i && sym; ++j)
        if (!(g.gamma[l][i][j] == g.gamma[l][j][i])) sym = false;
  rep.add("gamma_symmetric", sym, sym ? "" : "Gamma^l_{ij} != Gamma^l_{ji}");

  bool parallel = true;
  for (int r = 0; r < n && parallel; ++r)
    for (int i = 0; i < n && parallel; ++i)
      for (int j = 0; j < n && parallel; ++j) {
        Poly nabla = g.omega[i][j].partial(r);
        for (int k = 0; k < n; ++k)
          nabla -= g.gamma[k][r][i] * g.omega[k][j] + g.gamma[k][r][j] * g.omega[i][k];
        if (!nabla.is_zero()) {
          parallel = false;
          where = "(nabla omega)_{" + std::to_string(r + 1) + ";" + std::to_string(i + 1) +
                  std::to_string(j + 1) + "}";
        }
      }
  rep.add("connection_symplectic", parallel, parallel ? "" : where + " is nonzero");

  bool cok = true;
  std::string cwhere;
  for (const auto& [k, form] : g.center) {
    for (int i = 0; i < n && cok; ++i)
      for (int j = 0; j <= i && cok; ++j)
        if (!(form[i][j] == -form[j][i])) {
          cok = false;
          cwhere = "center form at nu^" + std::to_string(k) + " is not antisymmetric";
        }
    for (int i = 0; i < n && cok; ++i)
      for (int j = i + 1; j < n && cok; ++j)
        for (int l = j + 1; l < n && cok; ++l)
          if (!(form[j][l].partial(i) + form[l][i].partial(j) + form[i][j].partial(l))
                   .is_zero()) {
            cok = false;
            cwhere = "center form at nu^" + std::to_string(k) + " is not closed";
          }
  }
  rep.add("center_forms", cok, cwhere);
  return rep;
}

/** R^l_{ijk} of the connection. */
inline Tensor4 curvature(const ChartGeometry& g) {
  const int n = g.dim;
  Tensor4 r = make_tensor4(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Poly v = g.gamma[l][j][k].partial(i) - g.gamma[l][i][k].partial(j);
          for (int s = 0; s < n; ++s)
            v += g.gamma[l][i][s] * g.gamma[s][j][k] - g.gamma[l][j][s] * g.gamma[s][i][k];
          r[l][i][j][k] = v;
        }
  return r;
}

/** A matrix two-form as a section: sum_{i<j} m[i][j] nu^k dx^i ^ dx^j. */
inline WeylSection two_form_section(const Matrix& m, int nu_power, const Truncation& t) {
  const int n = static_cast<int>(m.size());
  WeylSection s(n, t);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      s.add_term(nu_power, Monomial(), static_cast<FormMask>((1u << i) | (1u << j)), m[i][j]);
  return s;
}

/** The central series sum_k nu^k Omega_k as a section. */
inline WeylSection center_section(const ChartGeometry& g, const Truncation& t) {
  WeylSection s(g.dim, t);
  for (const auto& [k, form] : g.center) s += two_form_section(form, k, t);
  return s;
}

/** The quadratic connection section (1/2) omega_{ki} Gamma^k_{rj} y^i y^j dx^r. */
inline WeylSection gamma_bar(const ChartGeometry& g, const Truncation& t) {
  WeylSection s(g.dim, t);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j)
      for (int r = 0; r < g.dim; ++r) {
        Poly c(g.dim);
        for (int k = 0; k < g.dim; ++k) c += g.omega[k][i] * g.gamma[k][r][j];
        s.add_term(0, Monomial::variable(i) * Monomial::variable(j),
                   static_cast<FormMask>(1u << r), c * frac(1, 2));
      }
  return s;
}

/** The curvature section (1/4) omega_{rl} R^l_{ijk} y^r y^k dx^i ^ dx^j. */
inline WeylSection curvature_section(const ChartGeometry& g, const Tensor4& r,
                                     const Truncation& t) {
  WeylSection s(g.dim, t);
  for (int i = 0; i < g.dim; ++i)
    for (int j = i + 1; j < g.dim; ++j)
      for (int rr = 0; rr < g.dim; ++rr)
        for (int k = 0; k < g.dim; ++k) {
          Poly c(g.dim);
          for (int l = 0; l < g.dim; ++l)
            c += g.omega[rr][l] * (r[l][i][j][k] - r[l][j][i][k]);
          s.add_term(0, Monomial::variable(rr) * Monomial::variable(k),
                     static_cast<FormMask>((1u << i) | (1u << j)), c * frac(1, 4));
        }
  return s;
}

/**
 * The Weyl-bundle covariant derivative of the chart connection:
 * da - [gamma_bar, a] / nu, a graded derivation of the fiber product that
 * preserves the Weyl degree.
 */
inline WeylSection covariant_derivative(const FiberAlgebra& alg, const WeylSection& gbar,
                                        const WeylSection& a) {
  return a.exterior_d() - alg.bracket_div_nu(gbar, a);
}

// --- Lie derivatives along a polynomial vector field -----------------------

inline Poly lie_function(const VectorField& x, const Poly& f) {
  Poly r(f.dim());
  for (std::size_t v = 0; v < x.size(); ++v) r += x[v] * f.partial(static_cast<int>(v));
  return r;
}

inline VectorField lie_vector_field(const VectorField& x, const VectorField& y) {
  const int n = static_cast<int>(x.size());
  VectorField r(n, Poly(x[0].dim()));
  for (int k = 0; k < n; ++k)
    r[k] = lie_function(x, y[k]) - lie_function(y, x[k]);
  return r;
}

inline Matrix lie_two_form(const VectorField& x, const Matrix& w) {
  const int n = static_cast<int>(w.size());
  Matrix r = make_matrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r[i][j] = lie_function(x, w[i][j]);
      for (int s = 0; s < n; ++s)
        r[i][j] += x[s].partial(i) * w[s][j] + x[s].partial(j) * w[i][s];
    }
  return r;
}

/**
 * (L_X Gamma)^k_{ij} = X^r d_r Gamma^k_{ij} - (d_r X^k) Gamma^r_{ij}
 *   + (d_i X^r) Gamma^k_{rj} + (d_j X^r) Gamma^k_{ir} + d_i d_j X^k.
 */
inline Tensor3 lie_connection(const VectorField& x, const Tensor3& gamma) {
  const int n = static_cast<int>(gamma.size());
  Tensor3 out = make_tensor3(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Poly v = lie_function(x, gamma[k][i][j]) + x[k].partial(i).partial(j);
        for (int r = 0; r < n; ++r)
          v += -x[k].partial(r) * gamma[r][i][j] + x[r].partial(i) * gamma[k][r][j] +
               x[r].partial(j) * gamma[k][i][r];
        out[k][i][j] = v;
      }
  return out;
}

/**
 * Lie derivative of a Weyl section: the coefficient transport X^r d_{x^r}
 * plus the cotangent actions (d_i X^r) y^i d/dy^r on the fiber and the same
 * pattern on each dx slot.
 */
inline WeylSection lie_section(const VectorField& x, const WeylSection& a) {
  const int n = a.dim();
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("vector field needs one component per coordinate");
  WeylSection out(n, a.truncation());
  for (const auto& [key, c] : a.terms()) {
    for (int r = 0; r < n; ++r) out.add_term(key.k, key.alpha, key.j, x[r] * c.partial(r));
    for (int r = 0; r < n; ++r) {
      const unsigned e = key.alpha.exponent(r);
      if (e == 0) continue;
      const Monomial reduced = key.alpha / Monomial::variable(r);
      for (int i = 0; i < n; ++i) {
        const Poly d = x[r].partial(i);
        if (d.is_zero()) continue;
        out.add_term(key.k, reduced * Monomial::variable(i), key.j, c * d * Rational(e));
      }
    }
    for (int j = 0; j < n; ++j) {
      if (!(key.j & (1u << j))) continue;
      const FormMask rest = static_cast<FormMask>(key.j & ~(1u << j));
      const int pull = insert_sign(rest, j);
      for (int i = 0; i < n; ++i) {
        if (rest & (1u << i)) continue;
        const Poly d = x[j].partial(i);
        if (d.is_zero()) continue;
        out.add_term(key.k, key.alpha, static_cast<FormMask>(rest | (1u << i)),
                     c * d * Rational(pull * insert_sign(rest, i)));
      }
    }
  }
  return out;
}

// --- Covariant tensor calculus used by the higher layers -------------------

/** (nabla X)^k_i = d_i X^k + Gamma^k_{ir} X^r for a vector field. */
inline Matrix covariant_derivative_vector(const ChartGeometry& g, const VectorField& x) {
  Matrix out = make_matrix(g.dim);
  for (int k = 0; k < g.dim; ++k)
    for (int i = 0; i < g.dim; ++i) {
      out[k][i] = x[k].partial(i);
      for (int r = 0; r < g.dim; ++r) out[k][i] += g.gamma[k][i][r] * x[r];
    }
  return out;
}

/** nabla_i of a (1,1) tensor T^k_j. */
inline Tensor3 covariant_derivative_mixed(const ChartGeometry& g, const Matrix& t) {
  Tensor3 out = make_tensor3(g.dim);  // out[k][i][j] = (nabla_i T)^k_j
  for (int k = 0; k < g.dim; ++k)
    for (int i = 0; i < g.dim; ++i)
      for (int j = 0; j < g.dim; ++j) {
        Poly v = t[k][j].partial(i);
        for (int r = 0; r < g.dim; ++r)
          v += g.gamma[k][i][r] * t[r][j] - g.gamma[r][i][j] * t[k][r];
        out[k][i][j] = v;
      }
  return out;
}

/** (nabla_i beta)_j = d_i beta_j - Gamma^r_{ij} beta_r for a one-form. */
inline Matrix covariant_derivative_one_form(const ChartGeometry& g,
                                            const std::vector<Poly>& beta) {
  Matrix out = make_matrix(g.dim);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) {
      out[i][j] = beta[j].partial(i);
      for (int r = 0; r < g.dim; ++r) out[i][j] -= g.gamma[r][i][j] * beta[r];
    }
  return out;
}

/** The covariant Hessian nabla^2_{ij} u, symmetric for torsion-free Gamma. */
inline Matrix hessian(const ChartGeometry& g, const Poly& u) {
  std::vector<Poly> grad;
  grad.reserve(g.dim);
  for (int j = 0; j < g.dim; ++j) grad.push_back(u.partial(j));
  return covariant_derivative_one_form(g, grad);
}

/** X_h with i(X_h) omega = dh, i.e. X^k = Lambda^{jk} d_j h. */
inline VectorField hamiltonian_field(const ChartGeometry& g, const Poly& h) {
  VectorField x(g.dim, Poly(g.dim));
  for (int k = 0; k < g.dim; ++k)
    for (int j = 0; j < g.dim; ++j) x[k] += g.lambda[j][k] * h.partial(j);
  return x;
}

/** The Poisson bracket Lambda^{ij} d_i u d_j v. */
inline Poly poisson_bracket(const ChartGeometry& g, const Poly& u, const Poly& v) {
  Poly r(g.dim);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) r += g.lambda[i][j] * u.partial(i) * v.partial(j);
  return r;
}

/** The one-form (i(X) omega)_j = X^i omega_{ij}. */
inline std::vector<Poly> contract_form(const VectorField& x, const Matrix& w) {
  const int n = static_cast<int>(w.size());
  std::vector<Poly> beta(n, Poly(w[0][0].dim()));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) beta[j] += x[i] * w[i][j];
  return beta;
}

/**
 * Primitive of a closed one-form on the star-shaped chart via the radial
 * homotopy f(x) = integral_0^1 beta_j(tx) x^j dt; vanishes at the origin.
 * Throws std::invalid_argument when the form is not closed.
 */
inline Poly poincare_primitive(const std::vector<Poly>& beta) {
  const int n = static_cast<int>(beta.size());
  if (n == 0) throw std::invalid_argument("empty one-form");
  const int dim = beta[0].dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!(beta[j].partial(i) == beta[i].partial(j)))
        throw std::invalid_argument("one-form is not closed");
  Poly p(dim);
  for (int j = 0; j < n; ++j) p += Poly::variable(dim, j) * beta[j];
  // Every monomial of p carries at least one x factor, so the radial weight
  // -1 divides by the (strictly positive) homogeneity degree.
  return p.radial_homotopy_integral(-1);
}

}  // namespace fedosov
