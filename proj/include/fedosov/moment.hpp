#pragma once

/**
 * Symmetry and moment-map machinery: derivation criteria for a vector field,
 * the section T(X), the generalised Cartan formula residual, Hamiltonian
 * construction via the radial primitive, inner-derivation verification, and
 * transport of a moment map through an equivalence.
 */

#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedosov/cochain.hpp"
#include "fedosov/engine.hpp"
#include "fedosov/geometry.hpp"
#include "fedosov/report.hpp"

namespace fedosov {

// --- Derivation criterion ---------------------------------------------------

/**
 * X generates symmetries of the star product exactly when it preserves the
 * symplectic form, every central two-form, and the connection.
 */
struct DerivationReport {
  bool lie_omega_zero = false;
  bool lie_center_zero = false;
  bool lie_connection_zero = false;
  ValidationReport diagnostics;

  bool pass() const { return lie_omega_zero && lie_center_zero && lie_connection_zero; }
};

inline DerivationReport check_derivation(const VectorField& x, const ChartGeometry& g) {
  if (static_cast<int>(x.size()) != g.dim)
    throw std::invalid_argument("vector field needs one component per coordinate");
  for (const Poly& c : x)
    if (c.dim() != g.dim) throw std::invalid_argument("dimension mismatch");

  DerivationReport rep;

  const auto first_nonzero = [](const Matrix& m) -> std::string {
    const int n = static_cast<int>(m.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!m[i][j].is_zero())
          return "[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                 "] = " + m[i][j].to_string();
    return "";
  };

  const std::string w = first_nonzero(lie_two_form(x, g.omega));
  rep.lie_omega_zero = w.empty();
  rep.diagnostics.add("lie_omega_zero", rep.lie_omega_zero,
                      w.empty() ? "" : "(L_X omega)" + w);

  rep.lie_center_zero = true;
  std::string cdetail;
  for (const auto& [k, form] : g.center) {
    const std::string c = first_nonzero(lie_two_form(x, form));
    if (!c.empty()) {
      rep.lie_center_zero = false;
      cdetail = "(L_X Omega_" + std::to_string(k) + ")" + c;
      break;
    }
  }
  rep.diagnostics.add("lie_center_zero", rep.lie_center_zero, cdetail);

  const Tensor3 lg = lie_connection(x, g.gamma);
  std::string gdetail;
  for (int k = 0; k < g.dim && gdetail.empty(); ++k) {
    const std::string c = first_nonzero(lg[k]);
    if (!c.empty()) gdetail = "(L_X Gamma)^" + std::to_string(k + 1) + c;
  }
  rep.lie_connection_zero = gdetail.empty();
  rep.diagnostics.add("lie_connection_zero", rep.lie_connection_zero, gdetail);

  return rep;
}

// --- The section T(X) and the generalised Cartan formula --------------------

/**
 * T(X) = i(X)r + omega_{ij} X^i y^j + (1/2)(nabla_i(i(X)omega))_j y^i y^j.
 * The assembled section is checked against DT(X) = -i(X)omega + i(X)Omega on
 * every slice the truncation determines; a residual means X fails the
 * derivation criterion or the Fedosov data is inconsistent.
 */
inline WeylSection t_of_x(const VectorField& x, const FedosovData& fd) {
  const ChartGeometry& g = fd.geometry;
  if (static_cast<int>(x.size()) != g.dim)
    throw std::invalid_argument("vector field needs one component per coordinate");

  WeylSection t = fd.r.interior(x);
  const std::vector<Poly> beta = contract_form(x, g.omega);
  for (int j = 0; j < g.dim; ++j) t.add_term(0, Monomial::variable(j), 0, beta[j]);
  const Matrix nb = covariant_derivative_one_form(g, beta);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j)
      t.add_term(0, Monomial::variable(i) * Monomial::variable(j), 0, nb[i][j] * frac(1, 2));

  const WeylSection rhs =
      fd.center.interior(x) - two_form_section(g.omega, 0, fd.truncation).interior(x);
  const WeylSection residual = fedosov_d(fd, t) - rhs;
  const int window = fd.truncation.degree_cap - 1;
  if (!detail::vanishes_through(residual, window))
    throw std::invalid_argument("T(X) fails DT(X) = -i(X)omega + i(X)Omega; " +
                                detail::residual_detail(residual, window) +
                                " (X is not a symmetry of the geometry)");
  return t;
}

/**
 * Residual of L_X a = D i(X) a + i(X) D a + (1/nu)[T, a] per probe, with a
 * caller-supplied T so corrupted sections can be exercised.
 */
inline ValidationReport cartan_residual_with(const VectorField& x, const FedosovData& fd,
                                             const WeylSection& t,
                                             const std::vector<WeylSection>& probes) {
  ValidationReport rep;
  const int window = fd.truncation.degree_cap - 2;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const WeylSection& a = probes[i];
    const WeylSection residual = lie_section(x, a) - fedosov_d(fd, a.interior(x)) -
                                 fedosov_d(fd, a).interior(x) -
                                 fd.algebra.bracket_div_nu(t, a);
    const bool ok = detail::vanishes_through(residual, window);
    rep.add("probe_" + std::to_string(i), ok,
            ok ? "" : detail::residual_detail(residual, window));
  }
  return rep;
}

inline ValidationReport cartan_residual(const VectorField& x, const FedosovData& fd,
                                        const std::vector<WeylSection>& probes) {
  return cartan_residual_with(x, fd, t_of_x(x, fd), probes);
}

// --- Hamiltonians for symmetries ---------------------------------------------

/** Outcome of the moment-map construction for one vector field. */
struct MomentResult {
  bool closed = false;        // d(i(X)(omega - Omega)) = 0, order by order
  FormalFunction lambda;      // primitive with d lambda = i(X)(omega - Omega)
  ValidationReport diagnostics;
};

/**
 * The candidate series beta = i(X)(omega - Omega) of one-forms, by nu order.
 * Order 0 carries i(X)omega; order k >= 1 carries -i(X)Omega_k.
 */
inline std::vector<std::vector<Poly>> moment_one_forms(const VectorField& x,
                                                       const ChartGeometry& g,
                                                       int nu_order) {
  std::vector<std::vector<Poly>> beta(
      static_cast<std::size_t>(nu_order) + 1,
      std::vector<Poly>(static_cast<std::size_t>(g.dim), Poly(g.dim)));
  beta[0] = contract_form(x, g.omega);
  for (const auto& [k, form] : g.center) {
    if (k > nu_order) continue;
    const std::vector<Poly> part = contract_form(x, form);
    for (int j = 0; j < g.dim; ++j) beta[static_cast<std::size_t>(k)][j] = -part[j];
  }
  return beta;
}

/**
 * Construct the formal Hamiltonian: solve d lambda = i(X)(omega - Omega)
 * order by order with the radial primitive (exact on the star-shaped chart), verifying
 * closedness first and the gradient identity afterwards.
 */
inline MomentResult hamiltonian_lambda(const VectorField& x, const ChartGeometry& g,
                                       int nu_order) {
  if (static_cast<int>(x.size()) != g.dim)
    throw std::invalid_argument("vector field needs one component per coordinate");
  const auto beta = moment_one_forms(x, g, nu_order);

  MomentResult out{true, FormalFunction(g.dim, nu_order), {}};
  for (int k = 0; k <= nu_order; ++k) {
    const auto& b = beta[static_cast<std::size_t>(k)];
    for (int i = 0; i < g.dim; ++i)
      for (int j = i + 1; j < g.dim; ++j)
        if (!(b[j].partial(i) == b[i].partial(j)))
          throw std::invalid_argument("not closed");
    out.diagnostics.add("closed_nu" + std::to_string(k), true);
    out.lambda.at(k) = poincare_primitive(b);
    for (int j = 0; j < g.dim; ++j)
      if (!(out.lambda.at(k).partial(j) == b[j]))
        throw std::logic_error("internal error: radial primitive fails d lambda = beta");
    out.diagnostics.add("gradient_nu" + std::to_string(k), true);
  }
  return out;
}

// --- Inner-derivation verification -------------------------------------------

/**
 * Residual of X(u) = (1/nu)(lambda * u - u * lambda) per test function,
 * exact through nu^{N-1} (the division discards the last retained order).
 */
inline ValidationReport verify_inner(const VectorField& x, const FormalFunction& lambda,
                                     const FedosovData& fd,
                                     const std::vector<FormalFunction>& test_functions) {
  ValidationReport rep;
  const int order = fd.truncation.nu_order;
  for (std::size_t i = 0; i < test_functions.size(); ++i) {
    const FormalFunction& u = test_functions[i];
    const FormalFunction c = star_multiply(fd, lambda, u) - star_multiply(fd, u, lambda);
    bool ok = c.at(0).is_zero();
    std::string detail = ok ? "" : "commutator has a nu^0 part";
    for (int k = 0; ok && k + 1 <= order; ++k) {
      const Poly residual = lie_function(x, u.at(k)) - c.at(k + 1);
      if (!residual.is_zero()) {
        ok = false;
        detail = "residual at nu^" + std::to_string(k);
      }
    }
    rep.add("test_" + std::to_string(i), ok, detail);
  }
  return rep;
}

// --- Star-bracket helpers -----------------------------------------------------

/** [u, v] = (1/nu)(u*v - v*u); exact through nu^{N-1}, leading term {u, v}. */
inline FormalFunction star_commutator(const FedosovData& fd, const FormalFunction& u,
                                      const FormalFunction& v) {
  const FormalFunction c = star_multiply(fd, u, v) - star_multiply(fd, v, u);
  FormalFunction out(c.dim(), c.order() > 0 ? c.order() - 1 : 0);
  if (!c.at(0).is_zero())
    throw std::logic_error("internal error: star commutator has a nu^0 part");
  for (int k = 0; k + 1 <= c.order(); ++k) out.at(k) = c.at(k + 1);
  return out;
}

inline FormalFunction star_commutator(const StarProduct& s, const FormalFunction& u,
                                      const FormalFunction& v) {
  const FormalFunction c = s.multiply(u, v) - s.multiply(v, u);
  FormalFunction out(c.dim(), c.order() > 0 ? c.order() - 1 : 0);
  if (!c.at(0).is_zero())
    throw std::logic_error("internal error: star commutator has a nu^0 part");
  for (int k = 0; k + 1 <= c.order(); ++k) out.at(k) = c.at(k + 1);
  return out;
}

// --- Transport through an equivalence ----------------------------------------

/**
 * mu = (Exp E) lambda, verified as a moment map for X against the transformed
 * product's own tables; a failure means E is not equivariant for X or lambda
 * was not a moment map to begin with.
 */
inline FormalFunction transport_moment(const EquivalenceSeries& e, const FormalFunction& lambda,
                                       const StarProduct& s2, const VectorField& x,
                                       const std::vector<FormalFunction>& test_functions) {
  if (e.dim != s2.dim || lambda.dim() != s2.dim)
    throw std::invalid_argument("dimension mismatch");
  if (e.nu_order != s2.nu_order || lambda.order() != s2.nu_order)
    throw std::invalid_argument("series order mismatch");
  const FormalFunction mu = apply_exponential(e, lambda);
  for (const FormalFunction& u : test_functions) {
    const FormalFunction c = s2.multiply(mu, u) - s2.multiply(u, mu);
    bool ok = c.at(0).is_zero();
    for (int k = 0; ok && k + 1 <= s2.nu_order; ++k)
      ok = (lie_function(x, u.at(k)) - c.at(k + 1)).is_zero();
    if (!ok)
      throw std::invalid_argument(
          "transported moment fails verification (equivalence not equivariant or moment wrong)");
  }
  return mu;
}

// --- Invariance under a chart automorphism ------------------------------------

/** Per-coefficient substitution u(tau(x)) for a series. */
inline FormalFunction compose(const FormalFunction& f, const std::vector<Poly>& map) {
  FormalFunction out(f.dim(), f.order());
  for (int k = 0; k <= f.order(); ++k) out.at(k) = f.at(k).compose(map);
  return out;
}

/**
 * Invariance of the product under the polynomial map tau: checks that
 * (u . tau) * (v . tau) = (u * v) . tau on a deterministic battery, and that
 * every cochain table commutes with the substitution on the same battery.
 */
inline ValidationReport check_invariance(const StarProduct& s, const std::vector<Poly>& tau,
                                         const std::vector<Poly>& tau_inverse) {
  const int n = s.dim;
  if (static_cast<int>(tau.size()) != n || static_cast<int>(tau_inverse.size()) != n)
    throw std::invalid_argument("map needs one component per coordinate");
  for (int v = 0; v < n; ++v) {
    if (!(tau[v].compose(tau_inverse) == Poly::variable(n, v)) ||
        !(tau_inverse[v].compose(tau) == Poly::variable(n, v)))
      throw std::invalid_argument("map and inverse do not compose to the identity");
  }

  std::mt19937 rng(20260813u);
  const std::vector<Monomial> basis = monomials_up_to(n, 3);
  const auto random_poly = [&]() {
    Poly p(n);
    for (int t = 0; t < 3; ++t) {
      const int c = 1 + static_cast<int>(rng() % 5u);
      p += Poly::monomial(n, basis[rng() % basis.size()],
                          Rational(rng() % 2u == 0 ? c : -c));
    }
    return p;
  };

  ValidationReport rep;
  for (int i = 0; i < 4; ++i) {
    const Poly u = random_poly();
    const Poly v = random_poly();
    const FormalFunction fu = FormalFunction::from_poly(u.compose(tau), s.nu_order);
    const FormalFunction fv = FormalFunction::from_poly(v.compose(tau), s.nu_order);
    const FormalFunction lhs = s.multiply(fu, fv);
    const FormalFunction rhs =
        compose(s.multiply(FormalFunction::from_poly(u, s.nu_order),
                           FormalFunction::from_poly(v, s.nu_order)),
                tau);
    rep.add("product_pair_" + std::to_string(i), lhs == rhs);
    for (int r = 0; r <= s.nu_order; ++r) {
      const Poly table_lhs = s.at(r).apply(u.compose(tau), v.compose(tau));
      const Poly table_rhs = s.at(r).apply(u, v).compose(tau);
      rep.add("cochain_C" + std::to_string(r) + "_pair_" + std::to_string(i),
              table_lhs == table_rhs);
    }
  }
  return rep;
}

}  // namespace fedosov
