#pragma once

/**
 * The flat-connection construction on a chart: the degree-by-degree recursion
 * for the connection section r, flatness diagnostics, the quantisation map
 * sending a series of functions to its flat section, the star product this
 * induces, and extraction of the product's bidifferential cochain tables.
 *
 * Truncation determinacy (with cap = degree_cap): the recursion determines r
 * exactly through Weyl degree cap; the connection-equation residual is then
 * trustworthy on degrees <= cap - 1, flat sections through cap, and D of a
 * flat section on degrees <= cap - 1. Checks below restrict themselves to
 * those windows; the default cap = 2N + 2 makes the star product exact
 * through nu^N.
 */

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fedosov/cochain.hpp"
#include "fedosov/fiber.hpp"
#include "fedosov/geometry.hpp"

namespace fedosov {

/** Everything solve_r produces; immutable afterwards. */
struct FedosovData {
  ChartGeometry geometry;
  Truncation truncation;
  FiberAlgebra algebra;
  WeylSection gbar;    // connection one-form, quadratic in y
  WeylSection rbar;    // curvature two-form section
  WeylSection center;  // the central two-form series
  WeylSection r;       // solution of the recursion
  int lowest_r_degree; // observed lowest Weyl degree of r (-1 when r = 0)
};

/** D a = (d - ad(gbar)/nu) a - delta a - [r, a]/nu. */
inline WeylSection fedosov_d(const FedosovData& fd, const WeylSection& a) {
  return covariant_derivative(fd.algebra, fd.gbar, a) - a.delta() -
         fd.algebra.bracket_div_nu(fd.r, a);
}

/**
 * Solves r = delta_inv(Omega - Rbar + del r - (1/2)[r,r]/nu) by increasing
 * Weyl degree: the slice of the right side at degree d only involves slices
 * of r up to d, and contributes the degree d + 1 slice of r.
 */
inline FedosovData solve_r(const ChartGeometry& g, const Truncation& t) {
  {
    const ValidationReport rep = validate_geometry(g);
    if (!rep.pass()) {
      std::string which;
      for (const auto& c : rep.checks)
        if (!c.pass) {
          which = c.name;
          break;
        }
      throw std::invalid_argument("geometry fails validation: " + which);
    }
  }
  FiberAlgebra alg(g.lambda, t);
  WeylSection gbar = gamma_bar(g, t);
  WeylSection rbar = curvature_section(g, curvature(g), t);
  WeylSection center = center_section(g, t);
  WeylSection r(g.dim, t);
  for (int d = 2; d < t.degree_cap; ++d) {
    const WeylSection rhs = center - rbar + covariant_derivative(alg, gbar, r) -
                            alg.bracket_div_nu(r, r) * frac(1, 2);
    const WeylSection gain = rhs.slice(d).delta_inv();
    if (!gain.is_zero() && gain.lowest_weyl_degree() != d + 1)
      throw std::logic_error("recursion gain landed off its grade (internal error)");
    r += gain;
  }
  const int lowest = r.lowest_weyl_degree();
  if (!r.is_zero() && lowest < 2)
    throw std::logic_error("recursion produced a term of Weyl degree < 2 (internal error)");
  if (!r.delta_inv().is_zero())
    throw std::logic_error("recursion lost the delta_inv normalization (internal error)");
  return FedosovData{g, t, std::move(alg), std::move(gbar), std::move(rbar),
                     std::move(center), std::move(r), lowest};
}

namespace detail {

/** True when the section has no term of Weyl degree <= max_degree. */
inline bool vanishes_through(const WeylSection& a, int max_degree) {
  for (const auto& [key, c] : a.terms())
    if (key.weyl_degree() <= max_degree) return false;
  return true;
}

/** Lowest offending degree for a report line. */
inline std::string residual_detail(const WeylSection& a, int max_degree) {
  for (const auto& [key, c] : a.terms())
    if (key.weyl_degree() <= max_degree)
      return "residual at Weyl degree " + std::to_string(key.weyl_degree());
  return "";
}

/** Small deterministic probe battery: scalars, fiber terms, and a one-form. */
inline std::vector<WeylSection> flatness_probes(int dim, const Truncation& t) {
  std::vector<WeylSection> probes;
  const Poly one(dim, 1);
  WeylSection unit(dim, t);
  unit.add_term(0, Monomial(), 0, one);
  probes.push_back(unit);
  WeylSection y1(dim, t);
  y1.add_term(0, Monomial::variable(0), 0, one);
  probes.push_back(y1);
  WeylSection quad(dim, t);
  quad.add_term(0, Monomial::variable(0) * Monomial::variable(dim - 1), 0,
                Poly::variable(dim, 0));
  probes.push_back(quad);
  WeylSection nu_y(dim, t);
  nu_y.add_term(1, Monomial::variable(dim - 1), 0, one + Poly::variable(dim, dim - 1));
  probes.push_back(nu_y);
  WeylSection form(dim, t);
  form.add_term(0, Monomial::variable(0), FormMask(1u << (dim - 1)),
                Poly::variable(dim, 1));
  probes.push_back(form);
  WeylSection mixed(dim, t);
  mixed.add_term(0, Monomial::variable(1) * Monomial::variable(1), 0, one);
  mixed.add_term(1, Monomial(), FormMask(1), Poly::variable(dim, 0) * Poly::variable(dim, 1));
  probes.push_back(mixed);
  return probes;
}

}  // namespace detail

/**
 * Residual report for the connection: (a) the r-equation
 * D r = Rbar - Omega - (1/2)[r,r]/nu on degrees <= cap - 1 and (b) D(D(a))
 * on degrees <= cap - 2 for a deterministic probe battery.
 */
inline ValidationReport flatness_check(const FedosovData& fd) {
  ValidationReport rep;
  const int cap = fd.truncation.degree_cap;
  const WeylSection r_residual =
      fedosov_d(fd, fd.r) -
      (fd.rbar - fd.center - fd.algebra.bracket_div_nu(fd.r, fd.r) * frac(1, 2));
  rep.add("r_equation", detail::vanishes_through(r_residual, cap - 1),
          detail::residual_detail(r_residual, cap - 1));
  int idx = 0;
  for (const auto& probe : detail::flatness_probes(fd.geometry.dim, fd.truncation)) {
    const WeylSection dd = fedosov_d(fd, fedosov_d(fd, probe));
    rep.add("d_squared_probe_" + std::to_string(++idx),
            detail::vanishes_through(dd, cap - 2), detail::residual_detail(dd, cap - 2));
  }
  return rep;
}

/**
 * Quantisation map: the unique section with scalar part f satisfying
 * a = f + delta_inv(del a - [r,a]/nu), built slice by slice; exact through
 * Weyl degree cap.
 */
inline WeylSection flat_section(const FedosovData& fd, const FormalFunction& f) {
  WeylSection a = WeylSection::embed(f, fd.truncation);
  for (int d = 0; d < fd.truncation.degree_cap; ++d) {
    const WeylSection rhs =
        covariant_derivative(fd.algebra, fd.gbar, a) - fd.algebra.bracket_div_nu(fd.r, a);
    a += rhs.slice(d).delta_inv();
  }
  return a;
}

/** u * v: the scalar part of the fiber product of the two flat sections. */
inline FormalFunction star_multiply(const FedosovData& fd, const FormalFunction& u,
                                    const FormalFunction& v) {
  if (u.dim() != fd.geometry.dim || v.dim() != fd.geometry.dim)
    throw std::invalid_argument("dimension mismatch");
  if (u.order() != fd.truncation.nu_order || v.order() != fd.truncation.nu_order)
    throw std::invalid_argument("series order mismatch");
  return fd.algebra.scalar_product(flat_section(fd, u), flat_section(fd, v));
}

/** Associator audit through nu^N on explicit triples, via star_multiply. */
inline ValidationReport check_associativity(
    const FedosovData& fd, const std::vector<std::array<FormalFunction, 3>>& triples) {
  ValidationReport rep;
  int idx = 0;
  for (const auto& t : triples) {
    const FormalFunction lhs = star_multiply(fd, star_multiply(fd, t[0], t[1]), t[2]);
    const FormalFunction rhs = star_multiply(fd, t[0], star_multiply(fd, t[1], t[2]));
    const FormalFunction diff = lhs - rhs;
    rep.add("triple_" + std::to_string(++idx), diff.is_zero(),
            diff.is_zero() ? "" : "associator " + diff.to_string());
  }
  return rep;
}

/**
 * Materializes the cochain tables C_0..C_N by probing star_multiply on the
 * monomial basis of degree <= max_diff_order and solving the triangular
 * system in graded-lex order: the pair (sigma, tau) determines b_{sigma,tau}
 * once every dominated pair is known, since d^alpha x^sigma is a falling-
 * factorial multiple of x^{sigma-alpha}. A deterministic random verification
 * pass guards against max_diff_order being too small for the product.
 */
inline StarProduct extract_cochains(const FedosovData& fd, int max_diff_order) {
  if (max_diff_order < 0) throw std::invalid_argument("max_diff_order must be nonnegative");
  const int n = fd.geometry.dim;
  const int N = fd.truncation.nu_order;
  const std::vector<Monomial> basis = monomials_up_to(n, max_diff_order);

  std::vector<FormalFunction> star(basis.size() * basis.size(),
                                   FormalFunction(n, N));
  {
    std::vector<WeylSection> flat;
    flat.reserve(basis.size());
    for (const Monomial& m : basis)
      flat.push_back(
          flat_section(fd, FormalFunction::from_poly(Poly::monomial(n, m, 1), N)));
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j < basis.size(); ++j)
        star[i * basis.size() + j] = fd.algebra.scalar_product(flat[i], flat[j]);
  }

  StarProduct s(n, N);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Monomial& sigma = basis[i];
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Monomial& tau = basis[j];
      FormalFunction residual = star[i * basis.size() + j];
      for (int rr = 0; rr <= N; ++rr)
        for (const auto& [key, b] : s.at(rr).table()) {
          const auto& [alpha, beta] = key;
          if (!alpha.divides(sigma) || !beta.divides(tau)) continue;
          const Integer scale =
              partial_coefficient(sigma, alpha) * partial_coefficient(tau, beta);
          residual.at(rr) -= b * Poly::monomial(n, (sigma / alpha) * (tau / beta),
                                                Rational(scale));
        }
      const Rational inv =
          Rational(1) / Rational(monomial_factorial(sigma) * monomial_factorial(tau));
      for (int rr = 0; rr <= N; ++rr) {
        const Poly b = residual.at(rr) * inv;
        if (!b.is_zero()) s.at(rr).add(sigma, tau, b);
      }
    }
  }

  // Verification sweep on reproducible pseudo-random pairs one degree past
  // the probing basis, so a table truncated by max_diff_order is caught.
  std::mt19937 rng(20260813u);
  std::uniform_int_distribution<int> coeff(-4, 4);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(basis.size()) - 1);
  std::uniform_int_distribution<int> var(0, n - 1);
  for (int trial = 0; trial < 5; ++trial) {
    FormalFunction u(n, N), v(n, N);
    for (int term = 0; term < 4; ++term) {
      const Monomial mu =
          basis[static_cast<std::size_t>(pick(rng))] * Monomial::variable(var(rng));
      const Monomial mv =
          basis[static_cast<std::size_t>(pick(rng))] * Monomial::variable(var(rng));
      u.at(0).add_term(mu, Rational(coeff(rng)));
      v.at(0).add_term(mv, Rational(coeff(rng)));
    }
    if (!(s.multiply(u, v) == star_multiply(fd, u, v)))
      throw std::runtime_error(
          "cochain tables fail verification; raise max_diff_order");
  }
  return s;
}

}  // namespace fedosov
