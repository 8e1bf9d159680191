#pragma once

/**
 * The chart-geometry battery shared by the unit tests and the acceptance
 * runner: several polynomial symplectic connections in dimension 2, one in
 * dimension 4, the flat chart with and without a central two-form, and one
 * chart with a non-constant symplectic form (used by the geometry-level
 * tests only; the engine battery stays in Darboux form, where the quadratic
 * connection section reproduces the covariant derivative).
 *
 * Connections are entered through the totally symmetric lowered array
 * sigma_{kij} = omega_{kl} Gamma^l_{ij}; in Darboux coordinates total
 * symmetry of sigma is exactly the symplectic condition nabla omega = 0,
 * so every battery entry is symplectic by construction and the frozen
 * Christoffel values in the tests double as oracles for the contraction
 * Gamma^l_{ij} = Lambda^{lk} sigma_{kij}.
 */

#include <vector>

#include "fedosov/geometry.hpp"
#include "random_gen.hpp"

namespace battery {

using namespace fedosov;

/** sigma with the value v at every permutation of the 1-based slots (a,b,c). */
inline void set_symmetric(Tensor3& s, int a, int b, int c, const Poly& v) {
  const int i = a - 1, j = b - 1, k = c - 1;
  s[i][j][k] = v;
  s[i][k][j] = v;
  s[j][i][k] = v;
  s[j][k][i] = v;
  s[k][i][j] = v;
  s[k][j][i] = v;
}

/** Gamma^l_{ij} = Lambda^{lk} sigma_{kij}. */
inline Tensor3 gamma_from_sigma(const Matrix& lambda, const Tensor3& sigma) {
  const int n = static_cast<int>(lambda.size());
  Tensor3 g = make_tensor3(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) g[l][i][j] += lambda[l][k] * sigma[k][i][j];
  return g;
}

inline ChartGeometry darboux_chart(int dim, const Tensor3& sigma,
                                   std::map<int, Matrix> center = {}) {
  Matrix lambda = testutil::standard_lambda(dim);
  Tensor3 gamma = gamma_from_sigma(lambda, sigma);
  return ChartGeometry(testutil::standard_omega(dim), std::move(lambda), std::move(gamma),
                       std::move(center));
}

/** Flat R^2: standard omega, Gamma = 0, Omega = 0. */
inline ChartGeometry flat2() { return ChartGeometry::flat(2); }

/** Flat R^2 with the central two-form Omega = nu * c * dx1 ^ dx2. */
inline ChartGeometry flat2_center(const Rational& c) {
  Matrix form = make_matrix(2);
  form[0][1] = Poly(2, c);
  form[1][0] = Poly(2, -c);
  return ChartGeometry(testutil::standard_omega(2), testutil::standard_lambda(2),
                       make_tensor3(2), {{1, form}});
}

/** sigma_111 = 1: constant connection, Gamma^2_11 = 1, flat (R = 0). */
inline ChartGeometry b1() {
  Tensor3 sigma = make_tensor3(2);
  set_symmetric(sigma, 1, 1, 1, Poly(2, 1));
  return darboux_chart(2, sigma);
}

/** sigma_112 = x1: Gamma^1_11 = -x1, Gamma^2_12 = x1, curvature R^2_121 = 1 + 2 x1^2. */
inline ChartGeometry b2() {
  Tensor3 sigma = make_tensor3(2);
  set_symmetric(sigma, 1, 1, 2, parse_poly("x1", 2));
  return darboux_chart(2, sigma);
}

/** sigma_111 = x2: Gamma^2_11 = x2, curvature R^2_211 = 1. */
inline ChartGeometry b3() {
  Tensor3 sigma = make_tensor3(2);
  set_symmetric(sigma, 1, 1, 1, parse_poly("x2", 2));
  return darboux_chart(2, sigma);
}

/** Dimension 4: sigma_111 = x3 plus x1 spread over the (1,3,4) slots; curved. */
inline ChartGeometry b4() {
  Tensor3 sigma = make_tensor3(4);
  set_symmetric(sigma, 1, 1, 1, parse_poly("x3", 4));
  set_symmetric(sigma, 1, 3, 4, parse_poly("x1", 4));
  return darboux_chart(4, sigma);
}

/**
 * Non-constant symplectic form (standard + x1 dx1 ^ dx3) with the symplectic
 * connection sigma_{abc} = (1/3)(d_b omega_{ac} + d_c omega_{ab}):
 * Gamma^2_13 = Gamma^2_31 = 1/3, Gamma^4_11 = -2/3, flat (R = 0).
 */
inline ChartGeometry curved_form_chart() {
  Tensor3 gamma = make_tensor3(4);
  gamma[1][0][2] = parse_poly("1/3", 4);
  gamma[1][2][0] = parse_poly("1/3", 4);
  gamma[3][0][0] = parse_poly("-2/3", 4);
  return ChartGeometry(testutil::curved_omega_dim4(), testutil::curved_lambda_dim4(),
                       std::move(gamma));
}

/** The geometries the engine-level acceptance criteria run over. */
inline std::vector<ChartGeometry> engine_battery() {
  return {flat2(), flat2_center(1), b1(), b2(), b3(), b4()};
}

/** Engine battery plus the non-Darboux chart (geometry-level tests only). */
inline std::vector<ChartGeometry> geometry_battery() {
  auto v = engine_battery();
  v.push_back(curved_form_chart());
  return v;
}

}  // namespace battery
