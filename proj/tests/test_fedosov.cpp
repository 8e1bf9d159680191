#include "fedosov/engine.hpp"

#include "battery.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fedosov;
using testutil::term;

namespace {

FormalFunction series(const std::string& text, int dim, int order) {
  return FormalFunction::from_poly(parse_poly(text, dim), order);
}

}  // namespace

TEST_CASE("flat chart: the recursion fixed point is zero") {
  const FedosovData fd = solve_r(battery::flat2(), Truncation(3));
  CHECK(fd.r.is_zero());
  CHECK(fd.lowest_r_degree == -1);
  CHECK(flatness_check(fd).pass());
}

TEST_CASE("constant connection with zero curvature also gives r = 0") {
  const FedosovData fd = solve_r(battery::b1(), Truncation(2));
  CHECK(fd.rbar.is_zero());
  CHECK(fd.r.is_zero());
  CHECK(flatness_check(fd).pass());
}

TEST_CASE("central two-form: hand-computed slices of r") {
  const std::vector<Rational> cs{Rational(1), Rational(-3)};
  for (const Rational& c : cs) {
    const Truncation t(3);
    const FedosovData fd = solve_r(battery::flat2_center(c), t);
    // First gain: delta_inv(nu c dx1^dx2) = (nu c / 2)(y1 dx2 - y2 dx1).
    const WeylSection slice3 = term(2, t, 1, "1", {1, 0}, {2}) * (c * frac(1, 2)) -
                               term(2, t, 1, "1", {0, 1}, {1}) * (c * frac(1, 2));
    CHECK(fd.r.slice(3) == slice3);
    CHECK(fd.r.slice(4).is_zero());
    // Degree 5 comes from -(1/2)[r3, r3]/nu = (nu^2 c^2 / 2) dx1^dx2.
    const Rational c5 = c * c * frac(1, 8);
    const WeylSection slice5 = term(2, t, 2, "1", {1, 0}, {2}) * c5 -
                               term(2, t, 2, "1", {0, 1}, {1}) * c5;
    CHECK(fd.r.slice(5) == slice5);
    CHECK(fd.lowest_r_degree == 3);
  }
}

TEST_CASE("curved charts: the lowest slice of r is the homotopy image of the curvature") {
  const Truncation t(2);
  SECTION("frozen value on the x2-curved chart") {
    const FedosovData fd = solve_r(battery::b3(), t);
    const WeylSection expected =
        term(2, t, 0, "1/8", {3, 0}, {2}) - term(2, t, 0, "1/8", {2, 1}, {1});
    CHECK(fd.r.slice(3) == expected);
    CHECK(fd.lowest_r_degree == 3);
  }
  SECTION("single recursion step on every curved battery chart") {
    for (const ChartGeometry& g : {battery::b2(), battery::b3(), battery::b4()}) {
      const FedosovData fd = solve_r(g, t);
      REQUIRE_FALSE(fd.rbar.is_zero());
      CHECK(fd.r.slice(3) == (-fd.rbar).delta_inv());
      CHECK(fd.lowest_r_degree == 3);
    }
  }
}

TEST_CASE("solver invariants and flatness across the battery") {
  for (const ChartGeometry& g : battery::engine_battery()) {
    const FedosovData fd = solve_r(g, Truncation(2));
    CHECK(fd.r.delta_inv().is_zero());
    CHECK((fd.lowest_r_degree == -1 || fd.lowest_r_degree >= 2));
    CHECK(flatness_check(fd).pass());
  }
  CHECK(flatness_check(solve_r(battery::b2(), Truncation(3))).pass());
}

TEST_CASE("flatness negative control: corrupting r leaves a residual") {
  const FedosovData fd = solve_r(battery::b3(), Truncation(2));
  const FedosovData bad{fd.geometry, fd.truncation, fd.algebra,  fd.gbar,
                        fd.rbar,     fd.center,     fd.r - fd.r.slice(3), 0};
  const ValidationReport rep = flatness_check(bad);
  CHECK_FALSE(rep.pass());
  REQUIRE(rep.find("r_equation") != nullptr);
  CHECK_FALSE(rep.find("r_equation")->pass);
}

TEST_CASE("solve_r rejects invalid geometry") {
  Matrix w = testutil::standard_omega(2);
  w[0][1] = parse_poly("x1", 2);  // breaks the inverse pairing with lambda
  Tensor3 gamma = make_tensor3(2);
  const ChartGeometry g(std::move(w), testutil::standard_lambda(2), std::move(gamma));
  CHECK_THROWS_AS(solve_r(g, Truncation(1)), std::invalid_argument);
}

TEST_CASE("flat sections are Taylor lifts on the flat chart") {
  const Truncation t(2);
  const FedosovData fd = solve_r(battery::flat2(), t);
  SECTION("frozen small cases") {
    const FormalFunction one = series("1", 2, 2);
    CHECK(flat_section(fd, one) == WeylSection::embed(one, t));
    const WeylSection qx1 = flat_section(fd, series("x1", 2, 2));
    CHECK(qx1 == term(2, t, 0, "x1", {0, 0}) + term(2, t, 0, "1", {1, 0}));
  }
  SECTION("random series match the Taylor oracle") {
    std::mt19937 rng(911u);
    for (int trial = 0; trial < 4; ++trial) {
      const FormalFunction f = testutil::random_series(rng, 2, 2);
      const WeylSection q = flat_section(fd, f);
      CHECK(q == testutil::taylor_section(f, t));
      CHECK(q.scalar_part() == f);
    }
  }
}

TEST_CASE("flat sections are covariantly constant within truncation") {
  std::mt19937 rng(912u);
  for (const ChartGeometry& g : {battery::b2(), battery::b4()}) {
    const Truncation t(2);
    const FedosovData fd = solve_r(g, t);
    for (int trial = 0; trial < 3; ++trial) {
      const FormalFunction f = testutil::random_series(rng, g.dim, 2, 3, 2);
      const WeylSection q = flat_section(fd, f);
      CHECK(q.scalar_part() == f);
      CHECK(testutil::vanishes_through(fedosov_d(fd, q), t.degree_cap - 1));
    }
  }
}

TEST_CASE("flat-chart star product equals the closed-form expansion") {
  const int order = 4;
  const Truncation t(order);
  const FedosovData fd = solve_r(battery::flat2(), t);
  const Matrix lambda = testutil::standard_lambda(2);
  SECTION("frozen products") {
    const FormalFunction x1 = series("x1", 2, order);
    const FormalFunction x2 = series("x2", 2, order);
    FormalFunction expected = series("x1*x2", 2, order);
    expected.at(1) = parse_poly("-1/2", 2);
    CHECK(star_multiply(fd, x1, x2) == expected);

    const FormalFunction u = series("x1^2", 2, order);
    const FormalFunction v = series("x2^2", 2, order);
    const FormalFunction comm = star_multiply(fd, u, v) - star_multiply(fd, v, u);
    FormalFunction expected_comm(2, order);
    expected_comm.at(1) = parse_poly("-4*x1*x2", 2);
    CHECK(comm == expected_comm);
  }
  SECTION("random pairs against the Moyal oracle") {
    std::mt19937 rng(913u);
    for (int trial = 0; trial < 6; ++trial) {
      const FormalFunction u = testutil::random_series(rng, 2, order);
      const FormalFunction v = testutil::random_series(rng, 2, order);
      CHECK(star_multiply(fd, u, v) == testutil::moyal_product(lambda, u, v));
    }
  }
}

TEST_CASE("the unit is two-sided on a curved chart") {
  const FedosovData fd = solve_r(battery::b2(), Truncation(3));
  const FormalFunction one = series("1", 2, 3);
  std::mt19937 rng(914u);
  for (int trial = 0; trial < 3; ++trial) {
    const FormalFunction u = testutil::random_series(rng, 2, 3);
    CHECK(star_multiply(fd, one, u) == u);
    CHECK(star_multiply(fd, u, one) == u);
  }
}

TEST_CASE("associativity on the battery") {
  std::mt19937 rng(915u);
  for (const ChartGeometry& g : {battery::flat2(), battery::b1(), battery::b2(),
                                 battery::b3()}) {
    const FedosovData fd = solve_r(g, Truncation(3));
    std::vector<std::array<FormalFunction, 3>> triples;
    for (int i = 0; i < 2; ++i)
      triples.push_back({testutil::random_series(rng, 2, 3),
                         testutil::random_series(rng, 2, 3),
                         testutil::random_series(rng, 2, 3)});
    CHECK(check_associativity(fd, triples).pass());
  }
  const FedosovData fd4 = solve_r(battery::b4(), Truncation(2));
  std::vector<std::array<FormalFunction, 3>> triples;
  triples.push_back({testutil::random_series(rng, 4, 2, 3, 2),
                     testutil::random_series(rng, 4, 2, 3, 2),
                     testutil::random_series(rng, 4, 2, 3, 2)});
  CHECK(check_associativity(fd4, triples).pass());
}

TEST_CASE("extracted cochain tables on the flat chart") {
  const Truncation t(2);
  const FedosovData fd = solve_r(battery::flat2(), t);
  const StarProduct s = extract_cochains(fd, 2);
  CHECK(s.at(0) == multiplication_table(2));
  CHECK(s.at(1) == poisson_table(testutil::standard_lambda(2)) * frac(1, 2));
  CHECK(s.at(2) == second_order_reference(testutil::standard_lambda(2), make_tensor3(2)));
  const Monomial x1 = Monomial::variable(0), x2 = Monomial::variable(1);
  CHECK(s.at(1).coeff(x1, x2) == parse_poly("-1/2", 2));
  CHECK(s.at(1).coeff(x2, x1) == parse_poly("1/2", 2));
  CHECK(s.at(2).coeff(x1 * x1, x2 * x2) == parse_poly("1/8", 2));
  CHECK(s.at(2).coeff(x1 * x2, x1 * x2) == parse_poly("-1/4", 2));
  CHECK(naturality_check(s).pass());
}

TEST_CASE("cochain tables reproduce the product on curved charts") {
  std::mt19937 rng(916u);
  const FedosovData fd = solve_r(battery::b3(), Truncation(3));
  const StarProduct s = extract_cochains(fd, 3);
  CHECK(naturality_check(s).pass());
  CHECK(s.at(1) == poisson_table(testutil::standard_lambda(2)) * frac(1, 2));
  for (int trial = 0; trial < 20; ++trial) {
    const FormalFunction u = testutil::random_series(rng, 2, 3);
    const FormalFunction v = testutil::random_series(rng, 2, 3);
    CHECK(s.multiply(u, v) == star_multiply(fd, u, v));
  }
}

TEST_CASE("truncation stability: a deeper cap retains the same cochains") {
  for (const ChartGeometry& g : {battery::b2(), battery::flat2_center(1)}) {
    const int order = 2;
    const FedosovData fd = solve_r(g, Truncation(order));
    const FedosovData deep = solve_r(g, Truncation(order, 2 * order + 4));
    CHECK(extract_cochains(fd, order) == extract_cochains(deep, order));
  }
}

TEST_CASE("extraction detects an undersized probe basis") {
  const FedosovData fd = solve_r(battery::b2(), Truncation(3));
  CHECK_THROWS_AS(extract_cochains(fd, 1), std::runtime_error);
}

TEST_CASE("negative control: a non-Poisson bivector breaks associativity at nu^2") {
  Matrix bad = make_matrix(4);
  bad[0][1] = Poly(4, 1);
  bad[1][0] = Poly(4, -1);
  bad[2][3] = parse_poly("x1", 4);
  bad[3][2] = parse_poly("-x1", 4);
  StarProduct s(4, 2);
  s.at(0) = multiplication_table(4);
  s.at(1) = poisson_table(bad);
  const FormalFunction x2 = series("x2", 4, 2);
  const FormalFunction x3 = series("x3", 4, 2);
  const FormalFunction x4 = series("x4", 4, 2);
  const FormalFunction assoc =
      s.multiply(s.multiply(x2, x3), x4) - s.multiply(x2, s.multiply(x3, x4));
  CHECK(assoc.at(0).is_zero());
  CHECK(assoc.at(1).is_zero());
  CHECK(assoc.at(2) == Poly(4, 1));
  CHECK_FALSE(check_associativity(s, {{x2, x3, x4}}).pass());
}

TEST_CASE("negative control: a second-order C_1 already fails at nu^1") {
  StarProduct s(2, 2);
  s.at(0) = multiplication_table(2);
  BidiffOperator c1(2);
  c1.add(Monomial::variable(0) * Monomial::variable(0), Monomial::variable(1), Poly(2, 1));
  s.at(1) = c1;
  const FormalFunction x1 = series("x1", 2, 2);
  const FormalFunction x2 = series("x2", 2, 2);
  const FormalFunction assoc =
      s.multiply(s.multiply(x1, x1), x2) - s.multiply(x1, s.multiply(x1, x2));
  CHECK(assoc.at(1) == Poly(2, 2));
}
