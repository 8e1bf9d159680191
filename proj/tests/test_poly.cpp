#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fedosov/formal.hpp"
#include "fedosov/parse.hpp"
#include "fedosov/poly.hpp"

using namespace fedosov;

namespace {

Poly P(const std::string& text, int dim = 4) { return parse_poly(text, dim); }

/** Deterministic small random polynomial (explicit modulo keeps it portable). */
Poly random_poly(std::mt19937& rng, int dim, int max_terms = 6) {
  Poly p(dim);
  const int terms = static_cast<int>(rng() % static_cast<unsigned>(max_terms + 1));
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    for (int v = 0; v < dim; ++v) m = m.times_var(v, rng() % 4);
    const long num = static_cast<long>(rng() % 11) - 5;
    const long den = static_cast<long>(rng() % 3) + 1;
    p.add_term(m, frac(num, den));
  }
  return p;
}

}  // namespace

TEST_CASE("rational parsing and printing") {
  REQUIRE(parse_rational("3/6") == Rational(1, 2));
  REQUIRE(parse_rational("-4/2") == Rational(-2));
  REQUIRE(to_string(parse_rational("3/6")) == "1/2");
  REQUIRE(to_string(Rational(7)) == "7");
  REQUIRE_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_rational("1.5"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_rational(" 1"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_rational("1/-2"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_rational(""), std::invalid_argument);
}

TEST_CASE("monomial order is graded-lex") {
  const Monomial one;
  const Monomial x1 = Monomial::variable(0);
  const Monomial x2 = Monomial::variable(1);
  REQUIRE(one < x2);
  REQUIRE(x2 < x1);                 // same degree: lex with x1 dominant
  REQUIRE(x1 < x2 * x2);            // degree beats lex
  REQUIRE(x1 * x2 < x1 * x1);
  REQUIRE((x1 * x2).to_string() == "x1*x2");
  REQUIRE((x1 * x1 * x2).degree() == 3);
}

TEST_CASE("monomial limits are enforced") {
  REQUIRE_THROWS_AS(Monomial::variable(8), std::invalid_argument);
  Monomial big = Monomial().times_var(0, 255);
  REQUIRE_THROWS_AS(big.times_var(0, 1), std::overflow_error);
  REQUIRE_THROWS_AS(Poly::variable(9, 0), std::invalid_argument);
}

TEST_CASE("parsing hits the documented shapes") {
  const Poly p = P("x1*x2 + 1/2");
  REQUIRE(p.terms().size() == 2);
  REQUIRE(p.coeff(Monomial::variable(0) * Monomial::variable(1)) == 1);
  REQUIRE(p.coeff(Monomial()) == Rational(1, 2));

  // (x1+x2)^2 against a repeated-multiplication oracle.
  const Poly s = P("x1") + P("x2");
  REQUIRE(P("(x1+x2)^2") == s * s);
  REQUIRE(P("(x1+x2)^2") == P("x1^2 + 2*x1*x2 + x2^2"));

  REQUIRE(P("-x1 - 2") == -(P("x1") + P("2")));
  REQUIRE(P("2^3") == P("8"));
  REQUIRE(P(" ( x1 + 1/3 ) * x2 ") == P("x1*x2 + 1/3*x2"));
}

TEST_CASE("parse errors carry positions") {
  const auto pos = [](const std::string& text) {
    try {
      parse_poly(text, 4);
    } catch (const ParseError& e) {
      return e.position;
    }
    return std::size_t{0};
  };
  REQUIRE(pos("x1^-2") == 4);        // exponent must be nonnegative
  REQUIRE(pos("x9") == 1);           // outside the chart
  REQUIRE(pos("2x1") == 2);          // missing '*'
  REQUIRE(pos("x1 +") == 5);         // dangling operator
  REQUIRE(pos("(x1") == 4);          // unbalanced parenthesis
  REQUIRE(pos("x1/3") == 3);         // '/' only inside coefficients
  REQUIRE(pos("1/0") == 3);          // zero denominator
  REQUIRE_THROWS_AS(parse_poly("x1^-2", 4), ParseError);
}

TEST_CASE("printing is canonical and round-trips") {
  REQUIRE(P("1/2 + x1*x2").to_string() == "x1*x2 + 1/2");
  REQUIRE(P("x2^2 + x1^2 - x1*x2").to_string() == "x1^2 - x1*x2 + x2^2");
  REQUIRE(P("0").to_string() == "0");
  REQUIRE(P("x1 - x1").to_string() == "0");
  REQUIRE(P("2*x3^4").to_string() == "2*x3^4");
  REQUIRE(P("-x1 + 0*x2").to_string() == "-x1");

  std::mt19937 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const Poly p = random_poly(rng, 4);
    REQUIRE(parse_poly(p.to_string(), 4) == p);
  }
}

TEST_CASE("ring axioms on random polynomials") {
  std::mt19937 rng(7);
  for (int i = 0; i < 30; ++i) {
    const Poly a = random_poly(rng, 3), b = random_poly(rng, 3), c = random_poly(rng, 3);
    REQUIRE(a + b == b + a);
    REQUIRE(a * b == b * a);
    REQUIRE((a + b) * c == a * c + b * c);
    REQUIRE((a * b) * c == a * (b * c));
    REQUIRE(a - a == Poly(3));
  }
}

TEST_CASE("partial derivatives commute and satisfy Leibniz") {
  std::mt19937 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Poly a = random_poly(rng, 3), b = random_poly(rng, 3);
    REQUIRE(a.partial(0).partial(1) == a.partial(1).partial(0));
    REQUIRE((a * b).partial(2) == a.partial(2) * b + a * b.partial(2));
  }
  REQUIRE(P("x1^2*x2").partial(0) == P("2*x1*x2"));
  REQUIRE(P("x1^2*x2").partial(Monomial::variable(0) * Monomial::variable(1)) == P("2*x1"));
}

TEST_CASE("compose substitutes polynomials for variables") {
  const Poly p = parse_poly("x1^2 + x2", 2);
  const std::vector<Poly> subs = {P("x3 + 1"), P("x1*x4")};
  REQUIRE(p.compose(subs) == P("x3^2 + 2*x3 + 1 + x1*x4"));
  REQUIRE_THROWS_AS(p.compose({P("x1")}), std::invalid_argument);
}

TEST_CASE("radial homotopy integral divides by degree plus weight plus one") {
  // Integral over t in [0,1] of (t x1)(t x2) t^w dt: 1/4 for w=1, 1/3 for w=0.
  REQUIRE(P("x1*x2").radial_homotopy_integral(1) == P("1/4*x1*x2"));
  REQUIRE(P("x1*x2").radial_homotopy_integral(0) == P("1/3*x1*x2"));
  REQUIRE(P("5").radial_homotopy_integral(0) == P("5"));

  // Reconstructing a potential from its gradient: lambda(x) = sum_j x^j
  // integral of (d_j f)(t x) dt recovers f when f(0) = 0.
  std::mt19937 rng(23);
  for (int i = 0; i < 20; ++i) {
    Poly f = random_poly(rng, 4);
    f.add_term(Monomial(), -f.coeff(Monomial()));  // drop the constant term
    Poly rebuilt(4);
    for (int j = 0; j < 4; ++j)
      rebuilt += Poly::variable(4, j) * f.partial(j).radial_homotopy_integral(0);
    REQUIRE(rebuilt == f);
  }
}

TEST_CASE("formal series arithmetic truncates at the order") {
  FormalFunction f = FormalFunction::from_poly(P("x1"), 2);
  f.at(1) = P("1");
  FormalFunction g = FormalFunction::from_poly(P("x2"), 2);
  g.at(2) = P("x1");

  const FormalFunction prod = f * g;
  REQUIRE(prod.at(0) == P("x1*x2"));
  REQUIRE(prod.at(1) == P("x2"));
  REQUIRE(prod.at(2) == P("x1^2"));  // nu^3 term x1 from f.at(1)*g.at(2) dropped

  REQUIRE(f.shifted(1).at(1) == P("x1"));
  REQUIRE(f.shifted(1).at(2) == P("1"));
  REQUIRE((f - f).is_zero());
  REQUIRE(f.to_string() == "x1 + nu*(1)");
  REQUIRE(FormalFunction(2, 3).to_string() == "0");
  REQUIRE_THROWS_AS(f + FormalFunction(4, 3), std::invalid_argument);
}
