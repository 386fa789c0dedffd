#include <catch2/catch_amalgamated.hpp>

#include "tkl/divisor.hpp"

using namespace tkl;

namespace {

const Curve* weier(const Field* k, long a1, long a2, long a3, long a4, long a6) {
  auto c = [&](long v) { return FieldElem::from_int(k, v); };
  return Curve::weierstrass(k, {c(a1), c(a2), c(a3), c(a4), c(a6)});
}

Poly random_poly(const Field* k, SplitMix64& rng, int maxdeg) {
  std::vector<FieldElem> c;
  int d = (int)rng.below((std::uint64_t)maxdeg + 1);
  for (int i = 0; i <= d; ++i) c.emplace_back(k, k->unrank((std::int64_t)rng.below(k->q)));
  return Poly(k, std::move(c));
}

FuncElem random_elem(const Curve* C, SplitMix64& rng, int maxdeg) {
  const Field* k = C->field();
  for (;;) {
    Poly a = random_poly(k, rng, maxdeg);
    Poly b = C->model() == Model::Weierstrass ? random_poly(k, rng, maxdeg) : Poly::zero(k);
    Poly c = random_poly(k, rng, maxdeg);
    if (c.is_zero() || (a.is_zero() && b.is_zero())) continue;
    return FuncElem::make(C, a, b, c);
  }
}

}  // namespace

TEST_CASE("parser produces canonical forms") {
  const Field* f2 = make_field(2, 1);
  const Field* f3 = make_field(3, 1);
  const Field* f4 = make_field(2, 2);
  const Curve* line3 = Curve::p1(f3);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);  // y^2 + y = x^3

  FuncElem f = parse_func("x^2+1", line3);
  CHECK(f.num_a() == Poly::from_ranks(f3, {1, 0, 1}));
  CHECK(f.den().is_one());
  CHECK(f.to_string() == "x^2+1");

  FuncElem g = parse_func("(y+x)/x", e2);
  CHECK(g.num_a() == Poly::x(f2));
  CHECK(g.num_b() == Poly::one(f2));
  CHECK(g.den() == Poly::x(f2));
  CHECK(g.to_string() == "(x+y)/x");
  CHECK(parse_func(g.to_string(), e2) == g);

  CHECK_THROWS_AS(parse_func("1/(x-x)", line3), domain_error);
  CHECK_THROWS_AS(parse_func("y", line3), parse_error);
  CHECK_THROWS_AS(parse_func("x+", line3), parse_error);
  CHECK_THROWS_AS(parse_func("(x", line3), parse_error);
  CHECK_THROWS_AS(parse_func("x x", line3), parse_error);
  CHECK_THROWS_AS(parse_func("z", line3), parse_error);

  // the reported position points at the offending token
  try {
    parse_func("x*(y", Curve::p1(f3));
    FAIL("expected a parse error");
  } catch (const parse_error& e) {
    CHECK(e.position() == 3);
  }

  // z is the canonical generator when the coefficient field is an extension
  FuncElem zc = parse_func("z^2", Curve::p1(f4));
  CHECK(zc.is_constant());
  CHECK(zc.constant_value() == FieldElem(f4, f4->unrank(2)).pow(2));

  // unary minus and exponents
  CHECK(parse_func("-x^2", line3) == -parse_func("x", line3).pow(2));
  CHECK(parse_func("x^-1", line3) == parse_func("1/x", line3));
  CHECK(parse_func("2*x+1", line3) == parse_func("x+x+1", line3));
}

TEST_CASE("canonical forms are unique across arithmetic routes") {
  const Field* f2 = make_field(2, 1);
  const Field* f3 = make_field(3, 1);
  const Curve* line3 = Curve::p1(f3);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);

  CHECK(parse_func("(x+1)^2", line3) == parse_func("x^2+2*x+1", line3));
  // y^2 = x^3 - y on this curve (char 2), so (y/x)^2 = (x^3+y)/x^2
  CHECK(parse_func("(y/x)^2", e2) == parse_func("(x^3+y)/x^2", e2));
  // scaling numerator and denominator by a common factor changes nothing
  SplitMix64 rng(17);
  for (int i = 0; i < 60; ++i) {
    FuncElem f = random_elem(e2, rng, 3);
    Poly g = random_poly(f2, rng, 3);
    if (g.is_zero()) continue;
    CHECK(FuncElem::make(e2, f.num_a() * g, f.num_b() * g, f.den() * g) == f);
  }
  // frozen inverse: 1/y = (1+y)/x^3 on y^2 + y = x^3
  CHECK(parse_func("1/y", e2).to_string() == "(1+y)/x^3");

  // field axioms on random elements
  for (const Curve* C : {line3, (const Curve*)e2}) {
    for (int i = 0; i < 50; ++i) {
      FuncElem a = random_elem(C, rng, 3), b = random_elem(C, rng, 3),
               c = random_elem(C, rng, 3);
      CHECK((a + b) * c == a * c + b * c);
      CHECK(a * a.inv() == FuncElem::one(C));
      CHECK((a / b) * b == a);
      CHECK(a.pow(3) == a * a * a);
      CHECK((-a) + a == FuncElem::zero(C));
      CHECK(a.pow(-2) == (a * a).inv());
    }
  }
}

TEST_CASE("valuations and evaluation at places") {
  const Field* f2 = make_field(2, 1);
  const Field* f5 = make_field(5, 1);
  const Curve* line5 = Curve::p1(f5);
  const Curve* line2 = Curve::p1(f2);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);

  Place at_x5 = Place::p1_finite(line5, Poly::x(f5));
  Place inf5 = Place::p1_infinity(line5);

  CHECK(ord_at(parse_func("x^2*(x+1)", line5), at_x5) == 2);
  CHECK(ord_at(parse_func("x", line5), inf5) == -1);
  CHECK(ord_at(parse_func("y+x", e2), place_O(e2)) == -3);

  CHECK(eval_at(parse_func("x+1", line5), at_x5) == FieldElem::one(f5));
  CHECK_THROWS_AS(eval_at(parse_func("x", line5), inf5), domain_error);
  CHECK_THROWS_AS(ord_at(FuncElem::zero(line5), at_x5), domain_error);

  // evaluating x at the degree-2 place (x^2+x+1) of P1/F_2 gives the
  // canonical generator of F_4
  const Field* f4 = make_field(2, 2);
  Place q = Place::p1_finite(line2, Poly::from_ranks(f2, {1, 1, 1}));
  FieldElem alpha = eval_at(parse_func("x", line2), q);
  CHECK(alpha == FieldElem(f4, f4->unrank(2)));
  CHECK(alpha.to_string() == "z");
  CHECK((alpha * alpha + alpha).is_one());  // root of x^2+x+1

  // frozen expansions
  LocalExpansion e1 = local_expand(parse_func("x^2", line5), at_x5, 1);
  CHECK(e1.val == 2);
  CHECK(e1.uniformizer == "x-xbar");
  CHECK(e1.coeffs[0].is_one());
  LocalExpansion e2x = local_expand(parse_func("x", line5), inf5, 1);
  CHECK(e2x.val == -1);
  CHECK(e2x.uniformizer == "1/x");
  CHECK(e2x.coeffs[0].is_one());
  LocalExpansion e3 = local_expand(parse_func("y", e2), place_O(e2), 1);
  CHECK(e3.val == -3);
  CHECK(e3.uniformizer == "x/y");
  CHECK(e3.coeffs[0].is_one());
  CHECK(ord_at(parse_func("x", e2), place_O(e2)) == -2);

  // valuations are stable when precision increases
  for (const auto& fstr : {"y+x", "(y+x^2)/(x^3+x)", "y*x+1"}) {
    FuncElem f = parse_func(fstr, e2);
    for (const Place& P : places_up_to(e2, 2)) {
      CHECK(local_expand(f, P, 1).val == local_expand(f, P, 12).val);
    }
  }
}

TEST_CASE("uniformizers have valuation one") {
  const Field* f2 = make_field(2, 1);
  const Field* f5 = make_field(5, 1);
  const Curve* line2 = Curve::p1(f2);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);
  const Curve* e5 = weier(f5, 0, 0, 0, -1, 0);  // y^2 = x^3 - x

  // P1: the place polynomial itself is a uniformizer
  for (int d = 1; d <= 3; ++d)
    for (const Place& P : enumerate_places(line2, d)) {
      if (P.kind() == PlaceKind::P1Infinity) {
        CHECK(ord_at(parse_func("1/x", line2), P) == 1);
      } else {
        CHECK(ord_at(FuncElem::from_poly(line2, P.pi()), P) == 1);
      }
    }

  // Weierstrass: ord_P(pi(x)) equals the fiber multiplicity from places_above
  for (const Curve* C : {e2, e5})
    for (int d = 1; d <= 2; ++d)
      for (const Poly& pi : irreducibles(C->field(), d))
        for (const auto& [P, e] : places_above(C, pi))
          CHECK(ord_at(FuncElem::from_poly(C, pi), P) == e);

  // ramified point (0,0) of y^2 = x^3 - x: y is the uniformizer there
  Place r = Place::w_affine(e5, f5, FieldElem::zero(f5), FieldElem::zero(f5));
  CHECK(uniformizer_tag(r) == "y-ybar");
  CHECK(ord_at(parse_func("y", e5), r) == 1);
  CHECK(ord_at(parse_func("x", e5), r) == 2);
  // ordinary affine point (2, y) there: x - 2 is the uniformizer
  auto roots = solve_w_quadratic(f5, FieldElem::zero(f5),
                                 parse_func("x^3-x", e5).num_a().eval(FieldElem::from_int(f5, 2)));
  REQUIRE(roots.size() == 2);
  Place s = Place::w_affine(e5, f5, FieldElem::from_int(f5, 2), roots[0]);
  CHECK(uniformizer_tag(s) == "x-xbar");
  CHECK(ord_at(parse_func("x-2", e5), s) == 1);

  // at O: x has a double pole, y a triple pole
  CHECK(ord_at(parse_func("x", e5), place_O(e5)) == -2);
  CHECK(ord_at(parse_func("y", e5), place_O(e5)) == -3);
}

TEST_CASE("ord and eval are multiplicative") {
  const Field* f3 = make_field(3, 1);
  const Field* f2 = make_field(2, 1);
  const Curve* line3 = Curve::p1(f3);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);
  SplitMix64 rng(99);

  for (const Curve* C : {line3, e2}) {
    std::vector<Place> ps = places_up_to(C, 2);
    for (int i = 0; i < 40; ++i) {
      FuncElem f = random_elem(C, rng, 2), g = random_elem(C, rng, 2);
      const Place& P = ps[rng.below(ps.size())];
      long of = ord_at(f, P), og = ord_at(g, P);
      CHECK(ord_at(f * g, P) == of + og);
      if (!(f + g).is_zero()) CHECK(ord_at(f + g, P) >= std::min(of, og));
      if (of >= 0 && og >= 0)
        CHECK(eval_at(f * g, P) == eval_at(f, P) * eval_at(g, P));
    }
  }
}

TEST_CASE("principal divisors") {
  const Field* f2 = make_field(2, 1);
  const Field* f3 = make_field(3, 1);
  const Field* f5 = make_field(5, 1);
  const Curve* line3 = Curve::p1(f3);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);
  const Curve* e5 = weier(f5, 0, 0, 0, -1, 0);

  // (x^2+1)/x on P1/F_3: zero at the irreducible x^2+1, poles at x and infinity
  Divisor d = principal_divisor(parse_func("(x^2+1)/x", line3));
  Divisor expect(line3);
  expect.add(Place::p1_finite(line3, Poly::from_ranks(f3, {1, 0, 1})), 1);
  expect.add(Place::p1_finite(line3, Poly::x(f3)), -1);
  expect.add(Place::p1_infinity(line3), -1);
  CHECK(d == expect);
  CHECK(d.degree() == 0);

  CHECK(principal_divisor(parse_func("2", line3)).is_zero());

  // (y+x) on y^2+y=x^3/F_2: zeros at (0,0) and at the degree-2 place with
  // x = y = a root of x^2+x+1; triple pole at O
  const Field* f4 = make_field(2, 2);
  FieldElem zgen(f4, f4->unrank(2));
  Divisor dyx = principal_divisor(parse_func("y+x", e2));
  Divisor expect2(e2);
  expect2.add(Place::w_affine(e2, f2, FieldElem::zero(f2), FieldElem::zero(f2)), 1);
  expect2.add(Place::w_affine(e2, f4, zgen, zgen), 1);
  expect2.add(place_O(e2), -3);
  CHECK(dyx == expect2);

  // independent zero scan: eval (y+x) at every place of degree <= 2
  for (int deg = 1; deg <= 2; ++deg)
    for (const Place& P : enumerate_places(e2, deg)) {
      if (P.is_O()) continue;
      bool vanishes = eval_at(parse_func("y+x", e2), P).is_zero();
      CHECK(vanishes == (dyx.ord(P) > 0));
    }

  // pullback of a point on the x-line: div(pi(x)) = sum e_i (P_i) - 2 deg(pi) (O)
  for (const Curve* C : {e2, e5})
    for (int deg = 1; deg <= 2; ++deg)
      for (const Poly& pi : irreducibles(C->field(), deg)) {
        Divisor dv = principal_divisor(FuncElem::from_poly(C, pi));
        for (const auto& [P, e] : places_above(C, pi)) CHECK(dv.ord(P) == e);
        CHECK(dv.ord(place_O(C)) == -2 * deg);
        CHECK((long)dv.entries().size() == (long)places_above(C, pi).size() + 1);
      }

  // degree is always zero, and ord_at agrees with the assembled divisor
  SplitMix64 rng(2024);
  for (const Curve* C : {line3, e2, e5}) {
    for (int i = 0; i < 500; ++i) {
      FuncElem f = random_elem(C, rng, 2);
      Divisor dv = principal_divisor(f);
      CHECK(dv.degree() == 0);
      if (i % 25 == 0)
        for (const auto& [P, m] : dv.entries()) CHECK(ord_at(f, P) == m);
    }
  }

  // divisor arithmetic sanity: (fg) = (f) + (g), (1/f) = -(f)
  for (const Curve* C : {line3, e2}) {
    for (int i = 0; i < 30; ++i) {
      FuncElem f = random_elem(C, rng, 2), g = random_elem(C, rng, 2);
      CHECK(principal_divisor(f * g) == principal_divisor(f) + principal_divisor(g));
      CHECK(principal_divisor(f.inv()) == -principal_divisor(f));
    }
  }
}
