#include <catch2/catch_amalgamated.hpp>

#include "tkl/gens.hpp"

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

FuncElem random_nonzero(const Curve* C, SplitMix64& rng, int maxdeg) {
  const Field* k = C->field();
  for (;;) {
    Poly a = random_poly(k, rng, maxdeg);
    Poly b = C->model() == Model::Weierstrass ? random_poly(k, rng, maxdeg) : Poly::zero(k);
    Poly c = random_poly(k, rng, maxdeg);
    if (c.is_zero() || (a.is_zero() && b.is_zero())) continue;
    FuncElem f = FuncElem::make(C, a, b, c);
    if (!f.is_zero()) return f;
  }
}

}  // namespace

TEST_CASE("f_P records") {
  const Field* f2 = make_field(2, 1);
  const Field* f4 = make_field(2, 2);
  const Curve* line2 = Curve::p1(f2);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);

  // genus 0: f_P is the monic irreducible itself and D_P = 0
  Place pq = Place::p1_finite(line2, Poly::from_ranks(f2, {1, 1, 1}));
  const GeneratorRecord& r0 = make_f_P(line2, pq);
  CHECK(r0.fP() == parse_func("x^2+x+1", line2));
  CHECK(r0.DP().is_zero());
  CHECK(r0.fPprime() == FuncElem::one(line2));
  CHECK(r0.DPprime().is_zero());

  // genus 1, the degree-2 place (z, z) on y^2 + y = x^3
  FieldElem z(f4, {0, 1});
  Place p1 = Place::w_affine(e2, f4, z, z);
  const GeneratorRecord& r1 = make_f_P(e2, p1);
  CHECK(r1.fP() == parse_func("(y+x)/x", e2));
  CHECK(r1.DP() == Divisor::single(Place::w_affine(e2, f2, FieldElem::zero(f2),
                                                   FieldElem::one(f2)), 1));
  CHECK(r1.fPprime() == parse_func("x", e2));
  CHECK(r1.DPprime() == Divisor::single(Place::w_affine(e2, f2, FieldElem::zero(f2),
                                                        FieldElem::zero(f2)), 1));

  // the divisor identity (f_P) = (P) - D_P - (d-t)(O), visibly
  CHECK(principal_divisor(r1.fP()) ==
        Divisor::single(p1, 1) - r1.DP() - Divisor::single(place_O(e2), 1));
  CHECK(principal_divisor(r1.fPprime()) ==
        r1.DP() + r1.DPprime() - Divisor::single(place_O(e2), 2));

  // identities hold for every degree up to 4 on both backends
  for (const Curve* C : {line2, e2}) {
    long t = C->genus();
    for (const Place& P : places_up_to(C, 4)) {
      if (P.is_O() || P.degree() < t + 1) continue;
      const GeneratorRecord& r = make_f_P(C, P);
      CHECK(principal_divisor(r.fP()) ==
            Divisor::single(P, 1) - r.DP() -
                Divisor::single(place_O(C), P.degree() - t));
      CHECK(r.DP().degree() == t);
      CHECK(r.DP().is_effective());
      // memoized: the exact same record object comes back
      CHECK(&make_f_P(C, P) == &r);
    }
  }

  CHECK_THROWS_AS(make_f_P(e2, place_O(e2)), domain_error);
  CHECK_THROWS_AS(make_f_P(line2, place_O(line2)), domain_error);
  Place deg1 = Place::w_affine(e2, f2, FieldElem::zero(f2), FieldElem::zero(f2));
  CHECK_THROWS_AS(make_f_P(e2, deg1), domain_error);
}

TEST_CASE("ftilde records") {
  const Field* f2 = make_field(2, 1);
  const Curve* line2 = Curve::p1(f2);
  Divisor Dinf = Divisor::single(place_O(line2), 1);

  Place pq = Place::p1_finite(line2, Poly::from_ranks(f2, {1, 1, 1}));
  const CokerGeneratorRecord& r = make_ftilde_P(line2, Dinf, pq);
  CHECK(r.ftilde() == parse_func("x^2+x+1", line2));
  CHECK(r.n() == 0);
  CHECK(r.m() == -2);
  CHECK(r.DP().is_zero());
  CHECK(r.e() == 1);

  // D = (O) makes ftilde_P coincide with f_P
  const Field* f5 = make_field(5, 1);
  const Curve* e5 = weier(f5, 0, 0, 0, 1, 1);  // y^2 = x^3 + x + 1
  Divisor DO = Divisor::single(place_O(e5), 1);
  for (const Place& P : enumerate_places(e5, 2)) {
    const CokerGeneratorRecord& rc = make_ftilde_P(e5, DO, P);
    const GeneratorRecord& rf = make_f_P(e5, P);
    CHECK(rc.ftilde() == rf.fP());
    CHECK(rc.DP() == rf.DP());
    CHECK(rc.n() == 2);
    CHECK(rc.m() == -1);
  }

  // divisor identity on a degree-2 base divisor
  Divisor D2 = Divisor::single(pq, 1);  // degree 2 on P^1
  for (const Place& P : enumerate_places(line2, 3)) {
    const CokerGeneratorRecord& rc = make_ftilde_P(line2, D2, P);
    CHECK(principal_divisor(rc.ftilde()) ==
          Divisor::single(P, 1) - rc.DP() + rc.D() * rc.m());
    CHECK(rc.DP().degree() < 0 + 2);
    CHECK(rc.DP().is_effective());
  }

  CHECK_THROWS_AS(make_ftilde_P(line2, Dinf, place_O(line2)), domain_error);
  CHECK_THROWS_AS(make_ftilde_P(line2, Divisor(line2), pq), domain_error);
  CHECK_THROWS_AS(make_ftilde_P(line2, -Dinf, pq), domain_error);
  // degree too small: P of degree 1 with t=0, e=2 requires deg >= 2
  Place p0 = Place::p1_finite(line2, Poly::x(f2));
  CHECK_THROWS_AS(make_ftilde_P(line2, D2, p0), domain_error);
}

TEST_CASE("factorization through the f_P") {
  const Field* f2 = make_field(2, 1);
  const Field* f3 = make_field(3, 1);
  const Curve* line2 = Curve::p1(f2);
  const Curve* line3 = Curve::p1(f3);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);

  Factorization fac = factorize(line2, parse_func("x^2+x", line2));
  CHECK(fac.fprime == FuncElem::one(line2));
  REQUIRE(fac.factors.size() == 2);
  CHECK(fac.factors[0].first == Place::p1_finite(line2, Poly::x(f2)));
  CHECK(fac.factors[0].second == 1);
  CHECK(fac.factors[1].first == Place::p1_finite(line2, Poly::from_ranks(f2, {1, 1})));
  CHECK(fac.factors[1].second == 1);

  Factorization fc = factorize(line3, parse_func("2", line3));
  CHECK(fc.fprime == parse_func("2", line3));
  CHECK(fc.factors.empty());

  // y + x on the elliptic curve: one degree-2 factor, remainder x
  Factorization fe = factorize(e2, parse_func("y+x", e2));
  CHECK(fe.fprime == parse_func("x", e2));
  REQUIRE(fe.factors.size() == 1);
  CHECK(fe.factors[0].first.degree() == 2);
  CHECK(fe.factors[0].second == 1);
  CHECK(fe.fprime * make_f_P(e2, fe.factors[0].first).fP() == parse_func("y+x", e2));

  // random reconstruction; the exponents agree with divisor multiplicities
  SplitMix64 rng(505);
  for (const Curve* C : {line2, line3, e2}) {
    long t = C->genus();
    for (int it = 0; it < 25; ++it) {
      FuncElem f = random_nonzero(C, rng, 3);
      Factorization fr = factorize(C, f);
      const Divisor& df = principal_divisor_cached(f);
      for (const auto& [P, m] : fr.factors) {
        CHECK(P.degree() >= t + 1);
        CHECK(df.ord(P) == m);
      }
      if (t == 0) CHECK(fr.fprime.is_constant());
      FuncElem back = fr.fprime;
      for (const auto& [P, m] : fr.factors) back = back * make_f_P(C, P).fP().pow(m);
      CHECK(back == f);
    }
  }
}

TEST_CASE("special sets") {
  const Field* f2 = make_field(2, 1);
  const Field* f4 = make_field(2, 2);
  const Curve* line2 = Curve::p1(f2);
  const Curve* e2 = weier(f2, 0, 0, 1, 0, 0);

  // genus 0: S' = {O}, S is empty, Stilde((inf)) = {inf} with n = 0
  const SpecialSet& sp0 = special_set(line2, SetKind::Sprime);
  REQUIRE(sp0.places().size() == 1);
  CHECK(sp0.places()[0] == place_O(line2));
  CHECK(special_set(line2, SetKind::S).places().empty());
  const SpecialSet& st0 =
      special_set(line2, SetKind::Stilde, Divisor::single(place_O(line2), 1));
  CHECK(st0.n() == 0);
  REQUIRE(st0.places().size() == 1);
  CHECK(st0.places()[0] == place_O(line2));

  // genus 1 over F_2: S' = the degree-1 places plus the inert fiber over
  // x = 1; the two degree-2 places with x outside F_2 are excluded
  FieldElem z(f4, {0, 1});
  FieldElem one4 = FieldElem::one(f4);
  Place inert = Place::w_affine(e2, f4, one4, z);
  Place split1 = Place::w_affine(e2, f4, z, z);
  Place split2 = Place::w_affine(e2, f4, z, z + one4);
  const SpecialSet& sp1 = special_set(e2, SetKind::Sprime);
  CHECK(sp1.places().size() == 4);
  CHECK(sp1.contains(place_O(e2)));
  CHECK(sp1.contains(inert));
  CHECK_FALSE(sp1.contains(split1));
  CHECK_FALSE(sp1.contains(split2));

  // S is exactly C_{<= 2}: both degree-3 places have RR_3((P)) = 0
  const SpecialSet& s1 = special_set(e2, SetKind::S);
  CHECK(s1.places().size() == 6);
  CHECK(s1.contains(split1));
  CHECK(s1.contains(split2));
  for (const Place& P : enumerate_places(e2, 3)) {
    CHECK_FALSE(s1.contains(P));
    CHECK(rr_basis(e2, 3, Divisor::single(P, 1)).dim() == 0);
  }

  // Stilde(E, (O)) over F_2: n = 2, and the membership matches S'
  const SpecialSet& st1 =
      special_set(e2, SetKind::Stilde, Divisor::single(place_O(e2), 1));
  CHECK(st1.n() == 2);
  CHECK(st1.places() == sp1.places());

  // the elliptic description of Stilde((O)): exactly {O} u {P : x(P) in k}
  const Field* f5 = make_field(5, 1);
  const Curve* e5 = weier(f5, 0, 0, 0, 1, 1);
  const SpecialSet& st5 =
      special_set(e5, SetKind::Stilde, Divisor::single(place_O(e5), 1));
  CHECK(st5.n() == 2);
  CHECK(st5.places().size() == 10);
  for (const Place& P : places_up_to(e5, 2)) {
    bool expect = P.is_O();
    if (!expect && P.kind() == PlaceKind::WAffine) {
      const Field* kP = P.residue_field();
      expect = kP == f5 || make_embedding(f5, kP)->in_subfield(P.xbar());
    }
    CHECK(st5.contains(P) == expect);
  }

  // ftilde at places outside Stilde((O)) exists from degree t+e up
  for (const Place& P : enumerate_places(e5, 2))
    if (!st5.contains(P))
      CHECK(make_ftilde_P(e5, Divisor::single(place_O(e5), 1), P).DP().degree() == 1);

  CHECK_THROWS_AS(special_set(e2, SetKind::Stilde), domain_error);
  CHECK_THROWS_AS(special_set(e2, SetKind::Sprime, Divisor::single(place_O(e2), 1)),
                  domain_error);

  // memoization returns the same resolved object
  CHECK(&special_set(e2, SetKind::Sprime) == &sp1);
  CHECK(&special_set(e2, SetKind::Stilde, Divisor::single(place_O(e2), 1)) == &st1);
}
