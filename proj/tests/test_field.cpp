// Exact field arithmetic: canonical moduli, element ops, embeddings, norms,
// minimal polynomials.  Expected values were frozen from independent
// brute-force oracles that are re-run inline here (root-free checks instead of
// Rabin, conjugate products instead of the norm exponent, exhaustive scans for
// least roots).

#include <catch2/catch_amalgamated.hpp>

#include "tkl/field.hpp"
#include "tkl/poly.hpp"

using namespace tkl;

namespace {

// Independent irreducibility oracle for degree <= 3: no roots in the base field.
bool rootfree(const Field* k, const fcoeffs& f) {
  for (std::int64_t r = 0; r < k->q; ++r) {
    fcoeffs x = k->unrank(r);
    fcoeffs acc = k->zero();
    for (std::size_t i = f.size(); i-- > 0;) {
      acc = k->mul(acc, x);
      acc = k->add(acc, k->from_int(f[i]));
    }
    if (k->is_zero(acc)) return false;
  }
  return true;
}

// Least-rank monic irreducible of degree 2 or 3 over F_p, by exhaustive scan.
fcoeffs least_modulus_oracle(std::uint32_t p, std::uint32_t n) {
  const Field* fp = make_field(p, 1);
  std::int64_t total = 1;
  for (std::uint32_t i = 0; i < n; ++i) total *= p;
  for (std::int64_t r = 0; r < total; ++r) {
    fcoeffs f(n + 1, 0);
    std::int64_t v = r;
    for (std::uint32_t i = 0; i < n; ++i) {
      f[i] = static_cast<std::uint32_t>(v % p);
      v /= p;
    }
    f[n] = 1;
    if (rootfree(fp, f)) return f;
  }
  throw std::logic_error("oracle found no irreducible");
}

}  // namespace

TEST_CASE("canonical modulus matches exhaustive oracle") {
  // frozen: F_4 = F_2[z]/(z^2+z+1)
  CHECK(make_field(2, 2)->modulus == fcoeffs{1, 1, 1});
  // frozen: F_9 = F_3[z]/(z^2+1)
  CHECK(make_field(3, 2)->modulus == fcoeffs{1, 0, 1});
  // frozen: F_8 = F_2[z]/(z^3+z+1)
  CHECK(make_field(2, 3)->modulus == fcoeffs{1, 1, 0, 1});
  // and the generic scan agrees with the independent root-free oracle
  CHECK(make_field(2, 2)->modulus == least_modulus_oracle(2, 2));
  CHECK(make_field(3, 2)->modulus == least_modulus_oracle(3, 2));
  CHECK(make_field(5, 2)->modulus == least_modulus_oracle(5, 2));
  CHECK(make_field(2, 3)->modulus == least_modulus_oracle(2, 3));
  CHECK(make_field(3, 3)->modulus == least_modulus_oracle(3, 3));
}

TEST_CASE("field axioms hold exhaustively on small fields") {
  for (const Field* k : {make_field(2, 2), make_field(2, 3), make_field(3, 2)}) {
    for (std::int64_t i = 0; i < k->q; ++i) {
      FieldElem a(k, k->unrank(i));
      CHECK(FieldElem(k, k->unrank(a.rank())) == a);  // rank/unrank roundtrip
      if (!a.is_zero()) {
        CHECK((a * a.inv()).is_one());
        CHECK(a.pow(k->q - 1).is_one());  // Lagrange
      }
      for (std::int64_t j = 0; j < k->q; ++j) {
        FieldElem b(k, k->unrank(j));
        CHECK(a * b == b * a);
        CHECK(a + b == b + a);
        for (std::int64_t l = 0; l < k->q; ++l) {
          FieldElem c(k, k->unrank(l));
          CHECK((a + b) + c == a + (b + c));
          CHECK((a * b) * c == a * (b * c));
          CHECK(a * (b + c) == a * b + a * c);
        }
      }
    }
  }
}

TEST_CASE("square root and Artin-Schreier tables match brute force") {
  const Field* f25 = make_field(5, 2);
  for (std::int64_t r = 0; r < f25->q; ++r) {
    FieldElem a(f25, f25->unrank(r));
    auto s = f25->sqrt(a.coeffs());
    bool any = false;
    FieldElem least = FieldElem::zero(f25);
    for (std::int64_t t = 0; t < f25->q; ++t) {
      FieldElem c(f25, f25->unrank(t));
      if (c * c == a) {
        least = c;
        any = true;
        break;  // ascending scan: first hit is least
      }
    }
    REQUIRE(s.has_value() == any);
    if (any) CHECK(FieldElem(f25, *s) == least);
  }
  const Field* f16 = make_field(2, 4);
  for (std::int64_t r = 0; r < f16->q; ++r) {
    FieldElem a(f16, f16->unrank(r));
    auto s = f16->artin_schreier_root(a.coeffs());
    bool any = false;
    for (std::int64_t t = 0; t < f16->q && !any; ++t) {
      FieldElem c(f16, f16->unrank(t));
      if (c * c + c == a) any = true;
    }
    CHECK(s.has_value() == any);
    if (s) CHECK(FieldElem(f16, *s) * FieldElem(f16, *s) + FieldElem(f16, *s) == a);
  }
}

TEST_CASE("embeddings are homomorphic and pick the least root") {
  const Field* f4 = make_field(2, 2);
  const Field* f16 = make_field(2, 4);
  const Embedding* emb = make_embedding(f4, f16);

  // least root oracle: scan f16 in rank order for the first root of z^2+z+1
  FieldElem expect = FieldElem::zero(f16);
  bool found = false;
  for (std::int64_t r = 0; r < f16->q && !found; ++r) {
    FieldElem x(f16, f16->unrank(r));
    if ((x * x + x + FieldElem::one(f16)).is_zero()) {
      expect = x;
      found = true;
    }
  }
  REQUIRE(found);
  CHECK(emb->root() == expect);

  for (std::int64_t i = 0; i < f4->q; ++i) {
    FieldElem a(f4, f4->unrank(i));
    CHECK(emb->pullback(emb->apply(a)) == a);
    for (std::int64_t j = 0; j < f4->q; ++j) {
      FieldElem b(f4, f4->unrank(j));
      CHECK(emb->apply(a + b) == emb->apply(a) + emb->apply(b));
      CHECK(emb->apply(a * b) == emb->apply(a) * emb->apply(b));
    }
  }

  // subfield membership agrees with the Frobenius fixed-point criterion
  for (std::int64_t r = 0; r < f16->q; ++r) {
    FieldElem w(f16, f16->unrank(r));
    CHECK(emb->in_subfield(w) == (w.pow(f4->q) == w));
    // coordinate split reconstructs the element
    auto co = emb->coords(w);
    REQUIRE(co.size() == 2);
    FieldElem g(f16, f16->unrank(f16->p));  // class of z has rank p
    CHECK(emb->apply(co[0]) + emb->apply(co[1]) * g == w);
  }
}

TEST_CASE("norm to the base field") {
  const Field* f2 = make_field(2, 1);
  const Field* f4 = make_field(2, 2);
  const Embedding* emb = make_embedding(f2, f4);
  // frozen: the F_4 generator has norm 1 to F_2
  FieldElem w(f4, f4->unrank(f4->p));
  CHECK(emb->norm(w) == FieldElem::one(f2));

  // oracle on F_9/F_3: norm equals the product of Frobenius conjugates
  const Field* f3 = make_field(3, 1);
  const Field* f9 = make_field(3, 2);
  const Embedding* e93 = make_embedding(f3, f9);
  for (std::int64_t r = 0; r < f9->q; ++r) {
    FieldElem a(f9, f9->unrank(r));
    FieldElem conj_prod = a * a.pow(3);
    if (a.is_zero()) {
      CHECK(e93->norm(a).is_zero());
    } else {
      CHECK(e93->apply(e93->norm(a)) == conj_prod);
      for (std::int64_t s = 1; s < f9->q; ++s) {
        FieldElem b(f9, f9->unrank(s));
        CHECK(e93->norm(a * b) == e93->norm(a) * e93->norm(b));
      }
    }
  }
}

TEST_CASE("minimal polynomials via Frobenius orbits") {
  const Field* f2 = make_field(2, 1);
  const Field* f4 = make_field(2, 2);
  const Field* f16 = make_field(2, 4);

  // frozen: generator of F_4 over F_2 has minimal polynomial z^2+z+1
  {
    const Embedding* emb = make_embedding(f2, f4);
    Poly m = minimal_polynomial(emb, FieldElem(f4, f4->unrank(f4->p)));
    CHECK(m == Poly::from_ranks(f2, {1, 1, 1}));
  }
  // base-field elements get X - a
  {
    const Embedding* emb = make_embedding(f4, f16);
    for (std::int64_t i = 0; i < f4->q; ++i) {
      FieldElem a(f4, f4->unrank(i));
      Poly m = minimal_polynomial(emb, emb->apply(a));
      CHECK(m == Poly(f4, {-a, FieldElem::one(f4)}));
    }
  }
  // oracle: least monic vanishing polynomial, by exhaustive scan over F_2[x]
  {
    const Embedding* emb = make_embedding(f2, f16);
    for (std::int64_t r = 0; r < f16->q; ++r) {
      FieldElem a(f16, f16->unrank(r));
      Poly m = minimal_polynomial(emb, a);
      CHECK(m.is_monic());
      CHECK(m.eval(a).is_zero());
      CHECK(is_irreducible(m));
      CHECK(4 % m.deg() == 0);
      // nothing of smaller degree vanishes at a
      for (int d = 1; d < m.deg(); ++d) {
        for (std::int64_t mask = 0; mask < (1 << d); ++mask) {
          std::vector<std::int64_t> ranks;
          for (int i = 0; i < d; ++i) ranks.push_back((mask >> i) & 1);
          ranks.push_back(1);
          Poly cand = Poly::from_ranks(f2, ranks);
          CHECK(!cand.eval(a).is_zero());
        }
      }
    }
  }
}
