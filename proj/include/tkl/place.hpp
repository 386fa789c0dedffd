#pragma once
// Closed points (places) of a curve, with canonical representatives.
//
// A place is identified by:
//   projective line:  "inf", or a monic irreducible polynomial pi(x) over k;
//   Weierstrass:      "O", or the Frobenius-orbit of an affine point (xbar,
//                     ybar) with coordinates in the canonical residue field,
//                     represented by the orbit element least under the
//                     (rank(x), rank(y)) order.
//
// The canonical order on places sorts by (degree, kind, encoding), where the
// affine/finite kind precedes the point at infinity / O inside... see cmp_key.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "tkl/curve.hpp"

namespace tkl {

enum class PlaceKind { P1Finite, P1Infinity, WO, WAffine };

namespace detail {
struct PlaceData {
  const Curve* curve;
  PlaceKind kind;
  int degree;
  const Field* resfield;   // k(P), the canonical field of order q^degree
  const Embedding* emb;    // k -> k(P)
  Poly pi;                 // P1Finite: the defining irreducible; WAffine: min poly of xbar
  FieldElem xbar, ybar;    // coordinates in k(P) (ybar unused for P1Finite)
};
}  // namespace detail

class Place {
 public:
  Place() = default;

  const Curve* curve() const { return d_->curve; }
  PlaceKind kind() const { return d_->kind; }
  int degree() const { return d_->degree; }
  const Field* residue_field() const { return d_->resfield; }
  const Embedding* embedding() const { return d_->emb; }
  const Poly& pi() const { return d_->pi; }
  const FieldElem& xbar() const { return d_->xbar; }
  const FieldElem& ybar() const { return d_->ybar; }

  // the distinguished rational base point (infinity on P1, O on Weierstrass)
  bool is_O() const { return d_->kind == PlaceKind::P1Infinity || d_->kind == PlaceKind::WO; }

  std::string to_string() const {
    switch (d_->kind) {
      case PlaceKind::P1Infinity: return "inf";
      case PlaceKind::P1Finite: return d_->pi.to_string("x");
      case PlaceKind::WO: return "O";
      case PlaceKind::WAffine: {
        std::string xs = d_->xbar.to_string(), ys = d_->ybar.to_string();
        if (d_->resfield == d_->curve->field() ||
            d_->resfield->q == (uint64_t)d_->resfield->p)
          return "(" + xs + "," + ys + ")";
        const Field* pf = make_field(d_->resfield->p, 1);
        std::vector<long> mc(d_->resfield->modulus.begin(), d_->resfield->modulus.end());
        Poly mod = Poly::from_ranks(pf, mc);
        return "(" + mod.to_string("z") + ";x=" + xs + ";y=" + ys + ")";
      }
    }
    TKL_ASSERT(false, "unreachable place kind");
    return "";
  }

  friend bool operator==(const Place& a, const Place& b) {
    if (a.d_ == b.d_) return true;
    return a.d_->curve == b.d_->curve && a.d_->kind == b.d_->kind &&
           a.d_->degree == b.d_->degree && a.d_->pi == b.d_->pi &&
           a.d_->xbar == b.d_->xbar && a.d_->ybar == b.d_->ybar;
  }
  friend bool operator!=(const Place& a, const Place& b) { return !(a == b); }
  friend bool operator<(const Place& a, const Place& b) {
    TKL_ASSERT(a.d_->curve == b.d_->curve, "comparing places on different curves");
    if (a.d_->degree != b.d_->degree) return a.d_->degree < b.d_->degree;
    int ra = a.kind_rank(), rb = b.kind_rank();
    if (ra != rb) return ra < rb;
    switch (a.d_->kind) {
      case PlaceKind::P1Finite: return a.d_->pi < b.d_->pi;
      case PlaceKind::WAffine:
        if (a.d_->xbar != b.d_->xbar) return a.d_->xbar < b.d_->xbar;
        return a.d_->ybar < b.d_->ybar;
      default: return false;  // inf / O are unique per degree-kind
    }
  }

  static Place p1_infinity(const Curve* C);
  static Place p1_finite(const Curve* C, const Poly& pi);
  static Place w_O(const Curve* C);
  // canonicalizes (x, y) in K^2 on the curve to its orbit representative;
  // the resulting place degree is the Frobenius orbit size
  static Place w_affine(const Curve* C, const Field* K, const FieldElem& x, const FieldElem& y);

 private:
  int kind_rank() const {
    // finite/affine places sort before the point at infinity within P1 degree 1;
    // O sorts before affine Weierstrass places
    switch (d_->kind) {
      case PlaceKind::P1Finite: return 0;
      case PlaceKind::P1Infinity: return 1;
      case PlaceKind::WO: return 0;
      case PlaceKind::WAffine: return 1;
    }
    return 2;
  }
  explicit Place(std::shared_ptr<const detail::PlaceData> d) : d_(std::move(d)) {}
  std::shared_ptr<const detail::PlaceData> d_;
};

inline Place place_O(const Curve* C) {
  return C->model() == Model::P1 ? Place::p1_infinity(C) : Place::w_O(C);
}

inline Place Place::p1_infinity(const Curve* C) {
  TKL_ASSERT(C->model() == Model::P1, "infinity place on a non-P1 curve");
  const Field* k = C->field();
  auto d = std::make_shared<detail::PlaceData>(detail::PlaceData{
      C, PlaceKind::P1Infinity, 1, k, make_embedding(k, k), Poly::x(k),
      FieldElem::zero(k), FieldElem::zero(k)});
  return Place(std::move(d));
}

inline Place Place::p1_finite(const Curve* C, const Poly& pi) {
  TKL_ASSERT(C->model() == Model::P1, "finite P1 place on a non-P1 curve");
  const Field* k = C->field();
  TKL_REQUIRE(pi.field() == k && pi.deg() >= 1 && pi.is_monic() && is_irreducible(pi),
              "P1 place requires a monic irreducible polynomial over the base field");
  int deg = (int)pi.deg();
  const Field* K = make_field(k->p, k->n * deg);
  const Embedding* emb = make_embedding(k, K);
  // canonical coordinate: the least root of pi in k(P)
  std::optional<FieldElem> root;
  for (uint64_t r = 0; r < K->q && !root; ++r) {
    FieldElem c(K, K->unrank(r));
    if (pi.eval(c).is_zero()) root = c;
  }
  TKL_ASSERT(root.has_value(), "irreducible polynomial has no root in its splitting degree");
  auto d = std::make_shared<detail::PlaceData>(detail::PlaceData{
      C, PlaceKind::P1Finite, deg, K, emb, pi, *root, FieldElem::zero(K)});
  return Place(std::move(d));
}

inline Place Place::w_O(const Curve* C) {
  TKL_ASSERT(C->model() == Model::Weierstrass, "O place on a non-Weierstrass curve");
  const Field* k = C->field();
  auto d = std::make_shared<detail::PlaceData>(detail::PlaceData{
      C, PlaceKind::WO, 1, k, make_embedding(k, k), Poly::x(k),
      FieldElem::zero(k), FieldElem::zero(k)});
  return Place(std::move(d));
}

inline Place Place::w_affine(const Curve* C, const Field* K, const FieldElem& x,
                             const FieldElem& y) {
  TKL_ASSERT(C->model() == Model::Weierstrass, "affine Weierstrass place on a P1 curve");
  const Field* k = C->field();
  TKL_ASSERT(K->p == k->p && K->n % k->n == 0, "coordinate field is not an extension of k");
  // the point must lie on the curve
  {
    FieldElem A = C->polyA().eval(x), R = C->polyR().eval(x);
    TKL_ASSERT((y * y + A * y - R).is_zero(), "point does not satisfy the curve equation");
  }
  // Frobenius orbit under a -> a^q
  std::vector<std::pair<FieldElem, FieldElem>> orbit;
  FieldElem cx = x, cy = y;
  do {
    orbit.emplace_back(cx, cy);
    cx = cx.pow(k->q);
    cy = cy.pow(k->q);
  } while (!(cx == x && cy == y));
  int m = (int)orbit.size();

  // move to the canonical residue field of exactly the right size
  const Field* R = make_field(k->p, k->n * m);
  std::vector<std::pair<FieldElem, FieldElem>> canon;
  if (R == K) {
    canon = orbit;
  } else {
    const Embedding* lift = make_embedding(R, K);
    for (const auto& [ox, oy] : orbit)
      canon.emplace_back(lift->pullback(ox), lift->pullback(oy));
  }
  auto best = *std::min_element(canon.begin(), canon.end());
  auto d = std::make_shared<detail::PlaceData>(detail::PlaceData{
      C, PlaceKind::WAffine, m, R, make_embedding(k, R),
      minimal_polynomial(make_embedding(k, R), best.first), best.first, best.second});
  return Place(std::move(d));
}

// roots in K of y^2 + A y - R = 0, sorted by rank (0, 1, or 2 of them)
inline std::vector<FieldElem> solve_w_quadratic(const Field* K, const FieldElem& A,
                                                const FieldElem& R) {
  std::vector<FieldElem> roots;
  if (K->p == 2) {
    if (A.is_zero()) {
      // squaring is a bijection in characteristic 2
      roots.push_back(*sqrt_of(R));
    } else {
      // y = A z turns the equation into z^2 + z = R / A^2
      FieldElem c = R * (A * A).inv();
      if (auto z = artin_schreier_root_of(c)) {
        roots.push_back(A * *z);
        roots.push_back(A * (*z + FieldElem::one(K)));
      }
    }
  } else {
    // y = (-A ± s)/2 with s^2 = A^2 + 4R
    FieldElem D = A * A + FieldElem::from_int(K, 4) * R;
    FieldElem half = FieldElem::from_int(K, 2).inv();
    if (D.is_zero()) {
      roots.push_back(-A * half);
    } else if (auto s = sqrt_of(D)) {
      roots.push_back((-A + *s) * half);
      roots.push_back((-A - *s) * half);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// all places of degree exactly d, in canonical order (cached per curve)
inline const std::vector<Place>& enumerate_places(const Curve* C, int d) {
  TKL_REQUIRE(d >= 1, "place degree must be at least 1");
  auto& cache = C->caches().slot<cached_map<int, std::shared_ptr<const std::vector<Place>>>>(
      "places_by_degree");
  if (auto hit = cache.find(d)) return **hit;

  const Field* k = C->field();
  std::vector<Place> out;
  if (C->model() == Model::P1) {
    for (const Poly& pi : irreducibles(k, d)) out.push_back(Place::p1_finite(C, pi));
    if (d == 1) out.push_back(Place::p1_infinity(C));
  } else {
    const Field* K = make_field(k->p, k->n * d);
    Poly PA = C->polyA(), PR = C->polyR();
    for (uint64_t r = 0; r < K->q; ++r) {
      FieldElem x(K, K->unrank(r));
      FieldElem A = PA.eval(x), R = PR.eval(x);
      for (const FieldElem& y : solve_w_quadratic(K, A, R)) {
        Place P = Place::w_affine(C, K, x, y);
        if (P.degree() == d) out.push_back(P);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (d == 1) out.insert(out.begin(), Place::w_O(C));
  }
  auto stored = cache.store(d, std::make_shared<const std::vector<Place>>(std::move(out)));
  return *stored;
}

inline std::vector<Place> places_up_to(const Curve* C, int dmax) {
  std::vector<Place> out;
  for (int d = 1; d <= dmax; ++d) {
    const auto& v = enumerate_places(C, d);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// the places of C over the finite place pi(x) of the x-line, with the
// multiplicity ord_P(pi(x)); covers the split / ramified / inert trichotomy
inline std::vector<std::pair<Place, int>> places_above(const Curve* C, const Poly& pi) {
  const Field* k = C->field();
  TKL_REQUIRE(pi.field() == k && pi.deg() >= 1 && pi.is_monic() && is_irreducible(pi),
              "places_above requires a monic irreducible over the base field");
  if (C->model() == Model::P1) return {{Place::p1_finite(C, pi), 1}};

  auto& cache =
      C->caches().slot<cached_map<Poly, std::vector<std::pair<Place, int>>>>("places_above");
  if (auto hit = cache.find(pi)) return *hit;

  int m = (int)pi.deg();
  const Field* K = make_field(k->p, k->n * m);
  std::optional<FieldElem> xbar;
  for (uint64_t r = 0; r < K->q && !xbar; ++r) {
    FieldElem c(K, K->unrank(r));
    if (pi.eval(c).is_zero()) xbar = c;
  }
  TKL_ASSERT(xbar.has_value(), "irreducible polynomial has no root in its splitting degree");

  FieldElem A = C->polyA().eval(*xbar), R = C->polyR().eval(*xbar);
  std::vector<FieldElem> roots = solve_w_quadratic(K, A, R);
  std::vector<std::pair<Place, int>> out;
  if (roots.size() == 2) {
    for (const FieldElem& y : roots) {
      Place P = Place::w_affine(C, K, *xbar, y);
      TKL_ASSERT(P.degree() == m, "split place has unexpected degree");
      out.emplace_back(P, 1);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              out.end());
    // a split pair can coincide only if the quadratic was in fact degenerate
    TKL_ASSERT(out.size() == 2, "distinct quadratic roots produced one place");
  } else if (roots.size() == 1) {
    bool ramified = (k->p == 2) ? A.is_zero() : true;  // odd p reaches here only when D = 0
    Place P = Place::w_affine(C, K, *xbar, roots[0]);
    TKL_ASSERT(P.degree() == m, "ramified place has unexpected degree");
    out.emplace_back(P, ramified ? 2 : 1);
    TKL_ASSERT(ramified, "single-root case must be ramified");
  } else {
    // inert: the two conjugate points over xbar live in the quadratic extension
    const Field* L = make_field(k->p, 2 * k->n * m);
    const Embedding* liftKL = make_embedding(K, L);
    FieldElem xL = liftKL->apply(*xbar);
    FieldElem AL = C->polyA().eval(xL), RL = C->polyR().eval(xL);
    std::vector<FieldElem> rootsL = solve_w_quadratic(L, AL, RL);
    TKL_ASSERT(!rootsL.empty(), "inert fiber has no point over the quadratic extension");
    Place P = Place::w_affine(C, L, xL, rootsL[0]);
    TKL_ASSERT(P.degree() == 2 * m, "inert place has unexpected degree");
    out.emplace_back(P, 1);
  }
  return cache.store(pi, out);
}

}  // namespace tkl
