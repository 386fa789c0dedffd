#pragma once
// Local expansions of function-field elements at a place, realizing ord_P,
// evaluation, and leading coefficients.
//
// The canonical uniformizer per place kind:
//   P1 finite place          u = x - xbar   (coefficients in k(P))
//   P1 infinity              u = 1/x
//   Weierstrass affine       u = x - xbar   when dE/dy = 2 ybar + A(xbar) != 0,
//                            u = y - ybar   otherwise,
//   Weierstrass O            u = x/y.
//
// Expansions of the coordinate functions are produced by Newton iteration on
// the curve equation and cached per (place, precision).  Valuations are found
// by lazy precision doubling, with an a-priori pole/zero budget guaranteeing
// termination on nonzero input.

#include "tkl/func.hpp"
#include "tkl/place.hpp"
#include "tkl/series.hpp"

namespace tkl {

struct LocalFrame {
  Place P;
  long prec = 0;
  Series sx, sy;  // sy meaningful only on Weierstrass curves

  LocalFrame() = default;
  LocalFrame(Place p, long m, Series x, Series y)
      : P(std::move(p)), prec(m), sx(std::move(x)), sy(std::move(y)) {}
};

inline std::string uniformizer_tag(const Place& P) {
  switch (P.kind()) {
    case PlaceKind::P1Finite: return "x-xbar";
    case PlaceKind::P1Infinity: return "1/x";
    case PlaceKind::WO: return "x/y";
    case PlaceKind::WAffine: {
      const Curve* C = P.curve();
      FieldElem dy = FieldElem::from_int(P.residue_field(), 2) * P.ybar() +
                     C->polyA().eval(P.xbar());
      return dy.is_zero() ? "y-ybar" : "x-xbar";
    }
  }
  return "";
}

namespace detail {

// g evaluated on a series argument, coefficients embedded into k(P)
inline Series eval_poly_series(const Poly& g, const Series& sx) {
  const Field* K = sx.field();
  Series acc = Series::zero(K, sx.prec());
  if (g.is_zero()) return acc;
  const Embedding* emb = make_embedding(g.field(), K);
  for (long i = g.deg(); i >= 0; --i)
    acc = acc * sx + Series::constant(emb->apply(g.coeff((std::size_t)i)), sx.prec());
  return acc;
}

inline LocalFrame build_frame(const Place& P, long prec) {
  const Curve* C = P.curve();
  const Field* K = P.residue_field();
  FieldElem one = FieldElem::one(K);
  switch (P.kind()) {
    case PlaceKind::P1Finite: {
      Series sx(K, 0, prec);
      sx.set(0, P.xbar());
      if (prec > 1) sx.set(1, one);
      return LocalFrame(P, prec, sx, Series::zero(K, prec));
    }
    case PlaceKind::P1Infinity: {
      Series sx(K, -1, prec);
      sx.set(-1, one);
      return LocalFrame(P, prec, sx, Series::zero(K, prec));
    }
    case PlaceKind::WAffine: {
      Poly A = C->polyA(), R = C->polyR();
      FieldElem dy = FieldElem::from_int(K, 2) * P.ybar() + A.eval(P.xbar());
      if (!dy.is_zero()) {
        // u = x - xbar; solve y^2 + A(x) y - R(x) = 0 for y by Newton
        Series sx(K, 0, prec);
        sx.set(0, P.xbar());
        if (prec > 1) sx.set(1, one);
        Series sA = eval_poly_series(A, sx), sR = eval_poly_series(R, sx);
        Series sy = Series::constant(P.ybar(), prec);
        for (long it = 0, goal = 1; goal < 2 * prec; ++it, goal *= 2) {
          Series F = sy * sy + sA * sy - sR;
          Series dF = sy * FieldElem::from_int(K, 2) + sA;
          sy = sy - F * dF.inverse();
          TKL_ASSERT(it < 64, "Newton iteration for y(u) failed to converge");
        }
        return LocalFrame(P, prec, sx, sy.truncated(prec));
      }
      // u = y - ybar; solve R(x) - A(x) y - y^2 = 0 for x by Newton
      Series sy(K, 0, prec);
      sy.set(0, P.ybar());
      if (prec > 1) sy.set(1, one);
      Poly dA = derivative(A), dR = derivative(R);
      Series sx = Series::constant(P.xbar(), prec);
      for (long it = 0, goal = 1; goal < 2 * prec; ++it, goal *= 2) {
        Series F = eval_poly_series(R, sx) - eval_poly_series(A, sx) * sy - sy * sy;
        Series dF = eval_poly_series(dR, sx) - eval_poly_series(dA, sx) * sy;
        sx = sx - F * dF.inverse();
        TKL_ASSERT(it < 64, "Newton iteration for x(u) failed to converge");
      }
      return LocalFrame(P, prec, sx.truncated(prec), sy);
    }
    case PlaceKind::WO: {
      // u = x/y, v = 1/y; the curve equation becomes
      //   G(v) = v - u^3 + a1 u v + a3 v^2 - a2 u^2 v - a4 u v^2 - a6 v^3 = 0
      // with v = u^3 + O(u^4); G'(v) is a unit, so Newton applies.
      long w = prec + 8;  // headroom: v has order 3, so 1/v shifts the window
      Series u = Series::unit_u(K, w);
      auto cf = [&](const FieldElem& a) { return Series::constant(a, w); };
      Series a1 = cf(C->a1()), a2 = cf(C->a2()), a3 = cf(C->a3()), a4 = cf(C->a4()),
             a6 = cf(C->a6());
      Series u2 = u * u, u3 = u2 * u;
      Series v = u3;
      for (long it = 0, goal = 1; goal < 2 * w; ++it, goal *= 2) {
        Series G = v - u3 + a1 * u * v + a3 * v * v - a2 * u2 * v - a4 * u * v * v -
                   a6 * v * v * v;
        Series dG = Series::constant(one, w) + a1 * u + a3 * v * FieldElem::from_int(K, 2) -
                    a2 * u2 - a4 * u * v * FieldElem::from_int(K, 2) -
                    a6 * v * v * FieldElem::from_int(K, 3);
        v = v - G * dG.inverse();
        TKL_ASSERT(it < 64, "Newton iteration for v(u) failed to converge");
      }
      Series sy = v.normalized().inverse();
      Series sx = u * sy;
      return LocalFrame(P, prec, sx.truncated(prec), sy.truncated(prec));
    }
  }
  TKL_ASSERT(false, "unreachable place kind");
  return LocalFrame();
}

inline const LocalFrame& local_frame(const Place& P, long prec) {
  // round precision up to a power of two so repeated queries share frames
  long m = 8;
  while (m < prec) m *= 2;
  auto& cache = P.curve()->caches().slot<
      cached_map<std::pair<Place, long>, std::shared_ptr<const LocalFrame>>>("local_frames");
  auto key = std::make_pair(P, m);
  if (auto hit = cache.find(key)) return **hit;
  auto built = std::make_shared<const LocalFrame>(build_frame(P, m));
  return *cache.store(key, built);
}

// pole/zero budget: an upper bound for |ord_P(f)| over every place P
inline long ord_budget(const FuncElem& f) {
  auto nd = [](const Poly& g) { return g.is_zero() ? 0L : (long)g.deg(); };
  if (f.curve()->model() == Model::P1) return nd(f.num_a()) + nd(f.den()) + 2;
  long num = std::max(2 * nd(f.num_a()), 3 + 2 * nd(f.num_b()));
  return num + 2 * nd(f.den()) + 4;
}

// expansion of f at P with the leading coefficient visible and at least
// `window` coefficients past it
inline Series expand_series(const FuncElem& f, const Place& P, long window) {
  TKL_REQUIRE(!f.is_zero(), "local expansion of the zero element");
  long budget = ord_budget(f) + window + 8;
  for (long m = std::min<long>(budget, 16);; m *= 2) {
    TKL_ASSERT(m <= 8 * budget + 1024, "expansion failed to reveal a leading coefficient");
    const LocalFrame& fr = local_frame(P, m);
    Series num = eval_poly_series(f.num_a(), fr.sx);
    if (!f.num_b().is_zero()) num = num + eval_poly_series(f.num_b(), fr.sx) * fr.sy;
    if (num.visibly_zero()) continue;
    Series den = eval_poly_series(f.den(), fr.sx);
    if (den.visibly_zero()) continue;
    Series r = num * den.inverse();
    auto o = r.order();
    if (!o.has_value()) continue;
    if (r.prec() - *o >= window + 1) return r.normalized();
  }
}

}  // namespace detail

inline long ord_at(const FuncElem& f, const Place& P) {
  TKL_REQUIRE(!f.is_zero(), "ord_at of the zero element");
  // cheap exact path on the projective line
  if (f.curve()->model() == Model::P1 && P.kind() == PlaceKind::P1Infinity)
    return (long)f.den().deg() - (long)f.num_a().deg();
  if (f.curve()->model() == Model::P1) {
    auto mult = [&](Poly g) {
      long m = 0;
      while (P.pi().divides(g)) {
        ++m;
        g = g / P.pi();
      }
      return m;
    };
    return mult(f.num_a()) - mult(f.den());
  }
  return *detail::expand_series(f, P, 0).order();
}

// leading coefficient of f at P with respect to the canonical uniformizer
inline FieldElem leading_coeff_at(const FuncElem& f, const Place& P) {
  return detail::expand_series(f, P, 0).leading();
}

inline FieldElem eval_at(const FuncElem& f, const Place& P) {
  if (f.is_zero()) return FieldElem::zero(P.residue_field());
  Series s = detail::expand_series(f, P, 0);
  TKL_REQUIRE(*s.order() >= 0, "evaluating a function at one of its poles");
  return s.get(0);
}

struct LocalExpansion {
  Place P;
  std::string uniformizer;
  long val = 0;
  std::vector<FieldElem> coeffs;  // coeffs[i] multiplies u^{val+i}
};

// expansion with m coefficients past the leading term
inline LocalExpansion local_expand(const FuncElem& f, const Place& P, long m) {
  TKL_REQUIRE(m >= 1, "local_expand needs at least one term");
  Series s = detail::expand_series(f, P, m);
  LocalExpansion e;
  e.P = P;
  e.uniformizer = uniformizer_tag(P);
  e.val = *s.order();
  for (long i = 0; i <= m; ++i) e.coeffs.push_back(s.get(e.val + i));
  return e;
}

}  // namespace tkl
