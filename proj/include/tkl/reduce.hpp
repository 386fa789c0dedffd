#pragma once
// Reduction of K2 elements to certified normal form.
//
// Everything here is a constructive rewriting step: an input combination of
// symbols is traded for collected content plus strictly smaller content, and
// every trade is justified by an exact identity between functions (a witness)
// together with divisor-inequality membership claims.  Steps never appeal to
// the structure theory itself; they only use the defining relations of K2
// (bilinearity, {a, 1-a} = 0, {a, -a} = 0) instantiated at literal function
// identities, so each one preserves the tame image at every place exactly and
// can be re-verified independently of the code that found it.
//
// The two reduction modes:
//   Degree: descend through degree strata d, d-1, ..., 3t+1, leaving one
//           canonical pair {f_P, l+} - {f_P, l-} per place of degree >= 3t+1
//           and a residual generated by f_P-symbols of degree <= 3t and
//           RR_{3t} pairs.
//   RR:     continue down to 2t+1 by dissolving special places and collecting
//           the non-special strata with the sharper kernel lemmas, leaving a
//           residual generated by RR_{3t} pairs only.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tkl/common.hpp"
#include "tkl/curve.hpp"
#include "tkl/divisor.hpp"
#include "tkl/field.hpp"
#include "tkl/func.hpp"
#include "tkl/gens.hpp"
#include "tkl/k2.hpp"
#include "tkl/local.hpp"
#include "tkl/matrix.hpp"
#include "tkl/place.hpp"
#include "tkl/rr.hpp"

namespace tkl {

// ---------------------------------------------------------------------------
// Certificates

// An exact additive identity between functions: the claim is sum(terms) == 0.
struct WitnessIdentity {
  std::string label;
  std::vector<FuncElem> terms;

  bool holds() const {
    if (terms.empty()) return true;
    FuncElem s = FuncElem::zero(terms.front().curve());
    for (const FuncElem& t : terms) s = s + t;
    return s.is_zero();
  }
};

// The claim f in RR_d(D)^* = L(d(O) - D) \ {0}, checked by divisor inequality.
struct MembershipClaim {
  FuncElem f;
  long d;
  Divisor D;
  std::string label;

  MembershipClaim(FuncElem f_, long d_, Divisor D_, std::string label_)
      : f(std::move(f_)), d(d_), D(std::move(D_)), label(std::move(label_)) {}

  bool holds() const {
    if (f.is_zero()) return false;
    const Curve* C = f.curve();
    Divisor g = principal_divisor_cached(f) + Divisor::single(place_O(C), d) - D;
    return g.is_effective();
  }
};

enum class LemmaTag { Collect, T3t1, T3t2, T3t3, Pq1, Pq2, Abd, L123, Flem, Llmm, Triple };

inline const char* lemma_tag_name(LemmaTag t) {
  switch (t) {
    case LemmaTag::Collect: return "COLLECT";
    case LemmaTag::T3t1: return "3t.1";
    case LemmaTag::T3t2: return "3t.2";
    case LemmaTag::T3t3: return "3t.3";
    case LemmaTag::Pq1: return "PQ.1";
    case LemmaTag::Pq2: return "PQ.2";
    case LemmaTag::Abd: return "ABD";
    case LemmaTag::L123: return "L123";
    case LemmaTag::Flem: return "FLEM";
    case LemmaTag::Llmm: return "LLMM";
    case LemmaTag::Triple: return "TRIPLE";
  }
  return "?";
}

inline LemmaTag lemma_tag_from_name(const std::string& s) {
  for (LemmaTag t : {LemmaTag::Collect, LemmaTag::T3t1, LemmaTag::T3t2, LemmaTag::T3t3,
                     LemmaTag::Pq1, LemmaTag::Pq2, LemmaTag::Abd, LemmaTag::L123,
                     LemmaTag::Flem, LemmaTag::Llmm, LemmaTag::Triple})
    if (s == lemma_tag_name(t)) return t;
  throw domain_error("unknown lemma tag: " + s);
}

// One logged rewrite: `consumed` was replaced by `produced`.  The step is
// valid when every witness identity sums to zero exactly, every membership
// claim holds as a divisor inequality, and the two sides have equal tame
// image at every place.
struct RewriteStep {
  LemmaTag tag;
  K2Elem consumed;
  K2Elem produced;
  std::vector<WitnessIdentity> witnesses;
  std::vector<MembershipClaim> memberships;
  std::string note;

  explicit RewriteStep(const Curve* C, LemmaTag t = LemmaTag::Collect)
      : tag(t), consumed(C), produced(C) {}
};

inline bool verify_step(const RewriteStep& s) {
  for (const auto& w : s.witnesses)
    if (!w.holds()) return false;
  for (const auto& m : s.memberships)
    if (!m.holds()) return false;
  return tame_image(s.consumed) == tame_image(s.produced);
}

// ---------------------------------------------------------------------------
// Oriented adds and bilinear expansions

namespace detail {

// Add c * {a, b} under the conventions used throughout the reducer: {1, b}
// and {a, 1} are dropped (zero in K2, trivial tame image), {a, a} is replaced
// by {a, -1} (equal tame image at every place), and the symbol is stored in
// the orientation of orient_symbol so that equal content cancels at the level
// of the term map.
inline void rd_add(K2Elem& e, const FuncElem& a, const FuncElem& b, long c) {
  if (c == 0) return;
  TKL_REQUIRE(!a.is_zero() && !b.is_zero(), "symbol entries must be nonzero");
  if (a.is_one() || b.is_one()) return;
  if (a == b) {
    FuncElem minus_one = -FuncElem::one(a.curve());
    if (!(b == minus_one)) return rd_add(e, a, minus_one, c);
  }
  auto [s, flip] = orient_symbol(a, b);
  e.add(s, c * flip);
}

// A formal product prod base^exp with nonzero bases.
using FactorList = std::vector<std::pair<FuncElem, long>>;

// The full bilinear expansion of {u, v} for u = prod a_i^{e_i},
// v = prod c_j^{f_j}: sum over factor pairs of e_i f_j {a_i, c_j}, with the
// rd_add conventions.  The callers only invoke this on literal instances of
// defining relations of K2 ({u, 1-u}, {u, -u}, {u, 1}), so the result is an
// exact certificate of a zero element with trivial tame image.
inline K2Elem expand_pair(const Curve* C, const FactorList& u, const FactorList& v) {
  K2Elem out(C);
  for (const auto& [a, ea] : u)
    for (const auto& [b, eb] : v) rd_add(out, a, b, ea * eb);
  return out;
}

inline FuncElem factor_product(const Curve* C, const FactorList& w) {
  FuncElem p = FuncElem::one(C);
  for (const auto& [b, e] : w) p = p * b.pow(e);
  return p;
}

// Minimal m with f in RR_m = L(m(O)); requires f nonzero with poles only at O.
inline long rr_level(const FuncElem& f) {
  TKL_REQUIRE(!f.is_zero(), "rr_level: zero function");
  long m = 0;
  for (const auto& [Q, mult] : principal_divisor_cached(f).entries()) {
    if (mult >= 0) continue;
    TKL_REQUIRE(Q.is_O(), "rr_level: pole away from O");
    m = -mult;
  }
  return m;
}

// f in RR_d^* as a plain divisor test (no claim object).
inline bool in_rr(const FuncElem& f, long d) {
  if (f.is_zero()) return false;
  const Curve* C = f.curve();
  Divisor g = principal_divisor_cached(f) + Divisor::single(place_O(C), d);
  return g.is_effective();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Multiplicative words

// A word certifies a factorization f == prod base^exp with every base lying
// in a small Riemann-Roch space.
using Word = std::vector<std::pair<FuncElem, long>>;

inline FuncElem word_product(const Curve* C, const Word& w) {
  FuncElem p = FuncElem::one(C);
  for (const auto& [b, e] : w) p = p * b.pow(e);
  return p;
}

// Express f with |(f)| contained in C_{<=t} as a word in RR_{3t}^*.
//
// Base case: if deg (f)_inf <= t, any nonzero g in L(2t(O) - (f)_inf) gives
// f = (g f) / g with both factors in RR_{2t}^*.  Otherwise split a block of
// degree in (t, 2t] off both the zero and the pole divisor, divide out the
// two block functions (each in RR_{3t}^*), and recurse on the strictly
// smaller remainder.
inline Word rewrite_small_support(const Curve* C, const FuncElem& f) {
  TKL_REQUIRE(!f.is_zero(), "rewrite_small_support: zero function");
  long t = C->genus();
  const Divisor& df = principal_divisor_cached(f);
  for (const auto& [Q, m] : df.entries())
    TKL_REQUIRE(Q.degree() <= t, "rewrite_small_support: support place of degree > t");

  if (f.is_constant()) {
    Word w;
    if (!f.is_one()) w.push_back({f, 1});
    return w;
  }

  Divisor poles(C);
  for (const auto& [Q, m] : df.entries())
    if (m < 0) poles = poles + Divisor::single(Q, -m);
  long degp = poles.degree();

  if (degp <= t) {
    const RRBasis& B = rr_basis(C, 2 * t, poles);
    TKL_ASSERT(!B.empty(), "small-support base case: empty auxiliary space");
    FuncElem g = B.basis().front();
    FuncElem gf = g * f;
    Word w;
    if (!gf.is_one()) w.push_back({gf, 1});
    if (!g.is_one()) w.push_back({g, -1});
    TKL_ASSERT(word_product(C, w) == f, "small-support word product mismatch");
    return w;
  }

  // split a block of degree in (t, 2t] off the chosen side of (f)
  auto split_block = [&](bool zeros) {
    Divisor block(C);
    long deg = 0;
    for (const auto& [Q, m] : df.entries()) {
      long mult = zeros ? m : -m;
      if (mult <= 0) continue;
      for (long i = 0; i < mult && deg <= t; ++i) {
        block = block + Divisor::single(Q, 1);
        deg += Q.degree();
      }
      if (deg > t) break;
    }
    TKL_ASSERT(deg > t && deg <= 2 * t, "block split out of range");
    return block;
  };
  auto block_fn = [&](const Divisor& D) {
    const RRBasis& B = rr_basis(C, t + D.degree(), D);
    TKL_ASSERT(!B.empty(), "block function space is empty");
    return B.basis().front();
  };
  Divisor D0 = split_block(true), Dinf = split_block(false);
  FuncElem h0 = block_fn(D0), hinf = block_fn(Dinf);
  FuncElem rest = f * hinf / h0;

  // termination: the remainder's pole degree strictly drops
  long degr = 0;
  for (const auto& [Q, m] : principal_divisor_cached(rest).entries())
    if (m < 0) degr += -m * Q.degree();
  TKL_ASSERT(degr < degp, "block reduction did not shrink the pole divisor");

  Word w = rewrite_small_support(C, rest);
  w.push_back({h0, 1});
  w.push_back({hinf, -1});
  TKL_ASSERT(word_product(C, w) == f, "small-support word product mismatch");
  return w;
}

// f_P as a word in RR_{d+t}^*: the single factor f_P when it already lies in
// RR_{d+t}, otherwise the quotient (f_P f_P') / f_P' through the companion
// generator, whose numerator has divisor (P) + D_P' - (d+t)(O).
inline Word fP_word(const Curve* C, const Place& P) {
  const GeneratorRecord& rec = make_f_P(C, P);
  long t = C->genus(), d = P.degree();
  Divisor bound =
      principal_divisor_cached(rec.fP()) + Divisor::single(place_O(C), d + t);
  Word w;
  if (bound.is_effective()) {
    w.push_back({rec.fP(), 1});
  } else {
    w.push_back({rec.fP() * rec.fPprime(), 1});
    w.push_back({rec.fPprime(), -1});
  }
  TKL_ASSERT(word_product(C, w) == rec.fP(), "fP word product mismatch");
  return w;
}

// f_P = g / (g / f_P) for the canonical nonzero g in RR_{d'}((P)); valid when
// that space is nonzero and 2t <= d' <= d + t, and then g/f_P lies in
// RR_{2t}^*.  This dissolves generators at places where the evaluation space
// still sees a zero, e.g. every place of degree <= 2t via d' = d + t.
inline Word fP_word(const Curve* C, const Place& P, long dprime) {
  const GeneratorRecord& rec = make_f_P(C, P);
  long t = C->genus(), d = P.degree();
  TKL_REQUIRE(0 <= dprime && dprime <= d + t, "fP_word: d' out of range");
  const RRBasis& B = rr_basis(C, dprime, Divisor::single(P, 1));
  TKL_REQUIRE(!B.empty(), "fP_word: RR_{d'}((P)) = 0");
  FuncElem g = B.basis().front();
  FuncElem q = g / rec.fP();
  TKL_ASSERT(detail::in_rr(q, 2 * t), "fP_word: quotient not in RR_{2t}");
  Word w;
  if (!g.is_one()) w.push_back({g, 1});
  if (!q.is_one()) w.push_back({q, -1});
  TKL_ASSERT(word_product(C, w) == rec.fP(), "fP word product mismatch");
  return w;
}

// ---------------------------------------------------------------------------
// Evaluation solve: the engine of surjectivity arguments

// A pair (a, b) in V^* x W^* with b(P) = xi * a(P).  Exists as soon as
// dim V + dim W > deg P; both entries of the canonical kernel vector are
// nonzero whenever evaluation at P is injective on V and on W, which all
// callers guarantee through their choice of spaces.
inline std::pair<FuncElem, FuncElem> vw_solve(const RRBasis& V, const RRBasis& W,
                                              const Place& P, const FieldElem& xi) {
  const Curve* C = V.curve();
  TKL_REQUIRE(W.curve() == C, "vw_solve: spaces on different curves");
  TKL_REQUIRE(!xi.is_zero(), "vw_solve: target value must be a unit");
  TKL_REQUIRE(xi.field() == P.residue_field(), "vw_solve: value not in k(P)");
  TKL_REQUIRE(V.dim() + W.dim() > P.degree(), "vw_solve: dim V + dim W too small");
  const Field* k = C->field();
  const Embedding* emb = make_embedding(k, P.residue_field());
  std::size_t rd = emb->relative_degree();
  std::size_t nV = (std::size_t)V.dim(), nW = (std::size_t)W.dim();

  Matrix M(k, rd, nV + nW);
  for (std::size_t j = 0; j < nV; ++j) {
    std::vector<FieldElem> co = emb->coords(xi * eval_at(V.basis()[j], P));
    for (std::size_t r = 0; r < rd; ++r) M.at(r, j) = co[r];
  }
  for (std::size_t j = 0; j < nW; ++j) {
    std::vector<FieldElem> co = emb->coords(eval_at(W.basis()[j], P));
    for (std::size_t r = 0; r < rd; ++r) M.at(r, nV + j) = -co[r];
  }
  auto ns = M.nullspace();
  TKL_ASSERT(!ns.empty(), "vw_solve: guaranteed kernel is empty");
  // The kernel always contains the degenerate pairs vanishing at P; take the
  // first canonical basis vector whose first component is a unit at P.  When
  // the evaluation image of the spaces is too small to realize xi, no such
  // vector exists anywhere in the kernel.
  for (const auto& v : ns) {
    FuncElem a = FuncElem::zero(C), b = FuncElem::zero(C);
    for (std::size_t j = 0; j < nV; ++j)
      a = a + FuncElem::constant(C, v[j]) * V.basis()[j];
    for (std::size_t j = 0; j < nW; ++j)
      b = b + FuncElem::constant(C, v[nV + j]) * W.basis()[j];
    if (a.is_zero() || eval_at(a, P).is_zero()) continue;
    TKL_ASSERT(!b.is_zero(), "vw_solve: degenerate kernel vector");
    TKL_ASSERT(eval_at(b, P) == xi * eval_at(a, P), "vw_solve: constraint violated");
    return {a, b};
  }
  TKL_REQUIRE(false, "vw_solve: spaces cannot realize the value at P");
  return {FuncElem::zero(C), FuncElem::zero(C)};  // unreachable
}

// ---------------------------------------------------------------------------
// The shared pair-rewrite engine

namespace detail {

// Result of one kernel-solve rewrite of the pair {h-part, a+} - {h-part, a-}:
// replacement entries b+/b-, the auxiliary g, the fully expanded adjustment
// `delta` (an exact certificate of a zero element; adding it to the current
// element swaps the pair and deposits the byproducts), the witness identity,
// and the claims describing where the solved functions live.
struct PairRewrite {
  FuncElem bplus, bminus, g;
  K2Elem delta;
  WitnessIdentity witness;
  std::vector<MembershipClaim> memberships;

  explicit PairRewrite(const Curve* C)
      : bplus(FuncElem::zero(C)), bminus(FuncElem::zero(C)), g(FuncElem::zero(C)),
        delta(C) {}
};

// Solve a- b+ - a+ b- - h g = 0 with (b+, b-, g) in Bp x Bm x G mapped into
// `cod`, and build the adjustment certificate.  `h_factors` is the factor
// list of the pivot h (one entry for a plain generator, two for a product of
// generators); every factor of h must vanish at P or be a unit at P, and the
// a's must be units at P, which makes both solved entries nonzero.
inline PairRewrite pair_rewrite(const Curve* C, const Place& P, const FuncElem& aplus,
                                const FuncElem& aminus, const FuncElem& h,
                                const FactorList& h_factors, const RRBasis& Bp,
                                const RRBasis& Bm, const RRBasis& G,
                                const RRBasis& cod, const char* label) {
  TKL_REQUIRE(!aplus.is_zero() && !aminus.is_zero(), std::string(label) + ": zero entry");
  TKL_REQUIRE(!eval_at(aplus, P).is_zero() && !eval_at(aminus, P).is_zero(),
              std::string(label) + ": pair entry vanishes at P");
  KernelRequest req;
  req.summands = {{aminus, &Bp}, {-aplus, &Bm}, {-h, &G}};
  req.codomain = &cod;
  std::vector<FuncElem> sol = solve_kernel(req);

  PairRewrite out(C);
  out.bplus = sol[0];
  out.bminus = sol[1];
  out.g = sol[2];
  TKL_ASSERT(!out.bplus.is_zero() && !out.bminus.is_zero(),
             std::string(label) + ": replacement entry vanished");

  out.witness.label = std::string(label) + ": a-*b+ - a+*b- - h*g = 0";
  out.witness.terms = {aminus * out.bplus, -(aplus * out.bminus)};
  if (!out.g.is_zero()) out.witness.terms.push_back(-(h * out.g));

  FactorList u, v;
  if (out.g.is_zero()) {
    // exact proportionality a- b+ = a+ b-: certificate {h, (a- b+)/(a+ b-)} = {h, 1}
    u = h_factors;
    v = {{aminus, 1}, {out.bplus, 1}, {aplus, -1}, {out.bminus, -1}};
    TKL_ASSERT(factor_product(C, v).is_one(), std::string(label) + ": quotient is not 1");
  } else {
    // Steinberg instance: u = a- b+ / (h g), v = -a+ b- / (h g), u + v = 1
    u = {{aminus, 1}, {out.bplus, 1}, {out.g, -1}};
    v = {{-FuncElem::one(C), 1}, {aplus, 1}, {out.bminus, 1}, {out.g, -1}};
    for (const auto& [hf, he] : h_factors) {
      u.push_back({hf, -he});
      v.push_back({hf, -he});
    }
    FuncElem uu = factor_product(C, u), vv = factor_product(C, v);
    TKL_ASSERT(uu + vv == FuncElem::one(C), std::string(label) + ": not a Steinberg instance");
  }
  out.delta = expand_pair(C, u, v);
  return out;
}

// Scale a step in place: applying the same rewrite c times.
inline void scale_step(RewriteStep& st, long c) {
  st.consumed *= c;
  st.produced *= c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pair rewrites at one place (public operations)

// Replace {f_P, a+} - {f_P, a-} by {f_P, b+} - {f_P, b-} with b+ in RR_{e+},
// b- in RR_{e-}, through the canonical kernel element of
//   RR_{e+} x RR_{e-} x RR_{d+t-1}(D_P) -> RR_{2d+delta-1},
//   (b+, b-, g) |-> a- b+ - a+ b- - f_P g.
// Preconditions (checked): deg P >= t+1; a+/a- units at P with pole orders
// ord_a+, ord_a- satisfying ord_a- + e+ <= 2d+delta-1, ord_a+ + e- <=
// 2d+delta-1; e+, e- <= d-1; e+ + e- >= d + delta + 2t - 1.
struct AbdResult {
  FuncElem bplus, bminus, g;
  RewriteStep step;

  explicit AbdResult(const Curve* C)
      : bplus(FuncElem::zero(C)), bminus(FuncElem::zero(C)), g(FuncElem::zero(C)),
        step(C, LemmaTag::Abd) {}
};

inline AbdResult abd_solve(const Curve* C, const Place& P, const FuncElem& aplus,
                           const FuncElem& aminus, long delta, long epsplus,
                           long epsminus) {
  long t = C->genus(), d = P.degree();
  const GeneratorRecord& rec = make_f_P(C, P);
  TKL_REQUIRE(delta >= 0, "abd_solve: delta negative");
  TKL_REQUIRE(epsplus >= 0 && epsminus >= 0 && epsplus <= d - 1 && epsminus <= d - 1,
              "abd_solve: epsilon out of range");
  long eplus = detail::rr_level(aplus), eminus = detail::rr_level(aminus);
  TKL_REQUIRE(eminus + epsplus <= 2 * d + delta - 1, "abd_solve: e- + eps+ too large");
  TKL_REQUIRE(eplus + epsminus <= 2 * d + delta - 1, "abd_solve: e+ + eps- too large");
  TKL_REQUIRE(epsplus + epsminus >= d + delta + 2 * t - 1,
              "abd_solve: eps+ + eps- too small");

  const RRBasis& Bp = rr_basis(C, epsplus);
  const RRBasis& Bm = rr_basis(C, epsminus);
  const RRBasis& G = rr_basis(C, d + t - 1, rec.DP());
  const RRBasis& cod = rr_basis(C, 2 * d + delta - 1);
  detail::PairRewrite pr = detail::pair_rewrite(C, P, aplus, aminus, rec.fP(),
                                                {{rec.fP(), 1}}, Bp, Bm, G, cod, "abd");

  AbdResult out(C);
  out.bplus = pr.bplus;
  out.bminus = pr.bminus;
  out.g = pr.g;
  detail::rd_add(out.step.consumed, rec.fP(), aplus, 1);
  detail::rd_add(out.step.consumed, rec.fP(), aminus, -1);
  out.step.produced = out.step.consumed;
  out.step.produced += pr.delta;
  out.step.witnesses = {pr.witness};
  out.step.memberships.emplace_back(out.bplus, epsplus, Divisor(C), "b+ in RR_{eps+}");
  out.step.memberships.emplace_back(out.bminus, epsminus, Divisor(C), "b- in RR_{eps-}");
  if (!out.g.is_zero())
    out.step.memberships.emplace_back(out.g, d + t - 1, rec.DP(), "g in RR_{d+t-1}(D_P)");
  out.step.memberships.emplace_back(rec.fP(), d - t,
                                    Divisor::single(P, 1) - rec.DP(), "f_P shape");
  out.step.note = "abd at " + P.to_string();
  return out;
}

// {f_P, f_Q} (P dominant) traded for same-stratum entries plus strictly
// smaller content, through the canonical kernel element of
//   variant 1 (deg P >= 3t+1): RR_{d'-1}(D_P) x RR_{d-1}(D_Q) x RR_{d-1} -> RR_{d+d'-t-1}
//   variant 2 (deg P <= 3t):   RR_{d'-1}(D_P) x RR_{3t-1}(D_Q) x RR_{3t}  -> RR_{d'+2t-1}
//   (l_P, l_Q, l) |-> f_P l_P + f_Q l_Q - l.
// The branch is dictated by which coordinates of the canonical kernel element
// vanish: l = 0 gives an {a, -a} instance, a vanishing l_P or l_Q gives an
// exact quotient, and the generic case is a Steinberg instance.
struct PQReduction {
  FuncElem lP, lQ, l;
  RewriteStep step;

  explicit PQReduction(const Curve* C)
      : lP(FuncElem::zero(C)), lQ(FuncElem::zero(C)), l(FuncElem::zero(C)),
        step(C, LemmaTag::Pq1) {}
};

inline PQReduction pq_reduce(const Curve* C, const Place& P, const Place& Q, int variant) {
  long t = C->genus(), d = P.degree(), dq = Q.degree();
  TKL_REQUIRE(!(P == Q), "pq_reduce: P and Q must differ");
  TKL_REQUIRE(2 * t + 1 <= dq && dq <= d, "pq_reduce: need 2t+1 <= deg Q <= deg P");
  TKL_REQUIRE(variant == 1 || variant == 2, "pq_reduce: unknown variant");
  if (variant == 1)
    TKL_REQUIRE(d >= 3 * t + 1, "pq_reduce: variant 1 needs deg P >= 3t+1");
  else
    TKL_REQUIRE(d <= 3 * t, "pq_reduce: variant 2 needs deg P <= 3t");

  const GeneratorRecord& rp = make_f_P(C, P);
  const GeneratorRecord& rq = make_f_P(C, Q);
  long lq_d = variant == 1 ? d - 1 : 3 * t - 1;
  long l_d = variant == 1 ? d - 1 : 3 * t;
  long cod_d = variant == 1 ? d + dq - t - 1 : dq + 2 * t - 1;
  const RRBasis& BP = rr_basis(C, dq - 1, rp.DP());
  const RRBasis& BQ = rr_basis(C, lq_d, rq.DP());
  const RRBasis& BL = rr_basis(C, l_d);
  const RRBasis& cod = rr_basis(C, cod_d);

  KernelRequest req;
  req.summands = {{rp.fP(), &BP}, {rq.fP(), &BQ}, {-FuncElem::one(C), &BL}};
  req.codomain = &cod;
  std::vector<FuncElem> sol = solve_kernel(req);

  PQReduction out(C);
  out.lP = sol[0];
  out.lQ = sol[1];
  out.l = sol[2];
  out.step.tag = variant == 1 ? LemmaTag::Pq1 : LemmaTag::Pq2;

  detail::FactorList u, v;
  if (out.l.is_zero()) {
    // f_P l_P = -(f_Q l_Q): an {a, -a} instance
    TKL_ASSERT(!out.lP.is_zero() && !out.lQ.is_zero(), "pq_reduce: degenerate kernel");
    u = {{rp.fP(), 1}, {out.lP, 1}};
    v = {{rq.fP(), 1}, {out.lQ, 1}};
    TKL_ASSERT((detail::factor_product(C, u) + detail::factor_product(C, v)).is_zero(),
               "pq_reduce: not an {a,-a} instance");
  } else if (out.lP.is_zero()) {
    // f_Q = l / l_Q: certificate {f_P, f_Q l_Q / l} = {f_P, 1}
    u = {{rp.fP(), 1}};
    v = {{rq.fP(), 1}, {out.lQ, 1}, {out.l, -1}};
    TKL_ASSERT(detail::factor_product(C, v).is_one(), "pq_reduce: quotient is not 1");
  } else if (out.lQ.is_zero()) {
    u = {{rp.fP(), 1}, {out.lP, 1}, {out.l, -1}};
    v = {{rq.fP(), 1}};
    TKL_ASSERT(detail::factor_product(C, u).is_one(), "pq_reduce: quotient is not 1");
  } else {
    // Steinberg instance u + v = 1
    u = {{rp.fP(), 1}, {out.lP, 1}, {out.l, -1}};
    v = {{rq.fP(), 1}, {out.lQ, 1}, {out.l, -1}};
    TKL_ASSERT(detail::factor_product(C, u) + detail::factor_product(C, v) ==
                   FuncElem::one(C),
               "pq_reduce: not a Steinberg instance");
  }
  K2Elem cert = detail::expand_pair(C, u, v);

  detail::rd_add(out.step.consumed, rp.fP(), rq.fP(), 1);
  out.step.produced = out.step.consumed;
  out.step.produced -= cert;

  WitnessIdentity w;
  w.label = "pq: f_P l_P + f_Q l_Q - l = 0";
  if (!out.lP.is_zero()) w.terms.push_back(rp.fP() * out.lP);
  if (!out.lQ.is_zero()) w.terms.push_back(rq.fP() * out.lQ);
  if (!out.l.is_zero()) w.terms.push_back(-out.l);
  out.step.witnesses = {w};
  if (!out.lP.is_zero())
    out.step.memberships.emplace_back(out.lP, dq - 1, rp.DP(), "l_P in RR_{d'-1}(D_P)");
  if (!out.lQ.is_zero())
    out.step.memberships.emplace_back(out.lQ, lq_d, rq.DP(), "l_Q in RR(D_Q)");
  if (!out.l.is_zero())
    out.step.memberships.emplace_back(out.l, l_d, Divisor(C), "l in RR");
  out.step.memberships.emplace_back(rp.fP(), d - t, Divisor::single(P, 1) - rp.DP(),
                                    "f_P shape");
  out.step.memberships.emplace_back(rq.fP(), dq - t, Divisor::single(Q, 1) - rq.DP(),
                                    "f_Q shape");
  out.step.note = "pq at " + P.to_string() + ", " + Q.to_string();
  return out;
}

// Merge {f_P, l1+} + {f_P, l2+} - {f_P, l1-} (entries in RR_{d-1}^*) into
// {f_P, m+} - {f_P, m-} plus smaller content, by three kernel solves: the
// first two shrink one plus-entry each to RR_{2t}, the third absorbs the
// product of the two small entries with delta = t.  Logged as one step whose
// witness list carries all three identities.
struct Collect123 {
  FuncElem mplus, mminus;
  RewriteStep step;

  explicit Collect123(const Curve* C)
      : mplus(FuncElem::zero(C)), mminus(FuncElem::zero(C)), step(C, LemmaTag::L123) {}
};

inline Collect123 collect_123(const Curve* C, const Place& P, const FuncElem& l1p,
                              const FuncElem& l2p, const FuncElem& l1m) {
  long t = C->genus(), d = P.degree();
  TKL_REQUIRE(d >= 3 * t + 1, "collect_123: deg P < 3t+1");
  for (const FuncElem* l : {&l1p, &l2p, &l1m})
    TKL_REQUIRE(detail::in_rr(*l, d - 1), "collect_123: entry not in RR_{d-1}^*");
  const GeneratorRecord& rec = make_f_P(C, P);
  const FuncElem& fP = rec.fP();

  const RRBasis& B2t = rr_basis(C, 2 * t);
  const RRBasis& Bd1 = rr_basis(C, d - 1);
  const RRBasis& G = rr_basis(C, d + t - 1, rec.DP());
  const RRBasis& cod0 = rr_basis(C, 2 * d - 1);
  const RRBasis& cod3 = rr_basis(C, 2 * d + t - 1);

  Collect123 out(C);
  detail::rd_add(out.step.consumed, fP, l1p, 1);
  detail::rd_add(out.step.consumed, fP, l2p, 1);
  detail::rd_add(out.step.consumed, fP, l1m, -1);
  K2Elem cur = out.step.consumed;

  detail::PairRewrite c1 = detail::pair_rewrite(C, P, l1p, l1m, fP, {{fP, 1}}, B2t, Bd1,
                                                G, cod0, "123/first");
  cur += c1.delta;
  detail::PairRewrite c2 = detail::pair_rewrite(C, P, l2p, c1.bminus, fP, {{fP, 1}},
                                                B2t, Bd1, G, cod0, "123/second");
  cur += c2.delta;

  // bilinearity merge of the two small plus-entries
  FuncElem prod = c1.bplus * c2.bplus;
  K2Elem bil(C);
  detail::rd_add(bil, fP, prod, 1);
  detail::rd_add(bil, fP, c1.bplus, -1);
  detail::rd_add(bil, fP, c2.bplus, -1);
  cur += bil;

  detail::PairRewrite c3 = detail::pair_rewrite(C, P, prod, c2.bminus, fP, {{fP, 1}},
                                                Bd1, Bd1, G, cod3, "123/third");
  cur += c3.delta;

  out.mplus = c3.bplus;
  out.mminus = c3.bminus;
  out.step.produced = cur;
  out.step.witnesses = {c1.witness, c2.witness, c3.witness};
  out.step.memberships.emplace_back(c1.bplus, 2 * t, Divisor(C), "b1+ in RR_{2t}");
  out.step.memberships.emplace_back(c2.bplus, 2 * t, Divisor(C), "b2+ in RR_{2t}");
  out.step.memberships.emplace_back(c1.bminus, d - 1, Divisor(C), "b1- in RR_{d-1}");
  out.step.memberships.emplace_back(c2.bminus, d - 1, Divisor(C), "b2- in RR_{d-1}");
  out.step.memberships.emplace_back(out.mplus, d - 1, Divisor(C), "m+ in RR_{d-1}");
  out.step.memberships.emplace_back(out.mminus, d - 1, Divisor(C), "m- in RR_{d-1}");
  for (const detail::PairRewrite* c : {&c1, &c2, &c3})
    if (!c->g.is_zero())
      out.step.memberships.emplace_back(c->g, d + t - 1, rec.DP(),
                                        "g in RR_{d+t-1}(D_P)");
  out.step.memberships.emplace_back(fP, d - t, Divisor::single(P, 1) - rec.DP(),
                                    "f_P shape");
  out.step.note = "123 collect at " + P.to_string();
  return out;
}

// One epsilon-descent of the pair at a non-special place: entries in RR_eps^*
// are traded for entries in RR_{eps-1}^*, with byproducts that are literal
// RR_{3t} pairs.  Valid for e+1 <= eps <= 3t where e = ceil((d+1)/2) + t - 1.
struct PairStep {
  FuncElem bplus, bminus;
  RewriteStep step;

  explicit PairStep(const Curve* C, LemmaTag tag)
      : bplus(FuncElem::zero(C)), bminus(FuncElem::zero(C)), step(C, tag) {}
};

inline PairStep flem_apply(const Curve* C, const Place& P, const FuncElem& aplus,
                           const FuncElem& aminus, long eps) {
  long t = C->genus(), d = P.degree();
  TKL_REQUIRE(d >= 2 * t + 1, "flem: deg P < 2t+1");
  TKL_REQUIRE(!special_set(C, SetKind::S).contains(P), "flem: P is special");
  long e = (d + 2) / 2 + t - 1;
  TKL_REQUIRE(e + 1 <= eps && eps <= 3 * t, "flem: epsilon out of range");
  TKL_REQUIRE(detail::in_rr(aplus, eps) && detail::in_rr(aminus, eps),
              "flem: entry not in RR_eps^*");
  const GeneratorRecord& rec = make_f_P(C, P);

  const RRBasis& B = rr_basis(C, eps - 1);
  const RRBasis& G = rr_basis(C, 3 * t, rec.DP());
  const RRBasis& cod = rr_basis(C, 2 * eps - 1);
  detail::PairRewrite pr = detail::pair_rewrite(C, P, aplus, aminus, rec.fP(),
                                                {{rec.fP(), 1}}, B, B, G, cod, "flem");

  PairStep out(C, LemmaTag::Flem);
  out.bplus = pr.bplus;
  out.bminus = pr.bminus;
  detail::rd_add(out.step.consumed, rec.fP(), aplus, 1);
  detail::rd_add(out.step.consumed, rec.fP(), aminus, -1);
  out.step.produced = out.step.consumed;
  out.step.produced += pr.delta;
  out.step.witnesses = {pr.witness};
  out.step.memberships.emplace_back(out.bplus, eps - 1, Divisor(C), "b+ in RR_{eps-1}");
  out.step.memberships.emplace_back(out.bminus, eps - 1, Divisor(C), "b- in RR_{eps-1}");
  if (!pr.g.is_zero())
    out.step.memberships.emplace_back(pr.g, 3 * t, rec.DP(), "g in RR_{3t}(D_P)");
  out.step.memberships.emplace_back(rec.fP(), d - t, Divisor::single(P, 1) - rec.DP(),
                                    "f_P shape");
  out.step.note = "flem at " + P.to_string() + ", eps = " + std::to_string(eps);
  return out;
}

// Trade a pair in RR_{d-1}^* at a non-special place (2t+1 <= d <= 3t) for an
// (RR_{2t-1}, RR_{3t}) pair; the auxiliary g lives in RR_{d+t-1}(D_P), so its
// byproducts may need refactoring at strictly smaller degrees.
inline PairStep llmm_apply(const Curve* C, const Place& P, const FuncElem& lplus,
                           const FuncElem& lminus) {
  long t = C->genus(), d = P.degree();
  TKL_REQUIRE(2 * t + 1 <= d && d <= 3 * t, "llmm: deg P out of range");
  TKL_REQUIRE(!special_set(C, SetKind::S).contains(P), "llmm: P is special");
  TKL_REQUIRE(detail::in_rr(lplus, d - 1) && detail::in_rr(lminus, d - 1),
              "llmm: entry not in RR_{d-1}^*");
  const GeneratorRecord& rec = make_f_P(C, P);

  const RRBasis& Bp = rr_basis(C, 2 * t - 1);
  const RRBasis& Bm = rr_basis(C, 3 * t);
  const RRBasis& G = rr_basis(C, d + t - 1, rec.DP());
  const RRBasis& cod = rr_basis(C, d + 3 * t - 1);
  detail::PairRewrite pr = detail::pair_rewrite(C, P, lplus, lminus, rec.fP(),
                                                {{rec.fP(), 1}}, Bp, Bm, G, cod, "llmm");

  PairStep out(C, LemmaTag::Llmm);
  out.bplus = pr.bplus;
  out.bminus = pr.bminus;
  detail::rd_add(out.step.consumed, rec.fP(), lplus, 1);
  detail::rd_add(out.step.consumed, rec.fP(), lminus, -1);
  out.step.produced = out.step.consumed;
  out.step.produced += pr.delta;
  out.step.witnesses = {pr.witness};
  out.step.memberships.emplace_back(out.bplus, 2 * t - 1, Divisor(C), "m+ in RR_{2t-1}");
  out.step.memberships.emplace_back(out.bminus, 3 * t, Divisor(C), "m- in RR_{3t}");
  if (!pr.g.is_zero())
    out.step.memberships.emplace_back(pr.g, d + t - 1, rec.DP(),
                                      "g in RR_{d+t-1}(D_P)");
  out.step.memberships.emplace_back(rec.fP(), d - t, Divisor::single(P, 1) - rec.DP(),
                                    "f_P shape");
  out.step.note = "llmm at " + P.to_string();
  return out;
}

// Absorb two RR_{2t-1} plus-entries against an RR_{3t} minus-entry at a
// non-special place, pivoting on the product f_P f_P' in RR_{4t}^*; all
// byproducts are literal RR_{3t} pairs and the new pair lies in RR_{3t}^*.
inline PairStep triple_apply(const Curve* C, const Place& P, const FuncElem& a1p,
                             const FuncElem& a2p, const FuncElem& a1m) {
  long t = C->genus(), d = P.degree();
  TKL_REQUIRE(2 * t + 1 <= d && d <= 3 * t, "triple: deg P out of range");
  TKL_REQUIRE(!special_set(C, SetKind::S).contains(P), "triple: P is special");
  TKL_REQUIRE(detail::in_rr(a1p, 2 * t - 1) && detail::in_rr(a2p, 2 * t - 1),
              "triple: plus-entry not in RR_{2t-1}^*");
  TKL_REQUIRE(detail::in_rr(a1m, 3 * t), "triple: minus-entry not in RR_{3t}^*");
  const GeneratorRecord& rec = make_f_P(C, P);
  const FuncElem& fP = rec.fP();
  FuncElem h = fP * rec.fPprime();

  PairStep out(C, LemmaTag::Triple);
  detail::rd_add(out.step.consumed, fP, a1p, 1);
  detail::rd_add(out.step.consumed, fP, a2p, 1);
  detail::rd_add(out.step.consumed, fP, a1m, -1);
  K2Elem cur = out.step.consumed;

  FuncElem prod = a1p * a2p;
  K2Elem bil(C);
  detail::rd_add(bil, fP, prod, 1);
  detail::rd_add(bil, fP, a1p, -1);
  detail::rd_add(bil, fP, a2p, -1);
  cur += bil;

  const RRBasis& B3t = rr_basis(C, 3 * t);
  const RRBasis& cod = rr_basis(C, 7 * t);
  detail::PairRewrite pr =
      detail::pair_rewrite(C, P, prod, a1m, h, {{fP, 1}, {rec.fPprime(), 1}}, B3t, B3t,
                           B3t, cod, "3t3t3t");
  cur += pr.delta;

  out.bplus = pr.bplus;
  out.bminus = pr.bminus;
  out.step.produced = cur;
  out.step.witnesses = {pr.witness};
  out.step.memberships.emplace_back(out.bplus, 3 * t, Divisor(C), "b+ in RR_{3t}");
  out.step.memberships.emplace_back(out.bminus, 3 * t, Divisor(C), "b- in RR_{3t}");
  if (!pr.g.is_zero())
    out.step.memberships.emplace_back(pr.g, 3 * t, Divisor(C), "g in RR_{3t}");
  out.step.memberships.emplace_back(rec.fPprime(), 2 * t, rec.DP(),
                                    "f_P' in RR_{2t}(D_P)");
  out.step.memberships.emplace_back(h, d + t,
                                    Divisor::single(P, 1) + rec.DPprime(),
                                    "f_P f_P' shape");
  out.step.note = "3t3t3t at " + P.to_string();
  return out;
}

// ---------------------------------------------------------------------------
// Normal forms

enum class ReduceMode { Degree, RR };

inline const char* reduce_mode_name(ReduceMode m) {
  return m == ReduceMode::Degree ? "degree" : "rr";
}

inline ReduceMode reduce_mode_from_name(const std::string& s) {
  if (s == "degree") return ReduceMode::Degree;
  if (s == "rr") return ReduceMode::RR;
  TKL_REQUIRE(false, "unknown reduction mode: \"" + s + "\" (degree | rr)");
  return ReduceMode::Degree;  // unreachable
}

// One collected pair: the class of {f_P, lplus} - {f_P, lminus} with both
// entries units at P in RR_{space_d}^*.
struct CanonicalPair {
  Place P;
  FuncElem lplus, lminus;
  long space_d;
};

struct NormalForm {
  const Curve* curve;
  ReduceMode mode;
  K2Elem residual;
  std::string residual_tag;  // "F3t" (degree mode) or "L3t" (rr mode)
  std::vector<CanonicalPair> pairs;
  std::vector<RewriteStep> log;

  explicit NormalForm(const Curve* C, ReduceMode m)
      : curve(C), mode(m), residual(C),
        residual_tag(m == ReduceMode::Degree ? "F3t" : "L3t") {}

  K2Elem assembled() const {
    K2Elem out = residual;
    for (const CanonicalPair& p : pairs) {
      const FuncElem& fP = make_f_P(curve, p.P).fP();
      detail::rd_add(out, fP, p.lplus, 1);
      detail::rd_add(out, fP, p.lminus, -1);
    }
    return out;
  }
};

namespace detail {

// Working state of a normalization run.
struct WorkState {
  const Curve* C;
  ReduceMode mode;
  long t;
  // {f_P, f_Q} content, keyed with the dominant place first
  std::map<std::pair<Place, Place>, long> typeA;
  // {f_P, l} content per place: net coefficient of each l
  std::map<Place, std::map<FuncElem, long>> typeB;
  K2Elem residual;
  std::vector<RewriteStep> log;
  // symbols waiting to be re-injected (factored into fresh generator content)
  std::vector<std::tuple<FuncElem, FuncElem, long>> pending;

  WorkState(const Curve* C_, ReduceMode m)
      : C(C_), mode(m), t(C_->genus()), residual(C_) {}

  const FuncElem& fP(const Place& P) const { return make_f_P(C, P).fP(); }

  static std::pair<std::pair<Place, Place>, int> orient_key(const Place& P,
                                                            const Place& Q) {
    bool dominant = P.degree() > Q.degree() || (P.degree() == Q.degree() && !(P < Q));
    if (dominant) return {{P, Q}, 1};
    return {{Q, P}, -1};
  }

  void add_typeA(const Place& P, const Place& Q, long c) {
    if (c == 0) return;
    auto [key, sign] = orient_key(P, Q);
    long& v = typeA[key];
    v += sign * c;
    if (v == 0) typeA.erase(key);
  }

  void add_typeB(const Place& P, const FuncElem& l, long c) {
    if (c == 0 || l.is_one()) return;
    long& v = typeB[P][l];
    v += c;
    if (v == 0) {
      typeB[P].erase(l);
      if (typeB[P].empty()) typeB.erase(P);
    }
  }

  // Split produced content into generator pairs, generator-against-function
  // entries, RR_{3t} residual pairs, and symbols that need re-injection.
  // `hints` lists the places whose generators can occur literally.
  void route(const K2Elem& content, const std::vector<Place>& hints) {
    for (const auto& [sym, c] : content.terms()) {
      const FuncElem& a = sym.f();
      const FuncElem& b = sym.g();
      const Place* Ra = nullptr;
      const Place* Rb = nullptr;
      for (const Place& H : hints) {
        const FuncElem& fH = fP(H);
        if (a == fH) Ra = &H;
        if (b == fH) Rb = &H;
      }
      if (Ra != nullptr && Rb != nullptr) {
        TKL_ASSERT(!(*Ra == *Rb), "route: unreduced self-pair");
        add_typeA(*Ra, *Rb, c);
      } else if (Ra != nullptr) {
        add_typeB(*Ra, b, c);
      } else if (Rb != nullptr) {
        add_typeB(*Rb, a, -c);  // {l, f_P} = -{f_P, l} under the tame symbol
      } else if (in_rr(a, 3 * t) && in_rr(b, 3 * t)) {
        residual.add(sym, c);
      } else {
        pending.emplace_back(a, b, c);
      }
    }
  }

  // Factor both entries into generator content and RR_{3t} words, distribute
  // bilinearly, and log the whole trade as one COLLECT step.
  void inject(const FuncElem& a, const FuncElem& b, long coeff);

  void drain() {
    while (!pending.empty()) {
      auto [a, b, c] = pending.back();
      pending.pop_back();
      inject(a, b, c);
    }
  }
};

// f as (word in RR_{3t}^*) x (product of retained generators f_R^e).
struct Atomized {
  Word word;
  std::vector<std::pair<Place, long>> atoms;
  std::vector<WitnessIdentity> witnesses;
  std::vector<MembershipClaim> memberships;
};

inline Atomized atomize(const Curve* C, const FuncElem& f, ReduceMode mode) {
  long t = C->genus();
  Atomized out;
  Factorization fac = factorize(C, f);

  Word w0 = rewrite_small_support(C, fac.fprime);
  for (const auto& [base, e] : w0) {
    out.word.push_back({base, e});
    out.memberships.emplace_back(base, 3 * t, Divisor(C), "3t.1 word base in RR_{3t}");
  }

  for (const auto& [R, e] : fac.factors) {
    long dR = R.degree();
    bool dissolve = dR <= 2 * t || (mode == ReduceMode::RR && dR <= 3 * t &&
                                    special_set(C, SetKind::S).contains(R));
    if (!dissolve) {
      out.atoms.push_back({R, e});
      const GeneratorRecord& rec = make_f_P(C, R);
      out.memberships.emplace_back(rec.fP(), dR - t,
                                   Divisor::single(R, 1) - rec.DP(), "f_P shape");
      continue;
    }
    long dprime = std::min(dR + t, 3 * t);
    Word wR = fP_word(C, R, dprime);
    for (const auto& [base, ex] : wR) {
      out.word.push_back({base, ex * e});
      out.memberships.emplace_back(base, 3 * t, Divisor(C), "3t.3 word base in RR_{3t}");
    }
  }

  FuncElem prod = word_product(C, out.word);
  for (const auto& [R, e] : out.atoms) prod = prod * make_f_P(C, R).fP().pow(e);
  TKL_ASSERT(prod == f, "atomize: factor product mismatch");
  out.witnesses.push_back({"factor word: f = prod of bases and generators", {f, -prod}});
  return out;
}

inline void WorkState::inject(const FuncElem& a, const FuncElem& b, long coeff) {
  if (coeff == 0) return;
  RewriteStep st(C, LemmaTag::Collect);
  rd_add(st.consumed, a, b, coeff);
  if (st.consumed.empty()) return;  // {1, b}-shaped input carries no content

  Atomized A = atomize(C, a, mode);
  Atomized B = atomize(C, b, mode);

  K2Elem prod(C);
  for (const auto& [x, ex] : A.word)
    for (const auto& [y, ey] : B.word) rd_add(prod, x, y, coeff * ex * ey);
  for (const auto& [x, ex] : A.word)
    for (const auto& [R, eR] : B.atoms) rd_add(prod, x, fP(R), coeff * ex * eR);
  for (const auto& [R, eR] : A.atoms)
    for (const auto& [y, ey] : B.word) rd_add(prod, fP(R), y, coeff * eR * ey);
  for (const auto& [Ra, ea] : A.atoms)
    for (const auto& [Rb, eb] : B.atoms) rd_add(prod, fP(Ra), fP(Rb), coeff * ea * eb);

  st.produced = prod;
  st.witnesses = A.witnesses;
  st.witnesses.insert(st.witnesses.end(), B.witnesses.begin(), B.witnesses.end());
  st.memberships = A.memberships;
  st.memberships.insert(st.memberships.end(), B.memberships.begin(),
                        B.memberships.end());
  st.note = "collect {" + a.to_string() + ", " + b.to_string() + "}";
  log.push_back(std::move(st));

  std::vector<Place> hints;
  for (const auto& [R, e] : A.atoms) hints.push_back(R);
  for (const auto& [R, e] : B.atoms) hints.push_back(R);
  route(prod, hints);
}

// Collect all {f_P, l} content at one place into a single canonical pair.
struct PlaceCollect {
  bool has_pair = false;
  FuncElem lplus, lminus;
  std::vector<RewriteStep> steps;
  K2Elem spill;  // content away from P, for the caller to route

  explicit PlaceCollect(const Curve* C)
      : lplus(FuncElem::one(C)), lminus(FuncElem::one(C)), spill(C) {}
};

inline PlaceCollect collect_at_place(const Curve* C, const Place& P,
                                     std::map<FuncElem, long> net, bool rr_stratum) {
  long t = C->genus(), d = P.degree();
  const GeneratorRecord& rec = make_f_P(C, P);
  const FuncElem& fP = rec.fP();
  FuncElem one = FuncElem::one(C);
  PlaceCollect out(C);

  auto purge = [&] {
    net.erase(one);
    for (auto it = net.begin(); it != net.end();)
      it = it->second == 0 ? net.erase(it) : std::next(it);
  };
  // Fold step output back into the state: {f_P, x} terms update the net
  // coefficients, everything else spills to the caller.
  auto absorb = [&](const K2Elem& produced, long sign) {
    for (const auto& [sym, c] : produced.terms()) {
      if (sym.f() == fP)
        net[sym.g()] += sign * c;
      else if (sym.g() == fP)
        net[sym.f()] -= sign * c;
      else
        out.spill.add(sym, sign * c);
    }
    purge();
  };
  auto record = [&](RewriteStep st, long sign) {
    scale_step(st, sign);
    out.steps.push_back(std::move(st));
  };

  purge();
  long rounds = 0, mass0 = 0;
  for (const auto& [l, c] : net) mass0 += std::abs(c);

  while (true) {
    TKL_ASSERT(++rounds < 64 + 4 * mass0, "collect loop failed to make progress");
    long pos = 0, neg = 0;
    for (const auto& [l, c] : net) (c > 0 ? pos : neg) += std::abs(c);
    if (pos + neg <= 1 + (pos > 0 && neg > 0 ? 1 : 0)) break;  // terminal shapes

    long sign = pos >= 2 ? 1 : -1;  // mirror when only the minus side is long
    // pick two entries from the long side and one from the short side
    std::vector<FuncElem> a;
    for (const auto& [l, c] : net) {
      long avail = sign * c;
      for (long i = 0; i < avail && (long)a.size() < 2; ++i) a.push_back(l);
      if (a.size() == 2) break;
    }
    TKL_ASSERT(a.size() == 2, "collect: long side shorter than expected");
    FuncElem b1 = one;
    for (const auto& [l, c] : net)
      if (sign * c < 0) {
        b1 = l;
        break;
      }
    net[a[0]] -= sign;
    net[a[1]] -= sign;
    net[b1] += sign;
    purge();

    if (!rr_stratum) {
      Collect123 cc = collect_123(C, P, a[0], a[1], b1);
      absorb(cc.step.produced, sign);
      record(std::move(cc.step), sign);
    } else {
      // shrink (p, m) to RR_e^*, then to an (RR_{2t-1}, RR_{3t}) pair
      long e = (d + 2) / 2 + t - 1;
      auto shrink = [&](FuncElem p, FuncElem m) {
        for (long eps = 3 * t; eps > e; --eps) {
          PairStep fs = flem_apply(C, P, p, m, eps);
          absorb(fs.step.produced, sign);
          net[fs.bplus] -= sign;  // keep the working pair in hand, not in net
          net[fs.bminus] += sign;
          purge();
          p = fs.bplus;
          m = fs.bminus;
          record(std::move(fs.step), sign);
        }
        PairStep ls = llmm_apply(C, P, p, m);
        absorb(ls.step.produced, sign);
        net[ls.bplus] -= sign;
        net[ls.bminus] += sign;
        purge();
        record(std::move(ls.step), sign);
        return std::make_pair(ls.bplus, ls.bminus);
      };
      auto [q1, n1] = shrink(a[0], b1);
      auto [q2, n2] = shrink(a[1], n1);
      PairStep ts = triple_apply(C, P, q1, q2, n2);
      absorb(ts.step.produced, sign);
      record(std::move(ts.step), sign);
    }
  }

  long pos = 0, neg = 0;
  for (const auto& [l, c] : net) (c > 0 ? pos : neg) += std::abs(c);
  TKL_ASSERT(pos <= 1 && neg <= 1, "collect: not reduced to a single pair");
  if (pos + neg == 0) return out;
  out.has_pair = true;
  for (const auto& [l, c] : net) {
    if (c > 0) out.lplus = l;
    if (c < 0) out.lminus = l;
  }
  return out;
}

}  // namespace detail

// Reduce an arbitrary K2 element to normal form.  Degree mode leaves one
// canonical pair per place of degree >= 3t+1 in the support closure and an
// F3t-shaped residual; rr mode continues to 2t+1 with pairs at non-special
// places and an L3t-shaped residual.
inline NormalForm normalize(const K2Elem& e, ReduceMode mode) {
  const Curve* C = e.curve();
  long t = C->genus();
  detail::WorkState ws(C, mode);

  for (const auto& [sym, c] : e.terms()) ws.inject(sym.f(), sym.g(), c);
  ws.drain();

  NormalForm nf(C, mode);
  long pair_floor = mode == ReduceMode::Degree ? 3 * t + 1 : 2 * t + 1;

  long guard = 0;
  while (true) {
    TKL_ASSERT(++guard < 4096, "normalize: stratum loop failed to descend");
    long dmax = 0;
    for (const auto& [key, c] : ws.typeA)
      dmax = std::max<long>(dmax, key.first.degree());
    for (const auto& [P, entries] : ws.typeB)
      if (P.degree() >= pair_floor) dmax = std::max<long>(dmax, P.degree());
    if (dmax < 2 * t + 1) break;
    long d = dmax;

    // generator pairs first: they feed same-stratum {f_P, l} content
    std::vector<std::pair<Place, Place>> keys;
    for (const auto& [key, c] : ws.typeA)
      if (key.first.degree() == d) keys.push_back(key);
    for (const auto& key : keys) {
      auto it = ws.typeA.find(key);
      if (it == ws.typeA.end()) continue;
      long c = it->second;
      ws.typeA.erase(it);
      if (c == 0) continue;
      PQReduction pq = pq_reduce(C, key.first, key.second, d >= 3 * t + 1 ? 1 : 2);
      detail::scale_step(pq.step, c);
      // In variant 1 a lower-degree Q contributes {f_Q, l} byproducts whose
      // entries only satisfy RR_{d-1} bounds, too coarse for Q's own stratum;
      // leaving f_Q unrecognized sends them through re-injection instead,
      // which refits all of their content at strictly smaller levels.
      std::vector<Place> hints{key.first};
      if (d <= 3 * t || key.second.degree() == d) hints.push_back(key.second);
      ws.route(pq.step.produced, hints);
      ws.log.push_back(std::move(pq.step));
      ws.drain();
    }

    if (d < pair_floor) continue;

    // then collect each place of exact degree d into one pair
    std::vector<Place> places;
    for (const auto& [P, entries] : ws.typeB)
      if (P.degree() == d && !entries.empty()) places.push_back(P);
    for (const Place& P : places) {
      auto it = ws.typeB.find(P);
      if (it == ws.typeB.end()) continue;
      std::map<FuncElem, long> entries = std::move(it->second);
      ws.typeB.erase(it);
      bool rr_stratum = mode == ReduceMode::RR && d <= 3 * t;
      detail::PlaceCollect pc = detail::collect_at_place(C, P, std::move(entries),
                                                         rr_stratum);
      for (RewriteStep& st : pc.steps) ws.log.push_back(std::move(st));
      if (pc.has_pair)
        nf.pairs.push_back({P, pc.lplus, pc.lminus, rr_stratum ? 3 * t : d - 1});
      ws.route(pc.spill, {});
      ws.drain();
    }
  }

  // leftovers: in degree mode, {f_P, l} content of degree <= 3t is already
  // residual-shaped; nothing else may remain
  TKL_ASSERT(ws.typeA.empty(), "normalize: unreduced generator pairs");
  nf.residual = ws.residual;
  for (const auto& [P, entries] : ws.typeB) {
    TKL_ASSERT(mode == ReduceMode::Degree && P.degree() <= 3 * t,
               "normalize: unreduced place content");
    for (const auto& [l, c] : entries) detail::rd_add(nf.residual, ws.fP(P), l, c);
  }
  nf.log = std::move(ws.log);

  TKL_ASSERT(tame_image(e) == tame_image(nf.assembled()),
             "normalize: tame image drifted");
  return nf;
}

// ---------------------------------------------------------------------------
// Independent re-verification

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> notes;

  void fail(const std::string& s) {
    ok = false;
    notes.push_back(s);
  }
};

inline VerifyReport verify_normal_form(const K2Elem& input, const NormalForm& nf) {
  VerifyReport r;
  const Curve* C = nf.curve;
  if (input.curve() != C) {
    r.fail("curve mismatch");
    return r;
  }
  long t = C->genus();

  for (std::size_t i = 0; i < nf.log.size(); ++i)
    if (!verify_step(nf.log[i]))
      r.fail("step " + std::to_string(i + 1) + " (" +
             lemma_tag_name(nf.log[i].tag) + ") failed");

  long pair_floor = nf.mode == ReduceMode::Degree ? 3 * t + 1 : 2 * t + 1;
  for (const CanonicalPair& p : nf.pairs) {
    long d = p.P.degree();
    std::string at = " at " + p.P.to_string();
    if (d < pair_floor) r.fail("pair below stratum floor" + at);
    bool rr_stratum = nf.mode == ReduceMode::RR && d <= 3 * t;
    if (rr_stratum && special_set(C, SetKind::S).contains(p.P))
      r.fail("pair at special place" + at);
    long expect = rr_stratum ? 3 * t : d - 1;
    if (p.space_d != expect) r.fail("pair space mismatch" + at);
    if (!detail::in_rr(p.lplus, p.space_d) || !detail::in_rr(p.lminus, p.space_d))
      r.fail("pair entry outside its space" + at);
    else if (eval_at(p.lplus, p.P).is_zero() || eval_at(p.lminus, p.P).is_zero())
      r.fail("pair entry vanishes" + at);
  }

  // residual shape: L3t demands RR_{3t} pairs, F3t additionally admits
  // {f_R, l} with 2t+1 <= deg R <= 3t and l in RR_{3t}^*
  auto fR_of = [&](const FuncElem& x) -> const Place* {
    for (const auto& [Q, m] : principal_divisor_cached(x).entries()) {
      if (Q.is_O() || m <= 0) continue;
      if (Q.degree() < 2 * t + 1 || Q.degree() > 3 * t) continue;
      if (x == make_f_P(C, Q).fP()) {
        // the canonical generator record is cached, so the address is stable
        return &make_f_P(C, Q).P();
      }
    }
    return nullptr;
  };
  for (const auto& [sym, c] : nf.residual.terms()) {
    bool a3 = detail::in_rr(sym.f(), 3 * t), b3 = detail::in_rr(sym.g(), 3 * t);
    if (a3 && b3) continue;
    bool ok = false;
    if (nf.residual_tag == "F3t" && !a3 && b3) ok = fR_of(sym.f()) != nullptr;
    if (nf.residual_tag == "F3t" && a3 && !b3) ok = fR_of(sym.g()) != nullptr;
    if (!ok) r.fail("residual symbol outside " + nf.residual_tag + ": " + sym.to_string());
  }

  if (!(tame_image(input) == tame_image(nf.assembled())))
    r.fail("tame image of the assembled normal form differs from the input");
  return r;
}

// ---------------------------------------------------------------------------
// Cokernel preimages

// An element of K2(F) whose tame image equals the prescribed unit at every
// requested place and is trivial at every other place outside Stilde(D).
// Each round fixes the highest-degree discrepancy P with a single symbol
// {ftilde_P, l1/l2}: in the large-degree regime the twistors l1, l2 come from
// L(mD) with m = floor((d-1)/e), which evaluates injectively into k(P) and
// contributes nothing at other places of degree >= d; otherwise they come
// from L(nD), whose zeroes all lie in Stilde(D).
inline K2Elem coker_preimage(const Curve* C, const Divisor& D,
                             const std::map<Place, FieldElem>& targets) {
  long t = C->genus(), e = D.degree();
  TKL_REQUIRE(D.is_effective() && e >= 1, "coker_preimage: D must be effective, deg >= 1");
  const SpecialSet& SS = special_set(C, SetKind::Stilde, D);
  for (const auto& [P, xi] : targets) {
    TKL_REQUIRE(!SS.contains(P), "coker_preimage: target place in Stilde");
    TKL_REQUIRE(!xi.is_zero(), "coker_preimage: target value must be a unit");
    TKL_REQUIRE(xi.field() == P.residue_field(),
                "coker_preimage: target value not in k(P)");
  }

  K2Elem acc(C);
  long guard = 0;
  while (true) {
    TKL_ASSERT(++guard < 1024, "coker_preimage: failed to converge");
    TameImage img = tame_image(acc);
    // highest-degree place outside Stilde where the image misses its target
    std::map<Place, FieldElem> want;
    for (const auto& [P, xi] : targets) want.emplace(P, xi);
    for (const auto& [P, v] : img.values())
      if (!SS.contains(P) && want.find(P) == want.end())
        want.emplace(P, FieldElem::one(P.residue_field()));
    const Place* next = nullptr;
    FieldElem xi = FieldElem::one(C->field());
    for (const auto& [P, w] : want) {
      FieldElem cur = img.value_at(P);
      if (cur == w) continue;
      if (next == nullptr || P.degree() > next->degree()) {
        next = &P;
        xi = w * cur.inv();
      }
    }
    if (next == nullptr) break;
    const Place& P = *next;
    long d = P.degree();

    const CokerGeneratorRecord& rec = make_ftilde_P(C, D, P);
    bool large = d >= 2 * t + 2 * e - 1;
    long m = large ? (d - 1) / e : rec.n();
    if (large) {
      TKL_ASSERT(m * e < d && 2 * m * e > d + 2 * t - 2,
                 "coker_preimage: twist degree out of range");
    }
    const RRBasis& V = rr_of_divisor(C, D * m);
    auto [l1, l2] = vw_solve(V, V, P, xi);
    // T_P({ftilde_P, l1/l2}) = l2(P)/l1(P) = xi
    acc += K2Elem::single(rec.ftilde(), l1 / l2);
  }
  return acc;
}

}  // namespace tkl
