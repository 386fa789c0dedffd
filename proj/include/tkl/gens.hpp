#pragma once

// Distinguished generators attached to places, the multiplicative
// factorization through them, and the special place sets S', S and
// S-tilde.
//
// For a place P != O of degree d >= t+1 (t the genus), the space
// L((t-d)(O) + (P)) is nonzero; its canonical element g pins
//
//   f_P = 1/g,   (f_P) = (P) - D_P - (d-t)(O),
//
// with D_P = (g) + (P) + (t-d)(O) effective of degree t.  Since the
// defining Riemann-Roch space can have dimension > 1, the canonical
// nullspace choice is what makes f_P (and everything downstream that
// consumes it) reproducible.  A companion f'_P is the canonical nonzero
// element of RR_{2t}(D_P), with (f'_P) = D_P + D'_P - 2t(O).
//
// The same recipe relative to an effective divisor D of degree e gives
// ftilde_P = 1/g for the canonical g in L(ceil((t-d)/e) D + (P)), used by
// the cokernel preimage construction.

#include <memory>
#include <utility>
#include <vector>

#include "tkl/rr.hpp"

namespace tkl {

namespace detail {

inline long floordiv(long a, long b) {
  TKL_ASSERT(b > 0, "floordiv by nonpositive");
  long q = a / b;
  if (a % b != 0 && a < 0) --q;
  return q;
}

}  // namespace detail

enum class SetKind { Sprime, S, Stilde };

inline const char* set_kind_name(SetKind k) {
  switch (k) {
    case SetKind::Sprime: return "Sprime";
    case SetKind::S: return "S";
    default: return "Stilde";
  }
}

inline SetKind set_kind_from_name(const std::string& s) {
  if (s == "Sprime") return SetKind::Sprime;
  if (s == "S") return SetKind::S;
  if (s == "Stilde") return SetKind::Stilde;
  TKL_REQUIRE(false, "unknown special-set kind: \"" + s + "\" (Sprime | S | Stilde)");
  return SetKind::Sprime;  // unreachable
}

// a resolved special place set; for Stilde the defining divisor D and the
// exponent n (least with ne > 2t+e-2) are kept alongside
class SpecialSet {
 public:
  SetKind kind() const { return kind_; }
  const std::vector<Place>& places() const { return places_; }
  const Divisor& D() const { return D_; }
  long e() const { return e_; }
  long n() const { return n_; }

  bool contains(const Place& P) const {
    return std::binary_search(places_.begin(), places_.end(), P);
  }

 private:
  friend SpecialSet compute_special_set(const Curve*, SetKind, const Divisor*);
  SpecialSet() : D_(nullptr) {}

  SetKind kind_ = SetKind::Sprime;
  std::vector<Place> places_;
  Divisor D_;
  long e_ = 0, n_ = 0;
};

inline SpecialSet compute_special_set(const Curve* C, SetKind kind, const Divisor* D) {
  const long t = C->genus();
  SpecialSet out;
  out.kind_ = kind;
  if (kind == SetKind::Sprime) {
    // {O} united with places where RR_{2t}((P)) is nonzero; the sandwich
    // bounds the search to C_{<= 2t}
    out.places_.push_back(place_O(C));
    for (const Place& P : places_up_to(C, (int)(2 * t)))
      if (!P.is_O() && rr_basis(C, 2 * t, Divisor::single(P, 1)).dim() > 0)
        out.places_.push_back(P);
  } else if (kind == SetKind::S) {
    for (const Place& P : places_up_to(C, (int)(3 * t)))
      if (rr_basis(C, 3 * t, Divisor::single(P, 1)).dim() > 0) out.places_.push_back(P);
  } else {
    TKL_REQUIRE(D != nullptr, "Stilde needs a divisor D");
    TKL_REQUIRE(D->is_effective() && D->degree() >= 1,
                "Stilde needs an effective divisor of degree >= 1");
    out.D_ = *D;
    out.e_ = D->degree();
    out.n_ = detail::floordiv(2 * t + out.e_ - 2, out.e_) + 1;
    for (const auto& [P, m] : D->entries()) out.places_.push_back(P);
    for (const Place& P : places_up_to(C, (int)(2 * t + 2 * out.e_ - 2))) {
      if (D->ord(P) != 0) continue;
      Divisor G = *D * out.n_ - Divisor::single(P, 1);
      if (rr_of_divisor(C, G).dim() > 0) out.places_.push_back(P);
    }
  }
  std::sort(out.places_.begin(), out.places_.end());
  out.places_.erase(std::unique(out.places_.begin(), out.places_.end()), out.places_.end());

  // sandwich lower bounds are theorems; check them on the way out
  if (kind == SetKind::Sprime || kind == SetKind::S) {
    long low = kind == SetKind::Sprime ? t : 2 * t;
    for (const Place& P : places_up_to(C, (int)low))
      TKL_ASSERT(out.contains(P), "special set misses a low-degree place");
    if (kind == SetKind::Sprime)
      TKL_ASSERT(out.contains(place_O(C)), "S' must contain O");
  } else {
    for (const Place& P : places_up_to(C, (int)(t + out.e_ - 1)))
      TKL_ASSERT(out.contains(P), "Stilde misses a low-degree place");
    for (const Place& P : out.places_)
      TKL_ASSERT(D->ord(P) != 0 || P.degree() <= out.n_ * out.e_,
                 "Stilde member beyond the degree bound");
  }
  return out;
}

inline const SpecialSet& special_set(const Curve* C, SetKind kind) {
  TKL_REQUIRE(kind != SetKind::Stilde, "Stilde needs a divisor D");
  auto& cache =
      C->caches().slot<cached_map<int, std::shared_ptr<const SpecialSet>>>("special_sets");
  int key = kind == SetKind::Sprime ? 0 : 1;
  if (auto hit = cache.find(key)) return **hit;
  return *cache.store(
      key, std::make_shared<const SpecialSet>(compute_special_set(C, kind, nullptr)));
}

inline const SpecialSet& special_set(const Curve* C, SetKind kind, const Divisor& D) {
  TKL_REQUIRE(kind == SetKind::Stilde, "divisor argument is only for Stilde");
  auto& cache = C->caches()
                    .slot<cached_map<Divisor, std::shared_ptr<const SpecialSet>>>(
                        "special_sets_stilde");
  if (auto hit = cache.find(D)) return **hit;
  return *cache.store(
      D, std::make_shared<const SpecialSet>(compute_special_set(C, kind, &D)));
}

// the fixed generator data of a place P != O with deg(P) >= t+1
class GeneratorRecord {
 public:
  const Place& P() const { return P_; }
  long d() const { return P_.degree(); }
  const FuncElem& fP() const { return fP_; }
  const Divisor& DP() const { return DP_; }
  const FuncElem& fPprime() const { return fPp_; }
  const Divisor& DPprime() const { return DPp_; }

 private:
  friend const GeneratorRecord& make_f_P(const Curve*, const Place&);
  GeneratorRecord(Place P, FuncElem fP, Divisor DP, FuncElem fPp, Divisor DPp)
      : P_(std::move(P)), fP_(std::move(fP)), DP_(std::move(DP)),
        fPp_(std::move(fPp)), DPp_(std::move(DPp)) {}

  Place P_;
  FuncElem fP_;
  Divisor DP_;
  FuncElem fPp_;
  Divisor DPp_;
};

// memoized: the downstream factorization identity needs the same fixed
// choices globally, so records live in the curve's cache
inline const GeneratorRecord& make_f_P(const Curve* C, const Place& P) {
  TKL_REQUIRE(!P.is_O(), "f_P is defined for places P != O");
  const long t = C->genus(), d = P.degree();
  TKL_REQUIRE(d >= t + 1, "f_P needs deg(P) >= genus + 1");

  auto& cache =
      C->caches().slot<cached_map<Place, std::shared_ptr<const GeneratorRecord>>>(
          "generator_records");
  if (auto hit = cache.find(P)) return **hit;

  const RRBasis& G = rr_basis(C, t - d, -Divisor::single(P, 1));  // L((t-d)(O) + (P))
  TKL_ASSERT(G.dim() >= 1, "L((t-d)(O) + (P)) must be nonzero");
  FuncElem g = G.basis()[0];
  Divisor DP = principal_divisor(g) + Divisor::single(P, 1) +
               Divisor::single(place_O(C), t - d);
  TKL_ASSERT(DP.is_effective() && DP.degree() == t, "D_P must be effective of degree t");
  FuncElem fP = g.inv();
  TKL_ASSERT(principal_divisor(fP) ==
                 Divisor::single(P, 1) - DP - Divisor::single(place_O(C), d - t),
             "divisor identity for f_P");

  const RRBasis& F = rr_basis(C, 2 * t, DP);
  TKL_ASSERT(F.dim() >= 1, "RR_{2t}(D_P) must be nonzero");
  FuncElem fPp = F.basis()[0];
  Divisor DPp =
      principal_divisor(fPp) + Divisor::single(place_O(C), 2 * t) - DP;
  TKL_ASSERT(DPp.is_effective() && DPp.degree() == t,
             "D'_P must be effective of degree t");

  // among |(f_P)| only P itself may fall outside S'
  const SpecialSet& sp = special_set(C, SetKind::Sprime);
  Divisor dfP = principal_divisor(fP);
  for (const auto& [Q, m] : dfP.entries())
    TKL_ASSERT(Q == P || sp.contains(Q), "support of (f_P) escapes S' beyond P");

  auto rec = std::shared_ptr<const GeneratorRecord>(new GeneratorRecord(
      P, std::move(fP), std::move(DP), std::move(fPp), std::move(DPp)));
  return *cache.store(P, std::move(rec));
}

// generator data relative to an effective divisor D (degree e >= 1): the
// canonical g in L(ceil((t-d)/e) D + (P)) yields ftilde_P = 1/g
class CokerGeneratorRecord {
 public:
  const Divisor& D() const { return D_; }
  long e() const { return e_; }
  long n() const { return n_; }
  const Place& P() const { return P_; }
  const FuncElem& ftilde() const { return ft_; }
  const Divisor& DP() const { return DP_; }
  long m() const { return m_; }  // the coefficient ceil((t-d)/e)

 private:
  friend const CokerGeneratorRecord& make_ftilde_P(const Curve*, const Divisor&,
                                                   const Place&);
  CokerGeneratorRecord(Divisor D, long e, long n, Place P, FuncElem ft, Divisor DP,
                       long m)
      : D_(std::move(D)), e_(e), n_(n), P_(std::move(P)), ft_(std::move(ft)),
        DP_(std::move(DP)), m_(m) {}

  Divisor D_;
  long e_, n_;
  Place P_;
  FuncElem ft_;
  Divisor DP_;
  long m_;
};

inline const CokerGeneratorRecord& make_ftilde_P(const Curve* C, const Divisor& D,
                                                 const Place& P) {
  TKL_REQUIRE(D.is_effective() && D.degree() >= 1,
              "ftilde_P needs an effective divisor of degree >= 1");
  TKL_REQUIRE(D.ord(P) == 0, "ftilde_P needs P outside |D|");
  const long t = C->genus(), e = D.degree(), d = P.degree();
  TKL_REQUIRE(d >= t + e, "ftilde_P needs deg(P) >= t + deg(D)");

  auto& cache = C->caches()
                    .slot<cached_map<std::pair<Divisor, Place>,
                                     std::shared_ptr<const CokerGeneratorRecord>>>(
                        "coker_generator_records");
  std::pair<Divisor, Place> key{D, P};
  if (auto hit = cache.find(key)) return **hit;

  const long n = detail::floordiv(2 * t + e - 2, e) + 1;
  const long m = -detail::floordiv(d - t, e);  // ceil((t-d)/e)
  Divisor G = D * m + Divisor::single(P, 1);
  const RRBasis& B = rr_of_divisor(C, G);
  TKL_ASSERT(B.dim() >= 1, "L(ceil((t-d)/e) D + (P)) must be nonzero");
  FuncElem g = B.basis()[0];
  Divisor DP = principal_divisor(g) + G;
  TKL_ASSERT(DP.is_effective() && DP.degree() >= t && DP.degree() < t + e,
             "D_P must be effective with t <= deg < t+e");
  FuncElem ft = g.inv();
  TKL_ASSERT(principal_divisor(ft) == Divisor::single(P, 1) - DP + D * m,
             "divisor identity for ftilde_P");
  Divisor dft = principal_divisor(ft);
  for (const auto& [Q, mu] : dft.entries())
    TKL_ASSERT(Q == P || D.ord(Q) != 0 || Q.degree() <= t + e - 1,
               "support of (ftilde_P) escapes {P} | |D| | C_{<= t+e-1}");

  auto rec = std::shared_ptr<const CokerGeneratorRecord>(new CokerGeneratorRecord(
      D, e, n, P, std::move(ft), std::move(DP), m));
  return *cache.store(key, std::move(rec));
}

// multiplicative factorization f = f' * prod f_P^{ord_P(f)} over the
// places P != O of degree >= t+1 in the support of (f); the remainder f'
// has support in C_{<= t}
struct Factorization {
  FuncElem fprime;
  std::vector<std::pair<Place, long>> factors;  // canonical place order
};

inline Factorization factorize(const Curve* C, const FuncElem& f) {
  TKL_REQUIRE(!f.is_zero(), "factorize needs f != 0");
  const long t = C->genus();
  Factorization out{f, {}};
  const Divisor& df = principal_divisor_cached(f);
  for (const auto& [P, m] : df.entries())
    if (!P.is_O() && P.degree() >= t + 1) out.factors.emplace_back(P, m);
  for (const auto& [P, m] : out.factors)
    out.fprime = out.fprime * make_f_P(C, P).fP().pow(-m);

  FuncElem back = out.fprime;
  for (const auto& [P, m] : out.factors) back = back * make_f_P(C, P).fP().pow(m);
  TKL_ASSERT(back == f, "factorization must reconstruct f exactly");
  Divisor dfp = principal_divisor(out.fprime);
  for (const auto& [Q, m] : dfp.entries())
    TKL_ASSERT(Q.degree() <= t, "support of f' escapes C_{<= t}");
  if (t == 0) TKL_ASSERT(out.fprime.is_constant(), "f' must be constant at genus 0");
  return out;
}

}  // namespace tkl
