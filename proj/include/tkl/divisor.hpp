#pragma once
// Divisors: finite formal Z-combinations of places, plus principal divisors.
//
// The principal divisor of f is assembled from an exhaustive candidate list:
// on the projective line the candidates are the irreducible factors of the
// numerator and denominator; on a Weierstrass curve they are the places above
// the irreducible factors of the norms of numerator and denominator, plus O.
// Each candidate's multiplicity comes from ord_at, and deg (f) = 0 is
// asserted at the end as a global consistency check.

#include <limits>

#include "tkl/local.hpp"

namespace tkl {

class Divisor {
 public:
  explicit Divisor(const Curve* C) : C_(C) {}
  static Divisor single(const Place& P, long mult = 1) {
    Divisor d(P.curve());
    d.add(P, mult);
    return d;
  }

  const Curve* curve() const { return C_; }
  const std::map<Place, long>& entries() const { return m_; }
  bool is_zero() const { return m_.empty(); }

  long ord(const Place& P) const {
    auto it = m_.find(P);
    return it == m_.end() ? 0 : it->second;
  }
  void add(const Place& P, long mult) {
    TKL_ASSERT(P.curve() == C_, "place from a different curve");
    if (mult == 0) return;
    auto [it, fresh] = m_.emplace(P, 0);
    it->second += mult;
    if (it->second == 0) m_.erase(it);
  }

  long degree() const {
    long d = 0;
    for (const auto& [P, m] : m_) d += m * P.degree();
    return d;
  }
  bool is_effective() const {
    for (const auto& [P, m] : m_)
      if (m < 0) return false;
    return true;
  }
  // largest degree appearing in the support (0 for the zero divisor)
  int max_support_degree() const {
    int d = 0;
    for (const auto& [P, m] : m_) d = std::max(d, P.degree());
    return d;
  }

  Divisor operator+(const Divisor& o) const {
    Divisor r = *this;
    for (const auto& [P, m] : o.m_) r.add(P, m);
    return r;
  }
  Divisor operator-(const Divisor& o) const {
    Divisor r = *this;
    for (const auto& [P, m] : o.m_) r.add(P, -m);
    return r;
  }
  Divisor operator-() const {
    Divisor r(C_);
    for (const auto& [P, m] : m_) r.add(P, -m);
    return r;
  }
  Divisor operator*(long s) const {
    Divisor r(C_);
    if (s != 0)
      for (const auto& [P, m] : m_) r.add(P, s * m);
    return r;
  }

  // positive part (zeros) and negative part (poles, returned effective)
  Divisor positive_part() const {
    Divisor r(C_);
    for (const auto& [P, m] : m_)
      if (m > 0) r.add(P, m);
    return r;
  }
  Divisor negative_part() const {
    Divisor r(C_);
    for (const auto& [P, m] : m_)
      if (m < 0) r.add(P, -m);
    return r;
  }

  bool operator==(const Divisor& o) const { return C_ == o.C_ && m_ == o.m_; }
  bool operator!=(const Divisor& o) const { return !(*this == o); }
  // arbitrary but deterministic order, so divisors can key memo maps
  bool operator<(const Divisor& o) const {
    TKL_ASSERT(C_ == o.C_, "comparing divisors on different curves");
    return m_ < o.m_;
  }

  std::string to_string() const {
    if (m_.empty()) return "0";
    std::string s;
    for (const auto& [P, m] : m_) {
      if (!s.empty()) s += " + ";
      if (m != 1) s += std::to_string(m) + "*";
      s += "(" + P.to_string() + ")";
    }
    return s;
  }

 private:
  const Curve* C_;
  std::map<Place, long> m_;
};

namespace detail {

// ord_O of the integral element a + b y (not both zero).  The orders of a(x)
// and b(x) y at O have opposite parity, so no cancellation is possible.
inline long ord_O_integral(const Poly& a, const Poly& b) {
  long oa = a.is_zero() ? std::numeric_limits<long>::max() : -2 * a.deg();
  long ob = b.is_zero() ? std::numeric_limits<long>::max() : -(3 + 2 * b.deg());
  return std::min(oa, ob);
}

// divisor of the integral element a + b y on a Weierstrass curve
inline Divisor divisor_of_integral(const Curve* C, const Poly& a, const Poly& b) {
  Divisor out(C);
  FuncElem N = FuncElem::make(C, a, b, Poly::one(C->field()));
  TKL_ASSERT(!N.is_zero(), "divisor of the zero element");
  if (N.is_constant()) return out;

  Poly norm = b.is_zero() ? a : a * a - a * b * C->polyA() - b * b * C->polyR();
  for (const auto& [pi, mult] : factor_poly(norm)) {
    for (const auto& [P, e] : places_above(C, pi)) {
      long o = ord_at(N, P);
      if (o != 0) out.add(P, o);
    }
  }
  out.add(place_O(C), ord_O_integral(a, b));
  return out;
}

}  // namespace detail

inline Divisor principal_divisor(const FuncElem& f) {
  TKL_REQUIRE(!f.is_zero(), "principal divisor of zero");
  const Curve* C = f.curve();
  Divisor out(C);
  if (C->model() == Model::P1) {
    if (f.num_a().deg() >= 1)
      for (const auto& [pi, mult] : factor_poly(f.num_a()))
        out.add(Place::p1_finite(C, pi), mult);
    if (f.den().deg() >= 1)
      for (const auto& [pi, mult] : factor_poly(f.den()))
        out.add(Place::p1_finite(C, pi), -mult);
    out.add(Place::p1_infinity(C), (long)f.den().deg() - (long)f.num_a().deg());
  } else {
    out = detail::divisor_of_integral(C, f.num_a(), f.num_b());
    if (f.den().deg() >= 1)
      out = out - detail::divisor_of_integral(C, f.den(), Poly::zero(C->field()));
  }
  TKL_ASSERT(out.degree() == 0, "principal divisor has nonzero degree");
  return out;
}

// cached wrapper: principal divisors of generators are queried repeatedly
inline const Divisor& principal_divisor_cached(const FuncElem& f) {
  auto& cache = f.curve()->caches().slot<
      cached_map<FuncElem, std::shared_ptr<const Divisor>>>("principal_divisors");
  if (auto hit = cache.find(f)) return **hit;
  return *cache.store(f, std::make_shared<const Divisor>(principal_divisor(f)));
}

}  // namespace tkl
