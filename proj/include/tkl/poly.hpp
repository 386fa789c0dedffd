#pragma once
// Univariate polynomials over a Field, plus the handful of global services
// built on them: irreducibility (Rabin), cached irreducible tables, desk-scale
// factorization by trial division, minimal polynomials and norms through an
// embedding.

#include <map>
#include <string>
#include <vector>

#include "tkl/field.hpp"

namespace tkl {

class Poly {
 public:
  Poly() : f_(nullptr) {}
  explicit Poly(const Field* f) : f_(f) {}
  Poly(const Field* f, std::vector<FieldElem> c) : f_(f), c_(std::move(c)) { trim(); }

  static Poly zero(const Field* f) { return Poly(f); }
  static Poly constant(FieldElem a) {
    Poly r(a.field());
    if (!a.is_zero()) r.c_.push_back(a);
    return r;
  }
  static Poly one(const Field* f) { return constant(FieldElem::one(f)); }
  static Poly x(const Field* f) { return Poly(f, {FieldElem::zero(f), FieldElem::one(f)}); }
  static Poly from_ranks(const Field* f, std::vector<std::int64_t> ranks) {
    std::vector<FieldElem> c;
    c.reserve(ranks.size());
    for (auto r : ranks) c.emplace_back(f, f->unrank(r));
    return Poly(f, std::move(c));
  }

  const Field* field() const { return f_; }
  bool is_zero() const { return c_.empty(); }
  // deg 0 has degree 0 here; callers treat the zero polynomial explicitly
  // (mathematically deg 0 = -infinity, encoded as -1).
  int deg() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<FieldElem>& coeffs() const { return c_; }
  FieldElem coeff(std::size_t i) const {
    return i < c_.size() ? c_[i] : FieldElem::zero(f_);
  }
  FieldElem lead() const {
    TKL_ASSERT(!is_zero(), "leading coefficient of zero polynomial");
    return c_.back();
  }
  bool is_monic() const { return !is_zero() && lead().is_one(); }
  bool is_one() const { return deg() == 0 && c_[0].is_one(); }

  Poly operator+(const Poly& o) const {
    std::vector<FieldElem> r(std::max(c_.size(), o.c_.size()), FieldElem::zero(f_));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(i) + o.coeff(i);
    return Poly(f_, std::move(r));
  }
  Poly operator-(const Poly& o) const {
    std::vector<FieldElem> r(std::max(c_.size(), o.c_.size()), FieldElem::zero(f_));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = coeff(i) - o.coeff(i);
    return Poly(f_, std::move(r));
  }
  Poly operator-() const {
    std::vector<FieldElem> r(c_);
    for (auto& e : r) e = -e;
    return Poly(f_, std::move(r));
  }
  Poly operator*(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly(f_);
    std::vector<FieldElem> r(c_.size() + o.c_.size() - 1, FieldElem::zero(f_));
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i].is_zero()) continue;
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] = r[i + j] + c_[i] * o.c_[j];
    }
    return Poly(f_, std::move(r));
  }
  Poly operator*(const FieldElem& s) const {
    std::vector<FieldElem> r(c_);
    for (auto& e : r) e = e * s;
    return Poly(f_, std::move(r));
  }

  // quotient/remainder; divisor must be nonzero.
  std::pair<Poly, Poly> divmod(const Poly& d) const {
    TKL_REQUIRE(!d.is_zero(), "polynomial division by zero");
    Poly r = *this, q(f_);
    FieldElem li = d.lead().inv();
    if (r.deg() >= d.deg()) q.c_.assign(r.deg() - d.deg() + 1, FieldElem::zero(f_));
    while (!r.is_zero() && r.deg() >= d.deg()) {
      FieldElem s = r.lead() * li;
      int shift = r.deg() - d.deg();
      q.c_[shift] = s;
      for (int i = 0; i <= d.deg(); ++i)
        r.c_[shift + i] = r.c_[shift + i] - s * d.c_[i];
      r.trim();
    }
    q.trim();
    return {q, r};
  }
  Poly operator/(const Poly& d) const { return divmod(d).first; }
  Poly operator%(const Poly& d) const { return divmod(d).second; }

  bool divides(const Poly& other) const { return other.divmod(*this).second.is_zero(); }

  Poly monic() const {
    TKL_ASSERT(!is_zero(), "monic of zero polynomial");
    return *this * lead().inv();
  }

  FieldElem eval(const FieldElem& x) const {
    FieldElem acc = FieldElem::zero(x.field());
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + embed_if_needed(c_[i], x.field());
    return acc;
  }

  bool operator==(const Poly& o) const { return f_ == o.f_ && c_ == o.c_; }
  bool operator!=(const Poly& o) const { return !(*this == o); }
  // rank-lexicographic: by degree, then coefficients from the top down.
  bool operator<(const Poly& o) const {
    if (deg() != o.deg()) return deg() < o.deg();
    for (std::size_t i = c_.size(); i-- > 0;) {
      if (c_[i] != o.c_[i]) return c_[i] < o.c_[i];
    }
    return false;
  }

  // Printer for the expression grammar: variable name supplied by caller.
  std::string to_string(const std::string& var = "x") const {
    if (is_zero()) return "0";
    std::string s;
    bool ext = f_->n > 1;
    for (std::size_t i = c_.size(); i-- > 0;) {
      if (c_[i].is_zero()) continue;
      if (!s.empty()) s += "+";
      std::string cs = c_[i].to_string();
      if (i == 0) {
        s += ext && cs.find_first_of("+-") != std::string::npos ? "(" + cs + ")" : cs;
      } else {
        if (!c_[i].is_one()) {
          s += ext ? "(" + cs + ")*" : cs + "*";
        }
        s += var;
        if (i > 1) s += "^" + std::to_string(i);
      }
    }
    return s;
  }

 private:
  static FieldElem embed_if_needed(const FieldElem& c, const Field* target) {
    if (c.field() == target) return c;
    return make_embedding(c.field(), target)->apply(c);
  }
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  const Field* f_;
  std::vector<FieldElem> c_;
};

inline Poly derivative(const Poly& f) {
  if (f.deg() <= 0) return Poly::zero(f.field());
  std::vector<FieldElem> c;
  for (long i = 1; i <= f.deg(); ++i)
    c.push_back(f.coeff((std::size_t)i) * FieldElem::from_int(f.field(), i));
  return Poly(f.field(), std::move(c));
}

inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.is_zero() ? a : a.monic();
}

inline Poly powmod(Poly base, std::int64_t e, const Poly& m) {
  Poly r = Poly::one(base.field());
  base = base % m;
  while (e) {
    if (e & 1) r = (r * base) % m;
    base = (base * base) % m;
    e >>= 1;
  }
  return r;
}

// Rabin irreducibility test over the coefficient field F_q.
inline bool is_irreducible(const Poly& f) {
  TKL_REQUIRE(!f.is_zero() && f.deg() >= 1, "irreducibility needs degree >= 1");
  const Field* k = f.field();
  int n = f.deg();
  if (n == 1) return true;
  Poly x = Poly::x(k);
  Poly t = x;
  for (int i = 0; i < n; ++i) t = powmod(t, k->q, f);
  if (!((t - x) % f).is_zero()) return false;
  int m = n;
  std::vector<int> primes;
  for (int r = 2; r * r <= m; ++r)
    while (m % r == 0) {
      if (primes.empty() || primes.back() != r) primes.push_back(r);
      m /= r;
    }
  if (m > 1) primes.push_back(m);
  for (int r : primes) {
    Poly s = x;
    for (int i = 0; i < n / r; ++i) s = powmod(s, k->q, f);
    if (gcd((s - x) % f, f).deg() != 0) return false;
  }
  return true;
}

// All monic irreducibles of the given degree over f, in canonical (rank) order.
// Cached per (field, degree); desk-scale enumeration is the intended backend.
inline const std::vector<Poly>& irreducibles(const Field* k, int degree) {
  TKL_REQUIRE(degree >= 1, "irreducible degree must be >= 1");
  static std::mutex mutex;
  static std::map<std::pair<const Field*, int>, std::vector<Poly>> cache;
  std::lock_guard<std::mutex> g(mutex);
  auto it = cache.find({k, degree});
  if (it != cache.end()) return it->second;
  std::vector<Poly> out;
  std::int64_t total = 1;
  for (int i = 0; i < degree; ++i) {
    TKL_REQUIRE(total < (std::int64_t(1) << 32), "irreducible table too large");
    total *= k->q;
  }
  for (std::int64_t r = 0; r < total; ++r) {
    std::vector<FieldElem> c;
    c.reserve(degree + 1);
    std::int64_t v = r;
    for (int i = 0; i < degree; ++i) {
      c.emplace_back(k, k->unrank(v % k->q));
      v /= k->q;
    }
    c.emplace_back(FieldElem::one(k));
    Poly f(k, std::move(c));
    if (is_irreducible(f)) out.push_back(std::move(f));
  }
  return cache.emplace(std::make_pair(k, degree), std::move(out)).first->second;
}

// Monic irreducible factorization by trial division (degrees are desk-scale).
// Returns factors in canonical order with multiplicities; the unit is dropped.
inline std::map<Poly, int> factor_poly(Poly f) {
  TKL_REQUIRE(!f.is_zero(), "factoring the zero polynomial");
  std::map<Poly, int> out;
  f = f.deg() >= 1 ? f.monic() : Poly::one(f.field());
  for (int d = 1; !f.is_one() && d <= f.deg() / 2; ++d) {
    for (const Poly& pi : irreducibles(f.field(), d)) {
      while (pi.divides(f)) {
        ++out[pi];
        f = f / pi;
      }
      if (f.deg() < 2 * d) break;
    }
  }
  if (!f.is_one()) ++out[f];  // what remains is irreducible
  return out;
}

// Minimal polynomial of a over the embedded small field: the product of
// (X - s) over the Frobenius orbit of a, coefficients pulled back.
inline Poly minimal_polynomial(const Embedding* emb, const FieldElem& a) {
  const Field* big = emb->big();
  TKL_ASSERT(a.field() == big, "minimal_polynomial: element not in big field");
  std::vector<FieldElem> orbit{a};
  for (FieldElem s = emb->frobenius(a); s != a; s = emb->frobenius(s)) orbit.push_back(s);
  Poly prod = Poly::one(big);
  for (const FieldElem& s : orbit)
    prod = prod * Poly(big, {-s, FieldElem::one(big)});
  std::vector<FieldElem> down;
  down.reserve(prod.coeffs().size());
  for (const FieldElem& c : prod.coeffs()) down.push_back(emb->pullback(c));
  return Poly(emb->small(), std::move(down));
}

}  // namespace tkl
