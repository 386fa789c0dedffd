#pragma once
// Exact arithmetic in F_{p^n}.
//
// Every field is F_p[z]/(m(z)) where m is the canonical modulus: the least
// monic irreducible of degree n, "least" meaning smallest rank, where
// rank(a) = sum a_i p^i over the coefficient tuple (a_0,...,a_{n-1}).  The
// same rank order is the library's canonical total order on field elements;
// embeddings pick least roots under it and Frobenius-orbit representatives
// are orbit minima under it.
//
// Fields live in a process-global registry keyed by (p, n), so `const Field*`
// handles stay valid for the program lifetime and element compatibility is
// pointer identity.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include "tkl/common.hpp"

namespace tkl {

using fcoeffs = std::vector<std::uint32_t>;  // little-endian, values in [0,p)

namespace fpdetail {

// Raw polynomial helpers over F_p (little-endian coefficient vectors,
// trailing zeros trimmed).  Only used for modulus search and element
// arithmetic inside Field; everything user-facing goes through Poly.

inline void trim(fcoeffs& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline fcoeffs mulmod_p(const fcoeffs& a, const fcoeffs& b, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  fcoeffs r(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] = static_cast<std::uint32_t>((r[i + j] + std::uint64_t(a[i]) * b[j]) % p);
  }
  trim(r);
  return r;
}

inline std::uint32_t inv_mod_p(std::uint32_t a, std::uint32_t p) {
  // Fermat; p is prime and a != 0.
  std::uint64_t r = 1, base = a % p;
  for (std::uint32_t e = p - 2; e; e >>= 1, base = base * base % p)
    if (e & 1) r = r * base % p;
  return static_cast<std::uint32_t>(r);
}

// a mod m, m monic.
inline fcoeffs rem_p(fcoeffs a, const fcoeffs& m, std::uint32_t p) {
  trim(a);
  while (a.size() >= m.size()) {
    std::uint32_t lead = a.back();
    std::size_t shift = a.size() - m.size();
    if (lead) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        std::uint64_t sub = std::uint64_t(lead) * m[i] % p;
        a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - sub) % p);
      }
    }
    a.pop_back();
    trim(a);
    if (a.size() < m.size()) break;
  }
  return a;
}

inline fcoeffs powmod_p(fcoeffs base, std::uint64_t e, const fcoeffs& m, std::uint32_t p) {
  fcoeffs r{1};
  base = rem_p(std::move(base), m, p);
  while (e) {
    if (e & 1) r = rem_p(mulmod_p(r, base, p), m, p);
    base = rem_p(mulmod_p(base, base, p), m, p);
    e >>= 1;
  }
  return r;
}

inline fcoeffs gcd_p(fcoeffs a, fcoeffs b, std::uint32_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    // reduce a mod b after making b monic
    std::uint32_t li = inv_mod_p(b.back(), p);
    fcoeffs bm(b);
    for (auto& c : bm) c = static_cast<std::uint32_t>(std::uint64_t(c) * li % p);
    a = rem_p(std::move(a), bm, p);
    std::swap(a, b);
  }
  if (!a.empty()) {
    std::uint32_t li = inv_mod_p(a.back(), p);
    for (auto& c : a) c = static_cast<std::uint32_t>(std::uint64_t(c) * li % p);
  }
  return a;
}

// Rabin irreducibility over F_p for monic f of degree >= 1.
inline bool irreducible_p(const fcoeffs& f, std::uint32_t p) {
  std::size_t n = f.size() - 1;
  if (n == 1) return true;
  fcoeffs x{0, 1};
  // z^(p^n) mod f must equal z
  fcoeffs t = x;
  for (std::size_t i = 0; i < n; ++i) t = powmod_p(t, p, f, p);
  fcoeffs tx(t);
  // t - x
  if (tx.size() < 2) tx.resize(2, 0);
  tx[1] = (tx[1] + p - 1) % p;
  trim(tx);
  if (!tx.empty()) return false;
  // gcd(z^(p^(n/r)) - z, f) = 1 for every prime r | n
  std::size_t m = n;
  std::vector<std::size_t> primes;
  for (std::size_t q = 2; q * q <= m; ++q)
    while (m % q == 0) {
      if (primes.empty() || primes.back() != q) primes.push_back(q);
      m /= q;
    }
  if (m > 1) primes.push_back(m);
  for (std::size_t r : primes) {
    fcoeffs s = x;
    for (std::size_t i = 0; i < n / r; ++i) s = powmod_p(s, p, f, p);
    if (s.size() < 2) s.resize(2, 0);
    s[1] = (s[1] + p - 1) % p;
    trim(s);
    if (gcd_p(s, f, p).size() != 1) return false;  // gcd must be the constant 1
  }
  return true;
}

}  // namespace fpdetail

class Field;
const Field* make_field(std::uint32_t p, std::uint32_t n);

class Field {
 public:
  std::uint32_t p;      // characteristic
  std::uint32_t n;      // degree over F_p
  std::int64_t q;       // p^n
  fcoeffs modulus;      // canonical monic irreducible, length n+1 (empty for n=1? no: z for n=1)

  Field(std::uint32_t p_, std::uint32_t n_) : p(p_), n(n_) {
    TKL_REQUIRE(p >= 2, "field characteristic must be >= 2");
    TKL_REQUIRE(n >= 1, "field degree must be >= 1");
    for (std::uint32_t i = 2; i < p; ++i)
      TKL_REQUIRE(p % i != 0, "field characteristic must be prime");
    q = 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      TKL_REQUIRE(q <= (std::int64_t(1) << 40), "field too large for this library");
      q *= p;
    }
    modulus = find_modulus();
  }

  // ---- element representation: fcoeffs of length exactly n ----

  fcoeffs zero() const { return fcoeffs(n, 0); }
  fcoeffs one() const {
    fcoeffs r(n, 0);
    r[0] = 1 % p;
    return r;
  }
  fcoeffs from_int(std::int64_t v) const {
    fcoeffs r(n, 0);
    std::int64_t m = v % p;
    if (m < 0) m += p;
    r[0] = static_cast<std::uint32_t>(m);
    return r;
  }
  bool is_zero(const fcoeffs& a) const {
    return std::all_of(a.begin(), a.end(), [](std::uint32_t c) { return c == 0; });
  }

  std::int64_t rank(const fcoeffs& a) const {
    std::int64_t r = 0;
    for (std::size_t i = a.size(); i-- > 0;) r = r * p + a[i];
    return r;
  }
  fcoeffs unrank(std::int64_t r) const {
    fcoeffs a(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
      a[i] = static_cast<std::uint32_t>(r % p);
      r /= p;
    }
    return a;
  }

  fcoeffs add(const fcoeffs& a, const fcoeffs& b) const {
    fcoeffs r(n);
    for (std::uint32_t i = 0; i < n; ++i) r[i] = (a[i] + b[i]) % p;
    return r;
  }
  fcoeffs sub(const fcoeffs& a, const fcoeffs& b) const {
    fcoeffs r(n);
    for (std::uint32_t i = 0; i < n; ++i) r[i] = (a[i] + p - b[i]) % p;
    return r;
  }
  fcoeffs neg(const fcoeffs& a) const {
    fcoeffs r(n);
    for (std::uint32_t i = 0; i < n; ++i) r[i] = (p - a[i]) % p;
    return r;
  }
  fcoeffs mul(const fcoeffs& a, const fcoeffs& b) const {
    fcoeffs r = fpdetail::rem_p(fpdetail::mulmod_p(a, b, p), modulus, p);
    r.resize(n, 0);
    return r;
  }
  fcoeffs pow(const fcoeffs& a, std::int64_t e) const {
    if (e < 0) return pow(inv(a), -e);
    fcoeffs r = fpdetail::powmod_p(a, static_cast<std::uint64_t>(e), modulus, p);
    r.resize(n, 0);
    return r;
  }
  fcoeffs inv(const fcoeffs& a) const {
    TKL_REQUIRE(!is_zero(a), "division by zero field element");
    // a^(q-2); q fits in int64 by construction
    return pow(a, q - 2);
  }

  // ---- lazy per-field solver tables for quadratics ----

  // Least s with s^2 = a, or nullopt.
  std::optional<fcoeffs> sqrt(const fcoeffs& a) const {
    ensure_sqrt_table();
    std::int64_t r = (*sqrt_table_)[rank(a)];
    if (r < 0) return std::nullopt;
    return unrank(r);
  }

  // Least s with s^2 + s = a (char 2 only), or nullopt.
  std::optional<fcoeffs> artin_schreier_root(const fcoeffs& a) const {
    TKL_ASSERT(p == 2, "artin_schreier_root needs characteristic 2");
    ensure_as_table();
    std::int64_t r = (*as_table_)[rank(a)];
    if (r < 0) return std::nullopt;
    return unrank(r);
  }

 private:
  fcoeffs find_modulus() const {
    if (n == 1) return fcoeffs{0, 1};  // F_p = F_p[z]/(z)
    // scan monic degree-n candidates in rank order of the low coefficients
    for (std::int64_t r = 0;; ++r) {
      fcoeffs f(n + 1, 0);
      std::int64_t v = r;
      for (std::uint32_t i = 0; i < n; ++i) {
        f[i] = static_cast<std::uint32_t>(v % p);
        v /= p;
      }
      TKL_ASSERT(v == 0, "modulus search exhausted");  // cannot happen: irreducibles exist
      f[n] = 1;
      if (fpdetail::irreducible_p(f, p)) return f;
    }
  }

  void ensure_sqrt_table() const {
    std::lock_guard<std::mutex> g(table_mutex_);
    if (sqrt_table_) return;
    auto tbl = std::make_unique<std::vector<std::int64_t>>(q, -1);
    for (std::int64_t r = 0; r < q; ++r) {
      fcoeffs e = unrank(r);
      std::int64_t s = rank(mul(e, e));
      if ((*tbl)[s] < 0) (*tbl)[s] = r;  // ascending scan => least root wins
    }
    sqrt_table_ = std::move(tbl);
  }
  void ensure_as_table() const {
    std::lock_guard<std::mutex> g(table_mutex_);
    if (as_table_) return;
    auto tbl = std::make_unique<std::vector<std::int64_t>>(q, -1);
    for (std::int64_t r = 0; r < q; ++r) {
      fcoeffs e = unrank(r);
      std::int64_t s = rank(add(mul(e, e), e));
      if ((*tbl)[s] < 0) (*tbl)[s] = r;
    }
    as_table_ = std::move(tbl);
  }

  mutable std::mutex table_mutex_;
  mutable std::unique_ptr<std::vector<std::int64_t>> sqrt_table_;
  mutable std::unique_ptr<std::vector<std::int64_t>> as_table_;
};

inline const Field* make_field(std::uint32_t p, std::uint32_t n) {
  static std::mutex mutex;
  static std::map<std::pair<std::uint32_t, std::uint32_t>, std::unique_ptr<Field>> registry;
  std::lock_guard<std::mutex> g(mutex);
  auto& slot = registry[{p, n}];
  if (!slot) slot = std::make_unique<Field>(p, n);
  return slot.get();
}

// Value-semantic field element; the field handle is part of the identity.
class FieldElem {
 public:
  FieldElem() : f_(nullptr) {}
  FieldElem(const Field* f, fcoeffs c) : f_(f), c_(std::move(c)) {
    TKL_ASSERT(c_.size() == f->n, "field element has wrong coefficient count");
  }
  static FieldElem zero(const Field* f) { return FieldElem(f, f->zero()); }
  static FieldElem one(const Field* f) { return FieldElem(f, f->one()); }
  static FieldElem from_int(const Field* f, std::int64_t v) { return FieldElem(f, f->from_int(v)); }

  const Field* field() const { return f_; }
  const fcoeffs& coeffs() const { return c_; }
  bool is_zero() const { return f_->is_zero(c_); }
  bool is_one() const { return c_ == f_->one(); }
  std::int64_t rank() const { return f_->rank(c_); }

  FieldElem operator+(const FieldElem& o) const { return with(f_->add(c_, o.compat(f_))); }
  FieldElem operator-(const FieldElem& o) const { return with(f_->sub(c_, o.compat(f_))); }
  FieldElem operator*(const FieldElem& o) const { return with(f_->mul(c_, o.compat(f_))); }
  FieldElem operator/(const FieldElem& o) const { return with(f_->mul(c_, f_->inv(o.compat(f_)))); }
  FieldElem operator-() const { return with(f_->neg(c_)); }
  FieldElem inv() const { return with(f_->inv(c_)); }
  FieldElem pow(std::int64_t e) const { return with(f_->pow(c_, e)); }

  bool operator==(const FieldElem& o) const { return f_ == o.f_ && c_ == o.c_; }
  bool operator!=(const FieldElem& o) const { return !(*this == o); }
  // canonical order: rank order (fields must match)
  bool operator<(const FieldElem& o) const {
    TKL_ASSERT(f_ == o.f_, "comparing elements of different fields");
    return rank() < o.rank();
  }

  // z-polynomial form; plain integer for prime fields.
  std::string to_string() const {
    if (f_->n == 1) return std::to_string(c_[0]);
    if (is_zero()) return "0";
    std::string s;
    for (std::size_t i = c_.size(); i-- > 0;) {
      if (!c_[i]) continue;
      if (!s.empty()) s += "+";
      if (i == 0) {
        s += std::to_string(c_[i]);
      } else {
        if (c_[i] != 1) s += std::to_string(c_[i]) + "*";
        s += (i == 1) ? "z" : "z^" + std::to_string(i);
      }
    }
    return s;
  }

 private:
  FieldElem with(fcoeffs c) const { return FieldElem(f_, std::move(c)); }
  const fcoeffs& compat(const Field* f) const {
    TKL_ASSERT(f_ == f, "mixed-field arithmetic");
    return c_;
  }
  const Field* f_;
  fcoeffs c_;
};

inline std::optional<FieldElem> sqrt_of(const FieldElem& a) {
  auto r = a.field()->sqrt(a.coeffs());
  if (!r) return std::nullopt;
  return FieldElem(a.field(), *r);
}

inline std::optional<FieldElem> artin_schreier_root_of(const FieldElem& a) {
  auto r = a.field()->artin_schreier_root(a.coeffs());
  if (!r) return std::nullopt;
  return FieldElem(a.field(), *r);
}

// Canonical embedding F_{p^a} -> F_{p^b} for a | b: the subfield generator is
// sent to the least (rank order) root of its modulus in the big field.  The
// object also carries the F_p-linear data needed to pull elements back and to
// split big-field values into coordinates over the image of the small field.
class Embedding {
 public:
  Embedding(const Field* small, const Field* big) : small_(small), big_(big) {
    TKL_REQUIRE(small->p == big->p, "embedding requires equal characteristic");
    TKL_REQUIRE(big->n % small->n == 0, "no embedding: degree does not divide");
    root_ = find_least_root();
    build_matrices();
  }

  const Field* small() const { return small_; }
  const Field* big() const { return big_; }
  const FieldElem& root() const { return root_; }
  std::uint32_t relative_degree() const { return big_->n / small_->n; }

  FieldElem apply(const FieldElem& a) const {
    TKL_ASSERT(a.field() == small_, "embedding applied to wrong field");
    FieldElem acc = FieldElem::zero(big_);
    for (std::size_t i = 0; i < small_->n; ++i)
      if (a.coeffs()[i])
        acc = acc + FieldElem::from_int(big_, a.coeffs()[i]) * root_powers_[i];
    return acc;
  }

  // Inverse of apply on the image; domain_error if b is outside it.
  FieldElem pullback(const FieldElem& b) const {
    auto co = coords(b);
    for (std::size_t j = 1; j < co.size(); ++j)
      TKL_REQUIRE(co[j].is_zero(), "element is not in the embedded subfield");
    return co[0];
  }

  bool in_subfield(const FieldElem& b) const {
    auto co = coords(b);
    for (std::size_t j = 1; j < co.size(); ++j)
      if (!co[j].is_zero()) return false;
    return true;
  }

  // Coordinates of b over the small field w.r.t. the basis {g^j}, j < [big:small],
  // where g is the big field's canonical generator (class of z).
  std::vector<FieldElem> coords(const FieldElem& b) const {
    TKL_ASSERT(b.field() == big_, "coords of element from wrong field");
    std::uint32_t N = big_->n, d = relative_degree(), ns = small_->n;
    // multiply inverse matrix by the coefficient vector (over F_p)
    std::vector<std::uint32_t> out(N, 0);
    std::uint32_t p = big_->p;
    for (std::uint32_t r = 0; r < N; ++r) {
      std::uint64_t acc = 0;
      for (std::uint32_t c = 0; c < N; ++c)
        acc += std::uint64_t(inv_matrix_[r * N + c]) * b.coeffs()[c];
      out[r] = static_cast<std::uint32_t>(acc % p);
    }
    std::vector<FieldElem> res;
    res.reserve(d);
    for (std::uint32_t j = 0; j < d; ++j) {
      fcoeffs cc(ns);
      for (std::uint32_t i = 0; i < ns; ++i) cc[i] = out[j * ns + i];
      res.emplace_back(small_, std::move(cc));
    }
    return res;
  }

  // Norm from the big field down to (the image of) the small field, pulled back:
  // a ^ ((Q-1)/(q-1)) where Q = big->q, q = small->q.
  FieldElem norm(const FieldElem& a) const {
    TKL_ASSERT(a.field() == big_, "norm of element from wrong field");
    if (a.is_zero()) return FieldElem::zero(small_);
    std::int64_t e = (big_->q - 1) / (small_->q - 1);
    return pullback(a.pow(e));
  }

  // Frobenius of the big field relative to the small one: a -> a^q.
  FieldElem frobenius(const FieldElem& a) const { return a.pow(small_->q); }

 private:
  FieldElem find_least_root() const {
    if (small_->n == 1) return FieldElem::zero(big_);  // modulus z: root 0
    // evaluate the small modulus at candidates in rank order; first root is least
    for (std::int64_t r = 0; r < big_->q; ++r) {
      FieldElem x(big_, big_->unrank(r));
      FieldElem acc = FieldElem::zero(big_);
      for (std::size_t i = small_->modulus.size(); i-- > 0;)
        acc = acc * x + FieldElem::from_int(big_, small_->modulus[i]);
      if (acc.is_zero()) return x;
    }
    TKL_ASSERT(false, "subfield modulus has no root in extension");
    return FieldElem::zero(big_);  // unreachable
  }

  void build_matrices() {
    std::uint32_t N = big_->n, d = relative_degree(), ns = small_->n, p = big_->p;
    root_powers_.clear();
    FieldElem acc = FieldElem::one(big_);
    for (std::uint32_t i = 0; i < ns; ++i) {
      root_powers_.push_back(acc);
      acc = acc * root_;
    }
    // columns (j,i): g^j * root^i as F_p-vectors; invert with Gauss-Jordan
    std::vector<std::uint32_t> m(N * N, 0);
    // class of z has rank p (coefficient vector e_1); for N == 1 use 1
    FieldElem g = N > 1 ? FieldElem(big_, big_->unrank(p)) : FieldElem::one(big_);
    FieldElem gj = FieldElem::one(big_);
    for (std::uint32_t j = 0; j < d; ++j) {
      for (std::uint32_t i = 0; i < ns; ++i) {
        FieldElem col = gj * root_powers_[i];
        for (std::uint32_t r = 0; r < N; ++r) m[r * N + (j * ns + i)] = col.coeffs()[r];
      }
      gj = gj * g;
    }
    // invert m over F_p
    std::vector<std::uint32_t> inv(N * N, 0);
    for (std::uint32_t i = 0; i < N; ++i) inv[i * N + i] = 1;
    for (std::uint32_t col = 0, row = 0; col < N && row < N; ++col) {
      std::uint32_t pr = row;
      while (pr < N && m[pr * N + col] == 0) ++pr;
      TKL_ASSERT(pr < N, "embedding basis matrix is singular");
      if (pr != row)
        for (std::uint32_t c = 0; c < N; ++c) {
          std::swap(m[pr * N + c], m[row * N + c]);
          std::swap(inv[pr * N + c], inv[row * N + c]);
        }
      std::uint32_t pivinv = fpdetail::inv_mod_p(m[row * N + col], p);
      for (std::uint32_t c = 0; c < N; ++c) {
        m[row * N + c] = static_cast<std::uint32_t>(std::uint64_t(m[row * N + c]) * pivinv % p);
        inv[row * N + c] = static_cast<std::uint32_t>(std::uint64_t(inv[row * N + c]) * pivinv % p);
      }
      for (std::uint32_t r = 0; r < N; ++r) {
        if (r == row || m[r * N + col] == 0) continue;
        std::uint32_t factor = m[r * N + col];
        for (std::uint32_t c = 0; c < N; ++c) {
          m[r * N + c] = static_cast<std::uint32_t>(
              (m[r * N + c] + std::uint64_t(p - factor) * m[row * N + c]) % p);
          inv[r * N + c] = static_cast<std::uint32_t>(
              (inv[r * N + c] + std::uint64_t(p - factor) * inv[row * N + c]) % p);
        }
      }
      ++row;
    }
    inv_matrix_ = std::move(inv);
  }

  const Field* small_;
  const Field* big_;
  FieldElem root_ = FieldElem();
  std::vector<FieldElem> root_powers_;
  std::vector<std::uint32_t> inv_matrix_;  // N x N over F_p, row-major
};

// Process-global embedding cache.
inline const Embedding* make_embedding(const Field* small, const Field* big) {
  static std::mutex mutex;
  static std::map<std::pair<const Field*, const Field*>, std::unique_ptr<Embedding>> registry;
  std::lock_guard<std::mutex> g(mutex);
  auto& slot = registry[{small, big}];
  if (!slot) slot = std::make_unique<Embedding>(small, big);
  return slot.get();
}

}  // namespace tkl
