#pragma once
// Curve models: the projective line and (long) Weierstrass curves
//   y^2 + (a1 x + a3) y = x^3 + a2 x^2 + a4 x + a6
// over a finite field, with regularity validation.  Each curve owns a bag of
// typed cache slots that higher layers use to memoize places, Riemann-Roch
// bases, generator records, and so on.

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "tkl/poly.hpp"

namespace tkl {

enum class Model { P1, Weierstrass };

// Type-erased per-curve cache storage.  Slots are created on demand; the
// caller owns synchronization of the slot payload (see cached_map below).
class CacheBox {
 public:
  CacheBox() = default;
  // caches are per-object scratch: moving or copying the owner starts fresh
  CacheBox(const CacheBox&) {}
  CacheBox(CacheBox&&) noexcept {}
  CacheBox& operator=(const CacheBox&) { return *this; }
  CacheBox& operator=(CacheBox&&) noexcept { return *this; }

  template <class T>
  T& slot(const std::string& name) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto& p = m_[name];
    if (!p) p = std::make_shared<Holder<T>>();
    auto* h = dynamic_cast<Holder<T>*>(p.get());
    TKL_ASSERT(h != nullptr, "cache slot reused with a different type");
    return h->value;
  }

 private:
  struct HolderBase {
    virtual ~HolderBase() = default;
  };
  template <class T>
  struct Holder : HolderBase {
    T value;
  };
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<HolderBase>> m_;
};

// A mutex-guarded memo map, the standard payload for CacheBox slots.
template <class K, class V>
class cached_map {
 public:
  std::optional<V> find(const K& k) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = m_.find(k);
    if (it == m_.end()) return std::nullopt;
    return it->second;
  }
  V store(const K& k, V v) {
    std::lock_guard<std::mutex> lk(mu_);
    auto [it, fresh] = m_.emplace(k, std::move(v));
    return it->second;  // first writer wins; duplicate computations are equal anyway
  }

 private:
  mutable std::mutex mu_;
  std::map<K, V> m_;
};

class Curve {
 public:
  static const Curve* p1(const Field* k) { return intern(Curve(k)); }

  // a = (a1, a2, a3, a4, a6)
  static const Curve* weierstrass(const Field* k, const std::array<FieldElem, 5>& a) {
    Curve c(k, a);
    TKL_REQUIRE(!c.discriminant().is_zero(), "singular Weierstrass model (zero discriminant)");
    return intern(std::move(c));
  }

  const Field* field() const { return k_; }
  Model model() const { return model_; }
  int genus() const { return model_ == Model::P1 ? 0 : 1; }

  const FieldElem& a1() const { return a_[0]; }
  const FieldElem& a2() const { return a_[1]; }
  const FieldElem& a3() const { return a_[2]; }
  const FieldElem& a4() const { return a_[3]; }
  const FieldElem& a6() const { return a_[4]; }

  // the y-coefficient A(x) = a1 x + a3 of the defining equation
  Poly polyA() const {
    TKL_ASSERT(model_ == Model::Weierstrass, "polyA on a projective line");
    return Poly(k_, {a3(), a1()});
  }
  // the right-hand side R(x) = x^3 + a2 x^2 + a4 x + a6
  Poly polyR() const {
    TKL_ASSERT(model_ == Model::Weierstrass, "polyR on a projective line");
    return Poly(k_, {a6(), a4(), a2(), FieldElem::one(k_)});
  }

  FieldElem discriminant() const {
    TKL_ASSERT(model_ == Model::Weierstrass, "discriminant on a projective line");
    auto c = [&](long v) { return FieldElem::from_int(k_, v); };
    FieldElem b2 = a1() * a1() + c(4) * a2();
    FieldElem b4 = c(2) * a4() + a1() * a3();
    FieldElem b6 = a3() * a3() + c(4) * a6();
    FieldElem b8 = a1() * a1() * a6() + c(4) * a2() * a6() - a1() * a3() * a4() +
                   a2() * a3() * a3() - a4() * a4();
    return c(-1) * b2 * b2 * b8 - c(8) * b4 * b4 * b4 - c(27) * b6 * b6 +
           c(9) * b2 * b4 * b6;
  }

  std::string to_string() const {
    std::string ks = "F_" + std::to_string(k_->q);
    if (model_ == Model::P1) return "p1 over " + ks;
    auto term = [&](const FieldElem& a, const std::string& mono) -> std::string {
      if (a.is_zero()) return "";
      std::string as = a.to_string();
      if (mono.empty()) return " + " + as;
      if (as == "1") return " + " + mono;
      if (as.find('+') != std::string::npos || as.find('-') != std::string::npos)
        as = "(" + as + ")";
      return " + " + as + "*" + mono;
    };
    std::string lhs = "y^2" + term(a1(), "x*y") + term(a3(), "y");
    std::string rhs = "x^3" + term(a2(), "x^2") + term(a4(), "x") + term(a6(), "");
    return lhs + " = " + rhs + " over " + ks;
  }

  bool operator==(const Curve& o) const {
    return k_ == o.k_ && model_ == o.model_ && a_ == o.a_;
  }

  CacheBox& caches() const { return caches_; }

 private:
  explicit Curve(const Field* k)
      : k_(k), model_(Model::P1), a_{FieldElem::zero(k), FieldElem::zero(k),
                                     FieldElem::zero(k), FieldElem::zero(k),
                                     FieldElem::zero(k)} {}
  Curve(const Field* k, const std::array<FieldElem, 5>& a)
      : k_(k), model_(Model::Weierstrass), a_(a) {}

  static const Curve* intern(Curve&& c) {
    static std::mutex mu;
    static std::vector<std::unique_ptr<Curve>> pool;
    std::lock_guard<std::mutex> lk(mu);
    for (const auto& e : pool)
      if (*e == c) return e.get();
    pool.push_back(std::unique_ptr<Curve>(new Curve(std::move(c))));
    return pool.back().get();
  }

  const Field* k_;
  Model model_;
  std::array<FieldElem, 5> a_;
  mutable CacheBox caches_;
};

}  // namespace tkl
