#pragma once
// Truncated Laurent series with explicit absolute precision, used for all
// local expansions.  A series represents
//     sum_{i >= val} c_{i} u^i  +  O(u^prec),
// stored as the coefficient window [val, prec).  Arithmetic propagates
// precision pessimistically, so a nonzero coefficient inside the window is
// always exact.

#include <vector>

#include "tkl/field.hpp"

namespace tkl {

class Series {
 public:
  Series() : f_(nullptr), val_(0), prec_(0) {}
  Series(const Field* f, long val, long prec)
      : f_(f), val_(val), prec_(prec), c_(std::max<long>(0, prec - val), FieldElem::zero(f)) {
    TKL_ASSERT(prec >= val, "series window is inverted");
  }

  static Series zero(const Field* f, long prec) { return Series(f, prec, prec); }
  static Series constant(const FieldElem& a, long prec) {
    Series s(a.field(), 0, prec);
    if (prec > 0) s.set(0, a);
    return s;
  }
  // the uniformizer itself
  static Series unit_u(const Field* f, long prec) {
    Series s(f, 1, prec);
    if (prec > 1) s.set(1, FieldElem::one(f));
    return s;
  }

  const Field* field() const { return f_; }
  long val() const { return val_; }
  long prec() const { return prec_; }

  FieldElem get(long i) const {
    if (i < val_ || i >= prec_) return FieldElem::zero(f_);
    return c_[i - val_];
  }
  void set(long i, const FieldElem& v) {
    TKL_ASSERT(i >= val_ && i < prec_, "series coefficient outside window");
    c_[i - val_] = v;
  }

  // least exponent with a nonzero coefficient, if any is visible
  std::optional<long> order() const {
    for (long i = val_; i < prec_; ++i)
      if (!get(i).is_zero()) return i;
    return std::nullopt;
  }
  bool visibly_zero() const { return !order().has_value(); }

  FieldElem leading() const {
    auto o = order();
    TKL_REQUIRE(o.has_value(), "leading coefficient of a series that is zero to precision");
    return get(*o);
  }

  Series operator+(const Series& o) const {
    long v = std::min(val_, o.val_), p = std::min(prec_, o.prec_);
    if (p < v) p = v;
    Series r(f_, v, p);
    for (long i = v; i < p; ++i) r.set(i, get(i) + o.get(i));
    return r;
  }
  Series operator-(const Series& o) const {
    long v = std::min(val_, o.val_), p = std::min(prec_, o.prec_);
    if (p < v) p = v;
    Series r(f_, v, p);
    for (long i = v; i < p; ++i) r.set(i, get(i) - o.get(i));
    return r;
  }
  Series operator*(const Series& o) const {
    // O(u^p1)*u^v2 and O(u^p2)*u^v1 limit the product window
    long v = val_ + o.val_;
    long p = std::min(prec_ + o.val_, o.prec_ + val_);
    if (p < v) p = v;
    Series r(f_, v, p);
    for (long i = val_; i < prec_; ++i) {
      if (get(i).is_zero()) continue;
      for (long j = o.val_; j < o.prec_ && i + j < p; ++j)
        r.set(i + j, r.get(i + j) + get(i) * o.get(j));
    }
    return r;
  }
  Series operator*(const FieldElem& s) const {
    Series r = *this;
    for (auto& e : r.c_) e = e * s;
    return r;
  }

  // multiplicative inverse; requires a visible leading coefficient.
  Series inverse() const {
    auto o = order();
    TKL_REQUIRE(o.has_value(), "inverting a series that is zero to precision");
    long v = *o;
    long m = prec_ - v;  // number of exact coefficients available
    Series r(f_, -v, -v + m);
    FieldElem lead = get(v).inv();
    // long division: iteratively determine coefficients of the inverse
    for (long i = 0; i < m; ++i) {
      FieldElem acc = (i == 0) ? FieldElem::one(f_) : FieldElem::zero(f_);
      for (long j = 0; j < i; ++j) acc = acc - r.get(-v + j) * get(v + (i - j));
      r.set(-v + i, acc * lead);
    }
    return r;
  }

  // exponents in this code base are small, so the linear chain is fine and
  // keeps the precision accounting transparent
  Series pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    if (e == 0) return Series::constant(FieldElem::one(f_), std::max(1L, prec_ - val_));
    Series acc = *this;
    for (long i = 1; i < e; ++i) acc = acc * *this;
    return acc;
  }

  // drop leading zeros from the stored window (pure representation change)
  Series normalized() const {
    long v = val_;
    while (v < prec_ && get(v).is_zero()) ++v;
    Series r(f_, v, prec_);
    for (long i = v; i < prec_; ++i) r.set(i, get(i));
    return r;
  }

  Series truncated(long new_prec) const {
    long p = std::min(prec_, new_prec), v = std::min(val_, p);
    Series r(f_, v, p);
    for (long i = v; i < p; ++i) r.set(i, get(i));
    return r;
  }

 private:
  const Field* f_;
  long val_, prec_;
  std::vector<FieldElem> c_;
};

}  // namespace tkl
