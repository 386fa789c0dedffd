#pragma once
// Elements of the function field k(C) in canonical form.
//
//   projective line:  p(x) / q(x), q monic, gcd(p, q) = 1;
//   Weierstrass:      (a(x) + b(x) y) / c(x), c monic, gcd(a, b, c) = 1,
//                     with y^2 rewritten via y^2 = R(x) - A(x) y.
//
// Both forms are unique per element, so equality is component comparison.
// Inverses rationalize the denominator with the y-conjugate:
//   (a + b y)^{-1} = (a - b A - b y) / (a^2 - a b A - b^2 R).

#include <string>

#include "tkl/curve.hpp"

namespace tkl {

class FuncElem {
 public:
  FuncElem() : C_(nullptr) {}

  static FuncElem zero(const Curve* C) {
    return FuncElem(C, Poly::zero(C->field()), Poly::zero(C->field()),
                    Poly::one(C->field()), false);
  }
  static FuncElem one(const Curve* C) { return from_poly(C, Poly::one(C->field())); }
  static FuncElem constant(const Curve* C, const FieldElem& a) {
    return from_poly(C, Poly::constant(a));
  }
  static FuncElem from_int(const Curve* C, std::int64_t v) {
    return constant(C, FieldElem::from_int(C->field(), v));
  }
  static FuncElem x(const Curve* C) { return from_poly(C, Poly::x(C->field())); }
  static FuncElem y(const Curve* C) {
    TKL_REQUIRE(C->model() == Model::Weierstrass, "y is not a function on the projective line");
    return FuncElem(C, Poly::zero(C->field()), Poly::one(C->field()),
                    Poly::one(C->field()), false);
  }
  static FuncElem from_poly(const Curve* C, const Poly& a) {
    return FuncElem(C, a, Poly::zero(C->field()), Poly::one(C->field()), false);
  }
  // (a + b y) / c, reduced to canonical form
  static FuncElem make(const Curve* C, Poly a, Poly b, Poly c) {
    TKL_REQUIRE(!c.is_zero(), "zero denominator");
    TKL_REQUIRE(C->model() == Model::Weierstrass || b.is_zero(),
                "y-component on the projective line");
    return FuncElem(C, std::move(a), std::move(b), std::move(c), true);
  }
  static FuncElem fraction(const Curve* C, const Poly& num, const Poly& den) {
    return make(C, num, Poly::zero(C->field()), den);
  }

  const Curve* curve() const { return C_; }
  const Poly& num_a() const { return a_; }
  const Poly& num_b() const { return b_; }
  const Poly& den() const { return c_; }

  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }
  bool is_constant() const { return b_.is_zero() && c_.is_one() && a_.deg() <= 0; }
  bool is_one() const { return is_constant() && a_.is_one(); }
  FieldElem constant_value() const {
    TKL_ASSERT(is_constant(), "constant_value of a non-constant");
    return a_.is_zero() ? FieldElem::zero(C_->field()) : a_.coeff(0);
  }
  // true when the element lies in k[x] (for P1) / k[x] + k[x]y (for Weierstrass)
  bool is_integral() const { return c_.is_one(); }

  FuncElem operator+(const FuncElem& o) const {
    same(o);
    return FuncElem(C_, a_ * o.c_ + o.a_ * c_, b_ * o.c_ + o.b_ * c_, c_ * o.c_, true);
  }
  FuncElem operator-(const FuncElem& o) const { return *this + (-o); }
  FuncElem operator-() const { return FuncElem(C_, -a_, -b_, c_, false); }
  FuncElem operator*(const FuncElem& o) const {
    same(o);
    Poly na, nb;
    if (b_.is_zero() && o.b_.is_zero()) {
      na = a_ * o.a_;
      nb = Poly::zero(C_->field());
    } else {
      // (a1 + b1 y)(a2 + b2 y) with y^2 = R - A y
      Poly bb = b_ * o.b_;
      na = a_ * o.a_ + bb * C_->polyR();
      nb = a_ * o.b_ + o.a_ * b_ - bb * C_->polyA();
    }
    return FuncElem(C_, std::move(na), std::move(nb), c_ * o.c_, true);
  }
  FuncElem inv() const {
    TKL_REQUIRE(!is_zero(), "inverse of zero");
    if (b_.is_zero()) return FuncElem(C_, c_, b_, a_, true);
    Poly A = C_->polyA(), R = C_->polyR();
    Poly norm = a_ * a_ - a_ * b_ * A - b_ * b_ * R;
    TKL_ASSERT(!norm.is_zero(), "vanishing norm of a nonzero element");
    return FuncElem(C_, c_ * (a_ - b_ * A), -(c_ * b_), std::move(norm), true);
  }
  FuncElem operator/(const FuncElem& o) const { return *this * o.inv(); }
  FuncElem pow(std::int64_t e) const {
    if (e < 0) return inv().pow(-e);
    FuncElem acc = one(C_), base = *this;
    while (e) {
      if (e & 1) acc = acc * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return acc;
  }

  bool operator==(const FuncElem& o) const {
    return C_ == o.C_ && a_ == o.a_ && b_ == o.b_ && c_ == o.c_;
  }
  bool operator!=(const FuncElem& o) const { return !(*this == o); }
  bool operator<(const FuncElem& o) const {
    TKL_ASSERT(C_ == o.C_, "comparing functions on different curves");
    if (a_ != o.a_) return a_ < o.a_;
    if (b_ != o.b_) return b_ < o.b_;
    return c_ < o.c_;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::string num;
    if (!a_.is_zero()) num = a_.to_string("x");
    if (!b_.is_zero()) {
      std::string bs;
      if (b_.is_one()) {
        bs = "y";
      } else {
        std::string s = b_.to_string("x");
        bs = (needs_parens(s, false) ? "(" + s + ")" : s) + "*y";
      }
      num = num.empty() ? bs : num + "+" + bs;
    }
    if (c_.is_one()) return num;
    if (needs_parens(num, false)) num = "(" + num + ")";
    std::string den = c_.to_string("x");
    if (needs_parens(den, true)) den = "(" + den + ")";
    return num + "/" + den;
  }

 private:
  FuncElem(const Curve* C, Poly a, Poly b, Poly c, bool reduce)
      : C_(C), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    if (reduce) this->reduce();
  }

  void reduce() {
    if (a_.is_zero() && b_.is_zero()) {
      c_ = Poly::one(C_->field());
      return;
    }
    Poly g = gcd(gcd(a_, b_), c_);
    if (g.deg() > 0) {
      a_ = a_ / g;
      b_ = b_ / g;
      c_ = c_ / g;
    }
    FieldElem lc = c_.lead().inv();
    a_ = a_ * lc;
    b_ = b_ * lc;
    c_ = c_.monic();
  }

  void same(const FuncElem& o) const {
    TKL_ASSERT(C_ == o.C_, "mixed-curve arithmetic");
  }

  // whether s, inserted as a numerator (tight = false, breaks on top-level +)
  // or denominator (tight = true, also breaks on top-level *), must be wrapped
  static bool needs_parens(const std::string& s, bool tight) {
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      char ch = s[i];
      if (ch == '(') ++depth;
      else if (ch == ')') --depth;
      else if (depth == 0 && (ch == '+' || ch == '-' || (tight && (ch == '*' || ch == '/'))))
        return true;
    }
    return false;
  }

  const Curve* C_;
  Poly a_, b_, c_;
};

// ---------------------------------------------------------------------------
// Expression parser for the documented grammar:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | primary ('^' ['-'] INT)?
//   primary:= INT | 'x' | 'y' | 'z' | '(' expr ')'
//
// 'y' is accepted on Weierstrass curves only; 'z' denotes the canonical
// generator of the coefficient field and is accepted only when that field is
// a proper extension of its prime field.  Whitespace separates tokens freely.

class FuncParser {
 public:
  static FuncElem parse(const std::string& text, const Curve* C) {
    FuncParser p(text, C);
    FuncElem v = p.expr();
    p.skip_ws();
    if (p.pos_ != text.size()) throw parse_error("trailing input", p.pos_);
    return v;
  }

 private:
  FuncParser(const std::string& s, const Curve* C) : s_(s), C_(C) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  FuncElem expr() {
    FuncElem v = term();
    for (;;) {
      if (eat('+')) v = v + term();
      else if (eat('-')) v = v - term();
      else return v;
    }
  }
  FuncElem term() {
    FuncElem v = factor();
    for (;;) {
      if (eat('*')) v = v * factor();
      else if (eat('/')) {
        FuncElem d = factor();
        TKL_REQUIRE(!d.is_zero(), "division by zero element");
        v = v / d;
      } else {
        return v;
      }
    }
  }
  FuncElem factor() {
    if (eat('-')) return -factor();
    FuncElem v = primary();
    if (eat('^')) {
      bool neg = eat('-');
      std::int64_t e = integer();
      v = v.pow(neg ? -e : e);
    }
    return v;
  }
  FuncElem primary() {
    char c = peek();
    if (c == '(') {
      eat('(');
      FuncElem v = expr();
      if (!eat(')')) throw parse_error("expected ')'", pos_);
      return v;
    }
    if (c == 'x') {
      ++pos_;
      return FuncElem::x(C_);
    }
    if (c == 'y') {
      std::size_t at = pos_;
      ++pos_;
      if (C_->model() != Model::Weierstrass)
        throw parse_error("'y' is not defined on the projective line", at);
      return FuncElem::y(C_);
    }
    if (c == 'z') {
      std::size_t at = pos_;
      ++pos_;
      const Field* k = C_->field();
      if (k->n <= 1)
        throw parse_error("'z' requires a proper extension coefficient field", at);
      return FuncElem::constant(C_, FieldElem(k, k->unrank(k->p)));
    }
    if (c >= '0' && c <= '9') return FuncElem::from_int(C_, integer());
    throw parse_error("expected a value", pos_);
  }
  std::int64_t integer() {
    skip_ws();
    std::size_t start = pos_;
    std::int64_t v = 0;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') {
      v = v * 10 + (s_[pos_] - '0');
      TKL_REQUIRE(v < (1LL << 40), "integer literal too large");
      ++pos_;
    }
    if (pos_ == start) throw parse_error("expected an integer", pos_);
    return v;
  }

  const std::string& s_;
  const Curve* C_;
  std::size_t pos_ = 0;
};

inline FuncElem parse_func(const std::string& text, const Curve* C) {
  return FuncParser::parse(text, C);
}

}  // namespace tkl
