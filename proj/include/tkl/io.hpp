// JSON serialization and configuration loading.
//
// All machine-readable formats live here:
//   - curve config:   {"field":{"p":2,"n":1},"curve":{"model":"p1"}}
//                     {"field":...,"curve":{"model":"weierstrass","a":[...]}}
//     Weierstrass coefficients are integers or little-endian integer lists
//     (coordinates in the prime-field basis of the base field).
//   - place:          canonical text ("inf", "x^2+x+1", "O", "(0,1)",
//                     "(z^2+z+1;x=z;y=z)")
//   - divisor:        [{"place": "...", "mult": n}]
//   - symbols:        [{"coeff": n, "f": "<expr>", "g": "<expr>"}]
//   - tame image:     {"<place>": "<residue value>"} (nontrivial values only)
//   - special set:    {"kind": "...", "places": [...], ...}
//   - normal form:    {"residual": [...], "pairs": [...], "log": [...]}
//
// Key order is fixed (ordered_json) so identical inputs serialize to
// identical bytes.

#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tkl/common.hpp"
#include "tkl/field.hpp"
#include "tkl/curve.hpp"
#include "tkl/place.hpp"
#include "tkl/func.hpp"
#include "tkl/divisor.hpp"
#include "tkl/rr.hpp"
#include "tkl/k2.hpp"
#include "tkl/gens.hpp"
#include "tkl/reduce.hpp"

namespace tkl {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// schema helpers

inline const json& require_key(const json& j, const char* key, const char* ctx) {
  TKL_REQUIRE(j.is_object(), std::string(ctx) + ": expected an object");
  auto it = j.find(key);
  TKL_REQUIRE(it != j.end(), std::string(ctx) + ": missing key \"" + key + "\"");
  return *it;
}

inline std::int64_t require_int(const json& j, const char* ctx) {
  TKL_REQUIRE(j.is_number_integer(), std::string(ctx) + ": expected an integer");
  return j.get<std::int64_t>();
}

inline std::string require_string(const json& j, const char* ctx) {
  TKL_REQUIRE(j.is_string(), std::string(ctx) + ": expected a string");
  return j.get<std::string>();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  TKL_REQUIRE(!j.is_discarded(), what + ": malformed JSON");
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  TKL_REQUIRE(in.good(), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// curve configuration

// a coefficient is an integer or a list of prime-field coordinates
inline FieldElem coeff_from_json(const Field* k, const json& v, const char* ctx) {
  if (v.is_number_integer()) return FieldElem::from_int(k, v.get<std::int64_t>());
  TKL_REQUIRE(v.is_array(), std::string(ctx) + ": coefficient must be an integer or list");
  TKL_REQUIRE(v.size() <= k->n,
              std::string(ctx) + ": coefficient list longer than the field degree");
  fcoeffs c(k->n, 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::int64_t ci = require_int(v[i], ctx);
    ci %= (std::int64_t)k->p;
    if (ci < 0) ci += (std::int64_t)k->p;
    c[i] = (std::uint32_t)ci;
  }
  return FieldElem(k, std::move(c));
}

inline const Curve* curve_from_config(const json& cfg) {
  const json& jf = require_key(cfg, "field", "config");
  std::int64_t p = require_int(require_key(jf, "p", "config.field"), "config.field.p");
  std::int64_t n = require_int(require_key(jf, "n", "config.field"), "config.field.n");
  TKL_REQUIRE(p >= 2 && n >= 1, "config.field: need a prime p >= 2 and n >= 1");
  const Field* k = make_field((std::uint32_t)p, (std::uint32_t)n);

  const json& jc = require_key(cfg, "curve", "config");
  std::string model = require_string(require_key(jc, "model", "config.curve"),
                                     "config.curve.model");
  if (model == "p1") return Curve::p1(k);
  TKL_REQUIRE(model == "weierstrass",
              "config.curve.model: expected \"p1\" or \"weierstrass\"");
  const json& ja = require_key(jc, "a", "config.curve");
  TKL_REQUIRE(ja.is_array() && ja.size() == 5,
              "config.curve.a: expected [a1,a2,a3,a4,a6]");
  std::array<FieldElem, 5> a = {
      coeff_from_json(k, ja[0], "config.curve.a"),
      coeff_from_json(k, ja[1], "config.curve.a"),
      coeff_from_json(k, ja[2], "config.curve.a"),
      coeff_from_json(k, ja[3], "config.curve.a"),
      coeff_from_json(k, ja[4], "config.curve.a")};
  return Curve::weierstrass(k, a);
}

inline const Curve* load_curve_file(const std::string& path) {
  return curve_from_config(load_json_file(path));
}

// ---------------------------------------------------------------------------
// residue-field values: "3", "z", "2*z+1", "z^2+z"

inline FieldElem parse_field_elem(const Field* k, const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace((unsigned char)c)) s += c;
  TKL_REQUIRE(!s.empty(), "field value: empty string");
  fcoeffs c(k->n, 0);
  std::size_t i = 0;
  auto integer = [&]() -> std::int64_t {
    TKL_REQUIRE(i < s.size() && std::isdigit((unsigned char)s[i]),
                "field value: expected a digit in \"" + text + "\"");
    std::int64_t v = 0;
    while (i < s.size() && std::isdigit((unsigned char)s[i]))
      v = v * 10 + (s[i++] - '0');
    return v;
  };
  for (;;) {
    std::int64_t coeff = 1;
    bool saw_coeff = false;
    if (std::isdigit((unsigned char)s[i])) {
      coeff = integer();
      saw_coeff = true;
      if (i < s.size() && s[i] == '*') ++i;
    }
    std::size_t exp = 0;
    if (i < s.size() && s[i] == 'z') {
      ++i;
      exp = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        std::int64_t e = integer();
        TKL_REQUIRE(e >= 0, "field value: negative exponent");
        exp = (std::size_t)e;
      }
    } else {
      TKL_REQUIRE(saw_coeff, "field value: expected a term in \"" + text + "\"");
    }
    TKL_REQUIRE(exp < k->n, "field value: z-degree too large for this field");
    coeff %= (std::int64_t)k->p;
    if (coeff < 0) coeff += (std::int64_t)k->p;
    c[exp] = (std::uint32_t)((c[exp] + coeff) % k->p);
    if (i == s.size()) break;
    TKL_REQUIRE(s[i] == '+', "field value: expected '+' in \"" + text + "\"");
    ++i;
  }
  return FieldElem(k, std::move(c));
}

// ---------------------------------------------------------------------------
// place lookup: canonical strings resolved by a bounded degree scan

inline Place parse_place(const Curve* C, const std::string& s) {
  Place o = place_O(C);
  if (s == o.to_string()) return o;
  double cost = 1.0;
  for (int d = 1; d <= 12; ++d) {
    cost *= (double)C->field()->q;
    if (cost > double(1 << 22)) break;  // enumeration budget
    for (const Place& P : enumerate_places(C, d))
      if (P.to_string() == s) return P;
  }
  TKL_REQUIRE(false, "unrecognized place: \"" + s + "\"");
  return o;  // unreachable
}

// ---------------------------------------------------------------------------
// serializers

inline json divisor_to_json(const Divisor& D) {
  json out = json::array();
  for (const auto& [P, m] : D.entries())
    out.push_back({{"place", P.to_string()}, {"mult", m}});
  return out;
}

inline Divisor divisor_from_json(const Curve* C, const json& j) {
  TKL_REQUIRE(j.is_array(), "divisor: expected a list of {place, mult}");
  Divisor D(C);
  for (const json& e : j) {
    std::string ps = require_string(require_key(e, "place", "divisor"), "divisor.place");
    std::int64_t m = require_int(require_key(e, "mult", "divisor"), "divisor.mult");
    D.add(parse_place(C, ps), (long)m);
  }
  return D;
}

inline json symbols_to_json(const K2Elem& e) {
  json out = json::array();
  for (const auto& [s, c] : e.terms())
    out.push_back({{"coeff", c}, {"f", s.f().to_string()}, {"g", s.g().to_string()}});
  return out;
}

inline K2Elem symbols_from_json(const Curve* C, const json& j) {
  TKL_REQUIRE(j.is_array(), "symbols: expected a list of {coeff, f, g}");
  K2Elem e(C);
  for (const json& s : j) {
    long coeff = 1;
    if (s.is_object() && s.contains("coeff"))
      coeff = (long)require_int(s["coeff"], "symbols.coeff");
    FuncElem f = parse_func(require_string(require_key(s, "f", "symbols"), "symbols.f"), C);
    FuncElem g = parse_func(require_string(require_key(s, "g", "symbols"), "symbols.g"), C);
    TKL_REQUIRE(!f.is_zero() && !g.is_zero(), "symbols: entries must be nonzero");
    if (coeff != 0) e += K2Elem::single(f, g, coeff);
  }
  return e;
}

inline json tame_image_to_json(const TameImage& img) {
  json out = json::object();
  for (const auto& [P, v] : img.values()) out[P.to_string()] = v.to_string();
  return out;
}

inline json special_set_to_json(const SpecialSet& S) {
  json out;
  out["kind"] = set_kind_name(S.kind());
  json pl = json::array();
  for (const Place& P : S.places()) pl.push_back(P.to_string());
  out["places"] = std::move(pl);
  if (S.kind() == SetKind::Stilde) {
    out["D"] = divisor_to_json(S.D());
    out["e"] = S.e();
    out["n"] = S.n();
  }
  return out;
}

inline json generator_record_to_json(const GeneratorRecord& r) {
  json out;
  out["place"] = r.P().to_string();
  out["d"] = r.d();
  out["fP"] = r.fP().to_string();
  out["DP"] = divisor_to_json(r.DP());
  out["fPprime"] = r.fPprime().to_string();
  out["DPprime"] = divisor_to_json(r.DPprime());
  return out;
}

inline json coker_record_to_json(const CokerGeneratorRecord& r) {
  json out;
  out["place"] = r.P().to_string();
  out["D"] = divisor_to_json(r.D());
  out["n"] = r.n();
  out["m"] = r.m();
  out["ftilde"] = r.ftilde().to_string();
  out["DP"] = divisor_to_json(r.DP());
  return out;
}

inline json rr_basis_to_json(const RRBasis& B) {
  json out = json::array();
  for (const FuncElem& f : B.basis()) out.push_back(f.to_string());
  return out;
}

inline json factorization_to_json(const Factorization& F) {
  json out;
  out["fprime"] = F.fprime.to_string();
  json fac = json::array();
  for (const auto& [P, m] : F.factors)
    fac.push_back({{"place", P.to_string()}, {"mult", m}});
  out["factors"] = std::move(fac);
  return out;
}

inline json step_to_json(const RewriteStep& st, bool run_verify) {
  json out;
  out["lemma"] = lemma_tag_name(st.tag);
  out["consumed"] = symbols_to_json(st.consumed);
  out["produced"] = symbols_to_json(st.produced);
  out["witnesses"] = st.witnesses.size();
  out["memberships"] = st.memberships.size();
  if (!st.note.empty()) out["note"] = st.note;
  out["verified"] = run_verify ? verify_step(st) : false;
  return out;
}

inline json normal_form_to_json(const NormalForm& nf, bool run_verify) {
  json out;
  out["mode"] = reduce_mode_name(nf.mode);
  out["residual"] = symbols_to_json(nf.residual);
  out["residual_tag"] = nf.residual_tag;
  json pairs = json::array();
  for (const CanonicalPair& p : nf.pairs)
    pairs.push_back({{"place", p.P.to_string()},
                     {"lplus", p.lplus.to_string()},
                     {"lminus", p.lminus.to_string()},
                     {"space_d", p.space_d}});
  out["pairs"] = std::move(pairs);
  json log = json::array();
  for (const RewriteStep& st : nf.log) log.push_back(step_to_json(st, run_verify));
  out["log"] = std::move(log);
  return out;
}

}  // namespace tkl
