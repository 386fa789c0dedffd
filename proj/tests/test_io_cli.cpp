#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tkl/io.hpp"

using namespace tkl;
namespace fs = std::filesystem;

namespace {

const Curve* weier(const Field* k, long a1, long a2, long a3, long a4, long a6) {
  auto c = [&](long v) { return FieldElem::from_int(k, v); };
  return Curve::weierstrass(k, {c(a1), c(a2), c(a3), c(a4), c(a6)});
}

json p1f2_config() {
  return json{{"field", {{"p", 2}, {"n", 1}}}, {"curve", {{"model", "p1"}}}};
}

json e2_config() {
  return json{{"field", {{"p", 2}, {"n", 1}}},
              {"curve", {{"model", "weierstrass"}, {"a", {0, 0, 1, 0, 0}}}}};
}

// --- subprocess harness for the CLI binary ---------------------------------

struct RunResult {
  int exit_code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path test_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "tkl_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = test_dir() / name;
  std::ofstream f(p);
  f << content;
  return p;
}

const char* cli_bin() {
  const char* bin = std::getenv("TKL_CLI_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

RunResult run_cli(const std::string& args) {
  fs::path out = test_dir() / "stdout.txt";
  fs::path err = test_dir() / "stderr.txt";
  std::string cmd = std::string(cli_bin()) + " " + args + " > " + out.string() +
                    " 2> " + err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (status >= 0) ? ((status >> 8) & 0xff) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("curve configuration loading") {
  const Curve* line2 = curve_from_config(p1f2_config());
  CHECK(line2->genus() == 0);
  CHECK(line2->field()->p == 2);

  const Curve* e2 = curve_from_config(e2_config());
  CHECK(e2->genus() == 1);
  CHECK(e2 == weier(make_field(2, 1), 0, 0, 1, 0, 0));

  // coefficients may be integers or prime-basis coordinate lists
  json jl = e2_config();
  jl["curve"]["a"] = {json::array({0}), 0, json::array({1}), 0, 0};
  CHECK(curve_from_config(jl) == e2);

  // schema errors name the offending key
  json bad = p1f2_config();
  bad.erase("field");
  CHECK_THROWS_WITH(curve_from_config(bad),
                    Catch::Matchers::ContainsSubstring("missing key \"field\""));
  bad = p1f2_config();
  bad["curve"].erase("model");
  CHECK_THROWS_WITH(curve_from_config(bad),
                    Catch::Matchers::ContainsSubstring("missing key \"model\""));
  bad = p1f2_config();
  bad["curve"]["model"] = "hyperelliptic";
  CHECK_THROWS_AS(curve_from_config(bad), domain_error);
  bad = e2_config();
  bad["curve"]["a"] = {0, 0, 1};
  CHECK_THROWS_AS(curve_from_config(bad), domain_error);

  // the singular Weierstrass model is rejected
  json sing = e2_config();
  sing["curve"]["a"] = {0, 0, 0, 0, 0};
  CHECK_THROWS_AS(curve_from_config(sing), domain_error);

  // malformed JSON text is a domain error, not a crash
  CHECK_THROWS_AS(parse_json_text("{not json", "cfg"), domain_error);
}

TEST_CASE("residue field value parsing") {
  const Field* f5 = make_field(5, 1);
  CHECK(parse_field_elem(f5, "3") == FieldElem::from_int(f5, 3));
  CHECK(parse_field_elem(f5, "8") == FieldElem::from_int(f5, 3));

  const Field* f4 = make_field(2, 2);
  FieldElem z(f4, {0, 1});
  CHECK(parse_field_elem(f4, "z") == z);
  CHECK(parse_field_elem(f4, "z+1") == z + FieldElem::one(f4));
  CHECK(parse_field_elem(f4, " z + 1 ") == z + FieldElem::one(f4));

  const Field* f25 = make_field(5, 2);
  FieldElem w(f25, {0, 1});
  CHECK(parse_field_elem(f25, "2*z+1") ==
        FieldElem::from_int(f25, 2) * w + FieldElem::one(f25));

  const Field* f8 = make_field(2, 3);
  FieldElem u(f8, {0, 1, 0});
  CHECK(parse_field_elem(f8, "z^2+z+1") ==
        u * u + u + FieldElem::one(f8));

  // round-trip through the canonical printer
  for (std::int64_t r = 0; r < 8; ++r) {
    FieldElem v(f8, f8->unrank(r));
    CHECK(parse_field_elem(f8, v.to_string()) == v);
  }

  CHECK_THROWS_AS(parse_field_elem(f4, ""), domain_error);
  CHECK_THROWS_AS(parse_field_elem(f4, "w"), domain_error);
  CHECK_THROWS_AS(parse_field_elem(f4, "z^5"), domain_error);
  CHECK_THROWS_AS(parse_field_elem(f4, "z+"), domain_error);
}

TEST_CASE("place parsing round-trips") {
  const Curve* line2 = curve_from_config(p1f2_config());
  const Curve* e2 = curve_from_config(e2_config());

  for (const Curve* C : {line2, e2}) {
    Place o = place_O(C);
    CHECK(parse_place(C, o.to_string()) == o);
    for (const Place& P : places_up_to(C, 3))
      CHECK(parse_place(C, P.to_string()) == P);
  }
  CHECK(parse_place(line2, "inf") == place_O(line2));
  CHECK(parse_place(e2, "O") == place_O(e2));

  CHECK_THROWS_AS(parse_place(line2, "x^2+x"), domain_error);   // reducible
  CHECK_THROWS_AS(parse_place(line2, "O"), domain_error);       // wrong model
  CHECK_THROWS_AS(parse_place(e2, "(1,0)"), domain_error);      // not on curve
}

TEST_CASE("serializer round-trips") {
  const Curve* e2 = curve_from_config(e2_config());

  // divisors
  std::vector<Place> pl = places_up_to(e2, 2);
  Divisor D = Divisor::single(pl[0], 2) + Divisor::single(pl.back(), -1);
  CHECK(divisor_from_json(e2, divisor_to_json(D)) == D);
  CHECK(divisor_from_json(e2, json::array()) == Divisor(e2));
  CHECK_THROWS_AS(divisor_from_json(e2, json{{"place", "O"}}), domain_error);

  // symbol elements
  K2Elem e = K2Elem::single(parse_func("x", e2), parse_func("y", e2), 2) +
             K2Elem::single(parse_func("y+1", e2), parse_func("x+1", e2), -1);
  CHECK(symbols_from_json(e2, symbols_to_json(e)) == e);
  CHECK(symbols_from_json(e2, json::array()).empty());
  // coeff defaults to 1
  json one_sym = json::array({json{{"f", "x"}, {"g", "y"}}});
  CHECK(symbols_from_json(e2, one_sym) ==
        K2Elem::single(parse_func("x", e2), parse_func("y", e2)));
  CHECK_THROWS_WITH(symbols_from_json(e2, json::array({json{{"f", "x"}}})),
                    Catch::Matchers::ContainsSubstring("missing key \"g\""));
  CHECK_THROWS_AS(symbols_from_json(e2, json::array({json{{"f", "0"}, {"g", "x"}}})),
                  domain_error);

  // tame image: only nontrivial values appear
  TameImage img = tame_image(e);
  json jt = tame_image_to_json(img);
  CHECK(jt.size() == img.values().size());
  for (const auto& [P, v] : img.values()) {
    REQUIRE(jt.contains(P.to_string()));
    CHECK(jt[P.to_string()] == v.to_string());
  }

  // special set
  const SpecialSet& S = special_set(e2, SetKind::S);
  json js = special_set_to_json(S);
  CHECK(js["kind"] == "S");
  CHECK(js["places"].size() == S.places().size());

  // generator record
  json jg = generator_record_to_json(make_f_P(e2, pl.back()));
  CHECK(jg["place"] == pl.back().to_string());
  CHECK(parse_func(jg["fP"].get<std::string>(), e2) == make_f_P(e2, pl.back()).fP());

  // normal form with verified steps
  NormalForm nf = normalize(e, ReduceMode::RR);
  json jn = normal_form_to_json(nf, true);
  CHECK(jn["mode"] == "rr");
  CHECK(jn["residual_tag"] == "L3t");
  CHECK(jn["pairs"].is_array());
  REQUIRE(jn["log"].is_array());
  for (const json& st : jn["log"]) {
    CHECK(st["verified"] == true);
    CHECK_NOTHROW(lemma_tag_from_name(st["lemma"].get<std::string>()));
  }
}

TEST_CASE("cli: places and validation") {
  fs::path cfg = write_file("p1f2.json", p1f2_config().dump());
  RunResult r = run_cli("places --config " + cfg.string() + " --degree 2");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "[\n  \"x^2+x+1\"\n]\n");

  r = run_cli("curve-validate --config " + cfg.string());
  CHECK(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["model"] == "p1");
  CHECK(j["genus"] == 0);

  // schema violation: exit 1, message names the key
  fs::path bad = write_file("nofield.json", R"({"curve":{"model":"p1"}})");
  r = run_cli("curve-validate --config " + bad.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("missing key \"field\"") != std::string::npos);

  // singular model: exit 1
  fs::path sing = write_file(
      "sing.json",
      R"({"field":{"p":2,"n":1},"curve":{"model":"weierstrass","a":[0,0,0,0,0]}})");
  r = run_cli("curve-validate --config " + sing.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("singular") != std::string::npos);

  // usage errors: exit 2
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("places --config " + cfg.string()).exit_code == 2);  // missing --degree
}

TEST_CASE("cli: rr, tame, special-set, gen-fp, factorize") {
  fs::path cfg = write_file("e2.json", e2_config().dump());
  fs::path p1 = write_file("p1f2.json", p1f2_config().dump());

  RunResult r = run_cli("rr --config " + cfg.string() + " --d 3");
  CHECK(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["dim"] == 3);
  CHECK(j["basis"] == json::array({"1", "x", "y"}));

  // a Steinberg instance has an all-trivial tame image
  fs::path st = write_file("steinberg.json", R"([{"coeff":1,"f":"x","g":"1+x"}])");
  r = run_cli("tame --config " + p1.string() + " --symbols " + st.string());
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out) == json::object());

  fs::path pair = write_file("pair.json", R"([{"coeff":1,"f":"x^2+x+1","g":"x+1"}])");
  r = run_cli("tame --config " + p1.string() + " --symbols " + pair.string() +
              " --place x^2+x+1");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out)["value"] == "z");

  fs::path dO = write_file("dO.json", R"([{"place":"O","mult":1}])");
  r = run_cli("special-set --config " + cfg.string() + " --which Stilde --D " +
              dO.string());
  CHECK(r.exit_code == 0);
  j = json::parse(r.out);
  CHECK(j["kind"] == "Stilde");
  CHECK(j["n"] == 2);
  CHECK(j["places"].size() == 4);

  // Stilde without --D is a domain error
  CHECK(run_cli("special-set --config " + cfg.string() + " --which Stilde").exit_code == 1);

  r = run_cli("gen-fp --config " + p1.string() + " --place x^2+x+1");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out)["fP"] == "x^2+x+1");

  r = run_cli("factorize --config " + cfg.string() + " \"x^2/y\"");
  CHECK(r.exit_code == 0);
  j = json::parse(r.out);
  CHECK(j.contains("fprime"));
  CHECK(j["factors"].is_array());
}

TEST_CASE("cli: reduce and coker-preimage") {
  fs::path p1 = write_file("p1f2.json", p1f2_config().dump());
  fs::path pair = write_file("pair.json", R"([{"coeff":1,"f":"x^2+x+1","g":"x+1"}])");

  RunResult r = run_cli("reduce --config " + p1.string() + " --symbols " +
                        pair.string() + " --mode degree --verify");
  CHECK(r.exit_code == 0);
  json j = json::parse(r.out);
  CHECK(j["verified"] == true);
  REQUIRE(j["pairs"].size() == 1);
  CHECK(j["pairs"][0]["place"] == "x^2+x+1");
  for (const json& st : j["log"]) CHECK(st["verified"] == true);

  // identical invocations produce identical bytes
  RunResult r2 = run_cli("reduce --config " + p1.string() + " --symbols " +
                         pair.string() + " --mode degree --verify");
  CHECK(r.out == r2.out);

  // --out writes the same bytes to a file
  fs::path outfile = test_dir() / "nf.json";
  RunResult r3 = run_cli("reduce --config " + p1.string() + " --symbols " +
                         pair.string() + " --mode degree --verify --out " +
                         outfile.string());
  CHECK(r3.exit_code == 0);
  CHECK(slurp(outfile) == r.out);

  // an unknown mode is a domain error
  CHECK(run_cli("reduce --config " + p1.string() + " --symbols " + pair.string() +
                " --mode fancy")
            .exit_code == 1);

  fs::path dinf = write_file("dinf.json", R"([{"place":"inf","mult":1}])");
  r = run_cli("coker-preimage --config " + p1.string() + " --D " + dinf.string() +
              " --place x^2+x+1 --target z");
  CHECK(r.exit_code == 0);
  j = json::parse(r.out);
  CHECK(j["tame"]["x^2+x+1"] == "z");

  // a target value of 0 is rejected
  CHECK(run_cli("coker-preimage --config " + p1.string() + " --D " + dinf.string() +
                " --place x^2+x+1 --target 0")
            .exit_code == 1);
}
