// tkl: exact tame-symbol computations on curves over finite fields.
//
// Every command reads a curve configuration (JSON) and prints machine-readable
// JSON on stdout.  Exit codes: 0 success, 1 domain/input error, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tkl/io.hpp"
#include "tkl/selftest.hpp"

namespace {

void emit(const tkl::json& j, const std::string& out_path) {
  std::string s = j.dump(2);
  s += "\n";
  std::cout << s;
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    TKL_REQUIRE(f.good(), "cannot open output file: " + out_path);
    f << s;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact tame-symbol computations on curves over finite fields"};
  app.require_subcommand(1);

  std::string config, symbols_path, divisor_path, place_str, target_str, out_path;
  std::string which = "Sprime", mode = "degree", expr;
  long degree = 0, rr_d = 0;
  std::uint64_t seed = 7;
  bool verify = false;

  auto* validate = app.add_subcommand("curve-validate", "load and validate a curve config");
  validate->add_option("--config", config, "curve config JSON file")->required();

  auto* places = app.add_subcommand("places", "list the places of one degree");
  places->add_option("--config", config, "curve config JSON file")->required();
  places->add_option("--degree", degree, "place degree")->required();

  auto* rr = app.add_subcommand("rr", "basis of the Riemann-Roch space RR_d(D)");
  rr->add_option("--config", config, "curve config JSON file")->required();
  rr->add_option("--d", rr_d, "pole order bound d at O")->required();
  rr->add_option("--divisor", divisor_path, "divisor JSON file (default: 0)");

  auto* tame = app.add_subcommand("tame", "tame image of a symbol element");
  tame->add_option("--config", config, "curve config JSON file")->required();
  tame->add_option("--symbols", symbols_path, "symbols JSON file")->required();
  tame->add_option("--place", place_str, "report the value at this place only");

  auto* sset = app.add_subcommand("special-set", "compute S', S, or Stilde");
  sset->add_option("--config", config, "curve config JSON file")->required();
  sset->add_option("--which", which, "Sprime | S | Stilde")->required();
  sset->add_option("--D", divisor_path, "divisor JSON file (Stilde only)");

  auto* genfp = app.add_subcommand("gen-fp", "canonical generator data f_P at a place");
  genfp->add_option("--config", config, "curve config JSON file")->required();
  genfp->add_option("--place", place_str, "place (canonical text form)")->required();

  auto* factorize = app.add_subcommand("factorize", "factor a function into f_P powers");
  factorize->add_option("--config", config, "curve config JSON file")->required();
  factorize->add_option("expr", expr, "function expression")->required();

  auto* reduce = app.add_subcommand("reduce", "normalize a symbol element");
  reduce->add_option("--config", config, "curve config JSON file")->required();
  reduce->add_option("--symbols", symbols_path, "symbols JSON file")->required();
  reduce->add_option("--mode", mode, "degree | rr");
  reduce->add_flag("--verify", verify, "re-check all certificates before printing");
  reduce->add_option("--out", out_path, "also write the JSON to this file");

  auto* coker = app.add_subcommand("coker-preimage",
                                   "element hitting a target tame value mod Stilde");
  coker->add_option("--config", config, "curve config JSON file")->required();
  coker->add_option("--D", divisor_path, "divisor JSON file")->required();
  coker->add_option("--place", place_str, "target place")->required();
  coker->add_option("--target", target_str, "target residue value, e.g. \"z^2+1\"")
      ->required();
  coker->add_option("--out", out_path, "also write the JSON to this file");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
  selftest->add_option("--seed", seed, "seed for the randomized suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    tkl::thread_cap();  // validate TKL_THREADS up front

    if (selftest->parsed()) {
      int failures = tkl::run_acceptance(seed, std::cout);
      return failures == 0 ? 0 : 1;
    }

    const tkl::Curve* C = tkl::load_curve_file(config);

    if (validate->parsed()) {
      tkl::json out;
      out["model"] = C->model() == tkl::Model::P1 ? "p1" : "weierstrass";
      out["p"] = C->field()->p;
      out["n"] = C->field()->n;
      out["genus"] = C->genus();
      emit(out, out_path);
    } else if (places->parsed()) {
      TKL_REQUIRE(degree >= 1, "--degree must be at least 1");
      tkl::json out = tkl::json::array();
      for (const tkl::Place& P : tkl::enumerate_places(C, (int)degree))
        out.push_back(P.to_string());
      emit(out, out_path);
    } else if (rr->parsed()) {
      tkl::Divisor D(C);
      if (!divisor_path.empty())
        D = tkl::divisor_from_json(C, tkl::load_json_file(divisor_path));
      const tkl::RRBasis& B = tkl::rr_basis(C, rr_d, D);
      tkl::json out;
      out["d"] = rr_d;
      if (!divisor_path.empty()) out["divisor"] = tkl::divisor_to_json(D);
      out["dim"] = B.dim();
      out["basis"] = tkl::rr_basis_to_json(B);
      emit(out, out_path);
    } else if (tame->parsed()) {
      tkl::K2Elem e = tkl::symbols_from_json(C, tkl::load_json_file(symbols_path));
      tkl::TameImage img = tkl::tame_image(e);
      if (!place_str.empty()) {
        tkl::Place P = tkl::parse_place(C, place_str);
        tkl::json out;
        out["place"] = P.to_string();
        out["value"] = img.value_at(P).to_string();
        emit(out, out_path);
      } else {
        emit(tkl::tame_image_to_json(img), out_path);
      }
    } else if (sset->parsed()) {
      tkl::SetKind kind = tkl::set_kind_from_name(which);
      if (kind == tkl::SetKind::Stilde) {
        TKL_REQUIRE(!divisor_path.empty(), "special-set: Stilde needs --D");
        tkl::Divisor D = tkl::divisor_from_json(C, tkl::load_json_file(divisor_path));
        emit(tkl::special_set_to_json(tkl::special_set(C, kind, D)), out_path);
      } else {
        emit(tkl::special_set_to_json(tkl::special_set(C, kind)), out_path);
      }
    } else if (genfp->parsed()) {
      tkl::Place P = tkl::parse_place(C, place_str);
      emit(tkl::generator_record_to_json(tkl::make_f_P(C, P)), out_path);
    } else if (factorize->parsed()) {
      tkl::FuncElem f = tkl::parse_func(expr, C);
      TKL_REQUIRE(!f.is_zero(), "factorize: the zero function has no factorization");
      emit(tkl::factorization_to_json(tkl::factorize(C, f)), out_path);
    } else if (reduce->parsed()) {
      tkl::K2Elem e = tkl::symbols_from_json(C, tkl::load_json_file(symbols_path));
      tkl::ReduceMode m = tkl::reduce_mode_from_name(mode);
      tkl::NormalForm nf = tkl::normalize(e, m);
      if (verify) {
        tkl::VerifyReport rep = tkl::verify_normal_form(e, nf);
        TKL_REQUIRE(rep.ok, rep.notes.empty() ? "verification failed" : rep.notes.front());
      }
      tkl::json out = tkl::normal_form_to_json(nf, verify);
      out["verified"] = verify;
      emit(out, out_path);
    } else if (coker->parsed()) {
      tkl::Divisor D = tkl::divisor_from_json(C, tkl::load_json_file(divisor_path));
      tkl::Place P = tkl::parse_place(C, place_str);
      tkl::FieldElem xi = tkl::parse_field_elem(P.residue_field(), target_str);
      tkl::K2Elem acc = tkl::coker_preimage(C, D, {{P, xi}});
      tkl::json out;
      out["element"] = tkl::symbols_to_json(acc);
      out["tame"] = tkl::tame_image_to_json(tkl::tame_image(acc));
      emit(out, out_path);
    }
    return 0;
  } catch (const tkl::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
