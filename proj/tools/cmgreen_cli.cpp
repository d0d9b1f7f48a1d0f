/* Copyright (C) 2026 cmgreen contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "cmgreen/cmgreen.hpp"
#include "selftest.hpp"

namespace {

using nlohmann::json;
using namespace cmgreen;

enum ExitCode { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2 };

struct RunConfig {
  int k = 4;
  long d1 = -7, d2 = -23;
  std::string pp = "1=1";
  double tol = GreenParams{}.tol;
  unsigned digits = 30;
  unsigned threads = 0;
  std::string output;
  std::optional<double> lhs;
  unsigned long seed = 1;
  bool quick = false;
};

unsigned default_digits() {
  const char* s = std::getenv("CMGREEN_DIGITS");
  if (!s || !*s) return 30;
  try {
    return static_cast<unsigned>(std::stoul(s));
  } catch (const std::exception&) {
    throw InvalidInput(std::string("CMGREEN_DIGITS is not a number: ") + s);
  }
}

/** Thrown for a principal part that no weakly holomorphic form has. */
struct Obstructed : InvalidInput {
  std::vector<mpq_class> vec;
  explicit Obstructed(std::vector<mpq_class> v) : InvalidInput("principal part is obstructed"), vec(std::move(v)) {}
};

PrincipalPart validated(const RunConfig& c) {
  if (c.d1 >= 0 || c.d2 >= 0) throw InvalidInput("CM discriminants must be negative");
  if (!is_fundamental(c.d1) || !is_fundamental(c.d2)) throw InvalidInput("CM discriminants must be fundamental");
  if (std::gcd(c.d1, c.d2) != 1) throw InvalidInput("CM discriminants must be coprime");
  if (c.d1 * c.d2 > kMaxDisc) throw InvalidInput("d1*d2 exceeds the supported range");
  if (c.k < 2 || c.k % 2) throw InvalidInput("k must be even and at least 2");
  if (!(c.tol > 0)) throw InvalidInput("tolerance must be positive");
  if (c.tol < std::pow(10.0, 1.0 - c.digits)) throw InvalidInput("tolerance is finer than the working precision");
  PrincipalPart pp = parse_principal_part(c.pp);
  auto chk = check_principal_part(c.k, pp);
  if (!chk.valid) throw Obstructed(chk.obstruction);
  return pp;
}

json rational(const mpq_class& q) { return {{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}}; }

json exponents_json(const FactorReport& r) {
  json a = json::array();
  for (const auto& e : r.exponents) {
    a.push_back({{"p", to_long(e.p)},
                 {"hnf", {to_long(e.prime.a()), to_long(e.prime.b()), to_long(e.prime.c())}},
                 {"e_num", to_long(e.e.get_num())},
                 {"e_den", to_long(e.e.get_den())},
                 {"label", e.conjugate ? "l'" : "l"},
                 {"generator", e.gen.str()}});
  }
  return a;
}

json unit_json(const FactorReport& r) {
  if (!r.unit_power) return nullptr;
  json u = rational(*r.unit_power);
  u["fitted"] = *r.unit_fitted;
  u["unit"] = "eps_F'";
  return u;
}

json cycle_json(const CycleResult& c, unsigned digits) {
  json terms = json::array();
  for (const auto& t : c.terms) {
    terms.push_back({{"P1", {t.P1.A, t.P1.B, t.P1.C}},
                     {"P2", {t.P2.A, t.P2.B, t.P2.C}},
                     {"m", t.m},
                     {"value", static_cast<double>(t.result.value)},
                     {"cutoff", t.result.T},
                     {"lattice_terms", t.result.terms},
                     {"doublings", t.result.doublings},
                     {"converged", t.result.converged}});
  }
  return {{"value", static_cast<double>(c.value)},
          {"value_str", c.value.str(digits, std::ios_base::scientific)},
          {"converged", c.converged},
          {"terms", terms}};
}

GreenParams green_params(const RunConfig& c) {
  GreenParams p;
  p.k = c.k;
  p.tol = c.tol;
  p.digits = c.digits;
  p.threads = c.threads;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_greens(const RunConfig& c, json& out) {
  auto t0 = std::chrono::steady_clock::now();
  PrincipalPart pp = validated(c);
  CycleResult r = G_kf_at_cycle(c.k, pp, c.d1, c.d2, green_params(c));
  out = cycle_json(r, c.digits);
  out["tol"] = c.tol;
  out["precision"] = c.digits;
  out["seconds"] = seconds_since(t0);
  return r.converged ? kOk : kVerificationFailed;
}

int run_factor(const RunConfig& c, json& out) {
  auto t0 = std::chrono::steady_clock::now();
  PrincipalPart pp = validated(c);
  FactorReport r = gamma_exponents(c.k, pp, c.d1, c.d2);
  if (c.lhs) reconcile(r, *c.lhs, c.tol);
  out = {{"kappa", to_long(r.kappa)},
         {"exponents", exponents_json(r)},
         {"unit_power", unit_json(r)},
         {"residual", r.residual ? json(*r.residual) : json(nullptr)},
         {"rhs_value", c.lhs ? r.rhs_value : ideal_rhs(r)},
         {"seconds", seconds_since(t0)}};
  if (c.lhs && !r.success) return kVerificationFailed;
  return kOk;
}

int run_verify(const RunConfig& c, json& out) {
  auto t0 = std::chrono::steady_clock::now();
  PrincipalPart pp = validated(c);
  FactorReport r = gamma_exponents(c.k, pp, c.d1, c.d2);
  auto t1 = std::chrono::steady_clock::now();
  CycleResult g = G_kf_at_cycle(c.k, pp, c.d1, c.d2, green_params(c));
  const double lhs = static_cast<double>(g.value);
  reconcile(r, lhs, c.tol);

  // the divisor identity on every slice element that fed the exponents
  GenusChar chi(c.d1, c.d2);
  long checked = 0, mismatched = 0;
  for (auto& [m, coeff] : pp)
    for (const auto& mu0 : trace_slice(m, c.d1 * c.d2).elements) {
      auto alt = alt_exponent_check(mu0, chi);
      for (auto& [P, e] : alt) e *= -2;
      ++checked;
      if (alt != rho_exponents(mu0, chi)) ++mismatched;
    }

  out = {{"lhs", lhs},
         {"lhs_str", g.value.str(c.digits, std::ios_base::scientific)},
         {"exponents", exponents_json(r)},
         {"kappa", to_long(r.kappa)},
         {"unit_power", unit_json(r)},
         {"residual", *r.residual},
         {"converged", g.converged},
         {"diagnostics",
          {{"threshold", r.threshold},
           {"rhs_value", r.rhs_value},
           {"ideal_rhs", ideal_rhs(r)},
           {"unit_power_on_eps", rational(-*r.unit_power)},
           {"tol", c.tol},
           {"precision", c.digits},
           {"greens", cycle_json(g, c.digits)},
           {"divisor_identity", {{"checked", checked}, {"mismatched", mismatched}}},
           {"factor_seconds", std::chrono::duration<double>(t1 - t0).count()},
           {"seconds", seconds_since(t0)}}}};
  return r.success && g.converged && mismatched == 0 ? kOk : kVerificationFailed;
}

int run_selftest(const RunConfig& c, json& out) {
  bool ok = false;
  out = tools::run_selftest({c.seed, c.quick}, ok);
  for (const auto& s : out["suites"])
    std::cerr << s["name"].get<std::string>() << ": " << s["passed"] << " passed, " << s["failed"] << " failed\n";
  return ok ? kOk : kVerificationFailed;
}

void emit(const json& doc, const RunConfig& c) {
  const std::string text = doc.dump(2) + "\n";
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.output);
  if (!f) throw std::runtime_error("cannot open output file " + c.output);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Higher Green's functions at CM cycles and their predicted factorizations"};
  app.require_subcommand(1);
  app.add_option("-o,--output", c.output, "Write JSON here instead of stdout");

  auto add_problem = [&](CLI::App* s) {
    s->add_option("--k", c.k, "Weight parameter (even, >= 2)")->capture_default_str();
    s->add_option("--d1", c.d1, "First CM discriminant")->capture_default_str();
    s->add_option("--d2", c.d2, "Second CM discriminant")->capture_default_str();
    s->add_option("--pp", c.pp, "Principal part m=c[,m=c...]")->capture_default_str();
    s->add_option("--tol", c.tol, "Absolute tolerance of the Green's function")->capture_default_str();
    s->add_option("-o,--output", c.output, "Write JSON here instead of stdout");
  };
  auto add_numeric = [&](CLI::App* s) {
    s->add_option("--digits", c.digits, "Working precision in decimal digits (default: CMGREEN_DIGITS or 30)");
    s->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };
  auto* greens = app.add_subcommand("greens", "Evaluate G_{k,f} at the CM cycle");
  add_problem(greens);
  add_numeric(greens);
  auto* factor = app.add_subcommand("factor", "Predicted ideal factorization of gamma_f");
  add_problem(factor);
  factor->add_option_function<double>("--lhs", [&](const double& v) { c.lhs = v; },
                                      "Reconcile against this Green's function value");
  auto* verify = app.add_subcommand("verify", "Evaluate, factor and reconcile");
  add_problem(verify);
  add_numeric(verify);
  auto* selftest = app.add_subcommand("selftest", "Randomized invariant suites");
  selftest->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  selftest->add_flag("--quick", c.quick, "Reduced grid");
  selftest->add_option("-o,--output", c.output, "Write JSON here instead of stdout");

  try {
    c.digits = default_digits();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidInput;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  json out;
  int rc = kOk;
  try {
    set_working_digits(c.digits);
    if (*greens) rc = run_greens(c, out);
    if (*factor) rc = run_factor(c, out);
    if (*verify) rc = run_verify(c, out);
    if (*selftest) rc = run_selftest(c, out);
  } catch (const Obstructed& e) {
    json v = json::array();
    for (auto& x : e.vec) v.push_back(x.get_str());
    out = {{"error", "obstruction"}, {"message", e.what()}, {"obstruction", v}};
    std::cerr << "error: " << e.what() << " " << v.dump() << "\n";
    rc = kInvalidInput;
  } catch (const SingularInput& e) {
    out = {{"error", "singular"}, {"message", e.what()}};
    std::cerr << "error: " << e.what() << "\n";
    rc = kInvalidInput;
  } catch (const InvalidInput& e) {
    out = {{"error", "invalid_input"}, {"message", e.what()}};
    std::cerr << "error: " << e.what() << "\n";
    rc = kInvalidInput;
  }
  try {
    emit(out, c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return rc;
}
