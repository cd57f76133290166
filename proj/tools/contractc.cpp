// contractc: command-line front end for checking, compiling, reducing and
// pricing contracts.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "contractc/codegen.hpp"
#include "contractc/compiler.hpp"
#include "contractc/pricing.hpp"
#include "contractc/properties.hpp"
#include "contractc/reduction.hpp"
#include "contractc/syntax.hpp"
#include "contractc/typing.hpp"

using namespace contractc;
using json = nlohmann::json;

namespace {

struct Options {
  std::string input;
  std::string env_path;
  std::string tenv_path;
  std::optional<double> discount_rate;
  std::string discount_table;
  std::string p1 = "you";
  std::string p2 = "me";
  Nat t_now = 0;
  Nat t0 = 0;
  std::optional<std::uint64_t> seed;
  std::optional<Nat> paths;
  std::string scenario_path;
  std::string pipeline = "all";
  std::string backend = "functional";
  std::string module_name = "Examples.PayoffFunction";
  bool simplify = false;
  bool text = false;
  bool quick = false;
  std::string out;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double tolerance() {
  if (const char* s = std::getenv("CONTRACTC_TOLERANCE")) {
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !(v >= 0.0))
      throw Error(ErrorCode::InvalidConfig, "CONTRACTC_TOLERANCE must be a non-negative number");
    return v;
  }
  return 1e-7;
}

Program load_program(const Options& o) {
  Program p = parse_program(read_input(o.input));
  type_check_contract(TypingCtx{}, p.contract);
  return p;
}

TEnv load_tenv_opt(const Options& o) { return o.tenv_path.empty() ? TEnv{} : load_tenv(o.tenv_path); }

ExtEnv load_env_opt(const Options& o, const Program& p) {
  return o.env_path.empty() ? ExtEnv{} : load_env(o.env_path, p.labels);
}

PricingConfig make_config(const Options& o) {
  PricingConfig cfg;
  if (!o.discount_table.empty())
    cfg.discount = load_discount_table(o.discount_table);
  else
    cfg.discount = DiscountSpec::flat(o.discount_rate.value_or(0.0));
  cfg.p1 = Party(o.p1);
  cfg.p2 = Party(o.p2);
  cfg.t_now = o.t_now;
  cfg.tenv = load_tenv_opt(o);
  return cfg;
}

json trans_json(const Trans& t) {
  json arr = json::array();
  for (const auto& [k, v] : t.entries())
    arr.push_back({{"from", k.from.value}, {"to", k.to.value}, {"asset", k.asset.value}, {"amount", v}});
  return arr;
}

std::string trans_text(const Trans& t) {
  std::string s;
  for (const auto& [k, v] : t.entries())
    s += k.from.value + " -> " + k.to.value + " " + lex::format_real(v) + " " + k.asset.value + "\n";
  return s.empty() ? "(no transfers)\n" : s;
}

class Output {
 public:
  explicit Output(const Options& o) : o_(o) {}

  void emit(const json& j, const std::string& text) {
    std::string s = o_.text ? text : j.dump(2) + "\n";
    if (o_.out.empty()) {
      std::cout << s;
      return;
    }
    std::ofstream f(o_.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write '" + o_.out + "'");
    f << s;
  }

 private:
  const Options& o_;
};

int cmd_check(const Options& o) {
  Program p = load_program(o);
  json j{{"ok", true}, {"compilable", is_compilable(p.contract)}};
  std::set<std::string> tv = template_vars(p.contract);
  j["template_vars"] = tv;
  std::string text = "ok\n";
  if (!o.tenv_path.empty() || tv.empty()) {
    Nat h = horizon(p.contract, load_tenv_opt(o));
    j["horizon"] = h;
    text += "horizon " + std::to_string(h) + "\n";
  }
  Output(o).emit(j, text);
  return 0;
}

ILExpr compiled(const Options& o, const Contr& c) {
  ILExpr il = compile_contract(c, ILTExpr::num(o.t0));
  return o.simplify ? simplify_loopif0(il) : il;
}

int cmd_compile(const Options& o, bool cut) {
  Program p = load_program(o);
  ILExpr il = compiled(o, p.contract);
  if (cut) il = cut_payoff(il);
  std::string s = print_il(il);
  Output(o).emit(json{{"il", s}}, s + "\n");
  return 0;
}

int cmd_reduce(const Options& o) {
  Program p = load_program(o);
  TEnv delta = load_tenv_opt(o);
  Contr c = instantiate(p.contract, delta);
  Reduct r = reduce(c, {}, load_env_opt(o, p));
  std::string res = print_contract(r.residual);
  Output(o).emit(json{{"residual", res}, {"transfers", trans_json(r.transfer)}},
                 "residual: " + res + "\n" + trans_text(r.transfer));
  return 0;
}

int cmd_price(const Options& o) {
  Program p = load_program(o);
  PricingConfig cfg = make_config(o);
  ExtEnv rho = load_env_opt(o, p);
  if (o.pipeline != "all") {
    PriceReport r = price(p.contract, rho, cfg, pipeline_from_name(o.pipeline));
    Output(o).emit(to_json(r), lex::format_real(r.price) + "\n");
    return 0;
  }
  // All pipelines; the cut pipeline is only comparable to the others at t_now = 0.
  json reports = json::array();
  std::string text;
  double first = 0.0;
  bool agree = true;
  double tol = tolerance();
  for (Pipeline pl : {Pipeline::Oracle, Pipeline::Compiled, Pipeline::CompiledCut}) {
    PriceReport r = price(p.contract, rho, cfg, pl);
    if (pl == Pipeline::Oracle) first = r.price;
    if ((pl != Pipeline::CompiledCut || cfg.t_now == 0) &&
        std::abs(r.price - first) > tol * (1.0 + std::abs(first)))
      agree = false;
    reports.push_back(to_json(r));
    text += std::string(pipeline_name(pl)) + " " + lex::format_real(r.price) + "\n";
  }
  Output(o).emit(json{{"reports", reports}, {"agree", agree}, {"tolerance", tol}}, text);
  return agree ? 0 : 1;
}

int cmd_mc(const Options& o) {
  Program p = load_program(o);
  PricingConfig cfg = make_config(o);
  ScenarioSpec spec = load_scenario(o.scenario_path);
  if (o.paths) spec.n_paths = *o.paths;
  if (o.seed)
    for (auto& [label, g] : spec.labels)
      if (auto* gbm = std::get_if<Gbm>(&g)) gbm->seed = *o.seed;
  if (!o.env_path.empty()) spec.history = load_env(o.env_path, p.labels);
  PriceReport r = monte_carlo_price(p.contract, spec, cfg);
  Output(o).emit(to_json(r),
                 lex::format_real(r.price) + " +/- " + lex::format_real(r.stderr_estimate) + "\n");
  return 0;
}

int cmd_codegen(const Options& o) {
  Program p = load_program(o);
  Backend b;
  b.kind = backend_from_name(o.backend);
  b.module_name = o.module_name;
  EmittedModule m = emit(compiled(o, p.contract), b);
  auto issues = lint(m);
  if (!issues.empty()) throw Error(ErrorCode::InvalidConfig, "emitted module failed lint: " + issues[0]);
  Output(o).emit(json{{"file", m.file_name}, {"entry", m.entry_point}, {"source", m.source}},
                 m.source);
  return 0;
}

int cmd_selftest(const Options& o) {
  std::uint64_t s = o.seed.value_or(1);
  Nat k = o.quick ? 1 : 5;
  std::vector<props::Result> rs;
  rs.push_back(props::soundness(s, 100 * k));
  rs.push_back(props::totality(s + 1, 100 * k, 10));
  rs.push_back(props::commutation(s + 2, 40 * k));
  rs.push_back(props::cut_identity_at_zero(s + 3, 40 * k));
  props::Result antisym("antisymmetry");
  rs.push_back(props::horizon_soundness(s + 4, 60 * k, &antisym));
  rs.push_back(antisym);
  rs.push_back(props::trace_algebra(s + 5, 20 * k));
  rs.push_back(props::instantiation(s + 6, 40 * k));
  rs.push_back(props::reduction_example());
  rs.push_back(props::simplify_loopif0_preserves(s + 7, 20 * k));
  rs.push_back(props::specialization(s + 8, 40 * k));
  rs.push_back(props::smart_constructors(s + 9, 40 * k));
  rs.push_back(props::promote_shift(s + 10, 40 * k));
  rs.push_back(props::reduction_soundness(s + 11, 40 * k));
  rs.push_back(props::expression_soundness(s + 12, 100 * k));
  rs.push_back(props::generalised_t0(s + 13, 40 * k));
  rs.push_back(props::cut_and_payoff_laws(s + 14, 40 * k));
  rs.push_back(props::text_round_trip(s + 15, 100 * k));

  json arr = json::array();
  std::string text;
  bool all = true;
  for (const auto& r : rs) {
    all = all && r.ok();
    arr.push_back({{"name", r.name}, {"cases", r.cases}, {"skipped", r.skipped},
                   {"ok", r.ok()}, {"failures", r.failures}});
    text += std::string(r.ok() ? "ok   " : "FAIL ") + r.name + " " + std::to_string(r.cases) +
            " cases";
    if (r.skipped) text += " (" + std::to_string(r.skipped) + " skipped)";
    text += "\n";
    for (const auto& f : r.failures) text += "     " + f + "\n";
  }
  Output(o).emit(json{{"ok", all}, {"suites", arr}}, text);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contractc: financial contract compiler and pricer"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sc, bool input = true) {
    if (input) sc->add_option("input", o.input, "contract source file ('-' for stdin)")->required();
    auto* json_flag = sc->add_flag("--json", "JSON output (default)");
    auto* text_flag = sc->add_flag("--text", o.text, "plain text output");
    json_flag->excludes(text_flag);
    sc->add_option("--out", o.out, "write output to PATH");
  };
  auto pricing = [&](CLI::App* sc) {
    sc->add_option("--env", o.env_path, "observable environment (JSON)");
    sc->add_option("--tenv", o.tenv_path, "template environment (JSON)");
    auto* rate = sc->add_option("--discount-rate", o.discount_rate, "flat rate r, d(t) = exp(-r t)");
    auto* table = sc->add_option("--discount-table", o.discount_table, "discount factors (JSON array)");
    rate->excludes(table);
    sc->add_option("--p1", o.p1, "perspective party");
    sc->add_option("--p2", o.p2, "counterparty");
    sc->add_option("--t-now", o.t_now, "current day");
  };

  auto* check = app.add_subcommand("check", "parse and type-check");
  common(check);
  check->add_option("--tenv", o.tenv_path, "template environment (JSON)");

  auto* compile = app.add_subcommand("compile", "compile to a payoff expression");
  auto* cutpayoff = app.add_subcommand("cutpayoff", "compile and guard payoffs before now");
  for (auto* sc : {compile, cutpayoff}) {
    common(sc);
    sc->add_option("--t0", o.t0, "starting offset");
    sc->add_flag("--simplify", o.simplify, "rewrite zero-bound loops as conditionals");
  }

  auto* reduce_cmd = app.add_subcommand("reduce", "one reduction step against known data");
  common(reduce_cmd);
  reduce_cmd->add_option("--env", o.env_path, "observable environment (JSON)");
  reduce_cmd->add_option("--tenv", o.tenv_path, "template environment (JSON)");

  auto* price_cmd = app.add_subcommand("price", "price under a fixed environment");
  common(price_cmd);
  pricing(price_cmd);
  price_cmd->add_option("--pipeline", o.pipeline, "oracle | compiled | compiled-cut | all")
      ->check(CLI::IsMember({"oracle", "compiled", "compiled-cut", "all"}));

  auto* mc = app.add_subcommand("mc-price", "Monte Carlo price over simulated scenarios");
  common(mc);
  pricing(mc);
  mc->add_option("--scenario", o.scenario_path, "scenario spec (JSON)")->required();
  mc->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
  mc->add_option("--seed", o.seed, "seed for every simulated label");

  auto* codegen = app.add_subcommand("codegen", "emit a source module");
  common(codegen);
  codegen->add_option("--t0", o.t0, "starting offset");
  codegen->add_option("--backend", o.backend, "target backend");
  codegen->add_option("--module", o.module_name, "module name");
  codegen->add_flag("--simplify", o.simplify, "rewrite zero-bound loops as conditionals");

  auto* selftest = app.add_subcommand("selftest", "run the property suites");
  common(selftest, false);
  selftest->add_option("--seed", o.seed, "base seed");
  selftest->add_flag("--quick", o.quick, "smaller case counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*check) return cmd_check(o);
    if (*compile) return cmd_compile(o, false);
    if (*cutpayoff) return cmd_compile(o, true);
    if (*reduce_cmd) return cmd_reduce(o);
    if (*price_cmd) return cmd_price(o);
    if (*mc) return cmd_mc(o);
    if (*codegen) return cmd_codegen(o);
    if (*selftest) return cmd_selftest(o);
  } catch (const Error& e) {
    json j{{"error", {{"code", e.code_name()}, {"message", e.what()}}}};
    if (o.text)
      std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    else
      std::cout << j.dump(2) << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
