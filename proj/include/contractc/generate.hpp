#pragma once

// Seeded random generators for contracts, expressions, environments and
// traces. Used by the property suites and `contractc selftest`.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/pricing.hpp"
#include "contractc/semantics.hpp"

namespace contractc::gen {

inline const std::vector<std::string> kRealLabels = {"A", "B", "C"};
inline const std::vector<std::string> kBoolLabels = {"F", "G"};
inline const std::vector<std::string> kParties = {"you", "me", "bank"};
inline const std::vector<std::string> kAssets = {"USD", "EUR"};
inline const std::vector<std::string> kTemplateVars = {"T", "U", "W"};

struct Options {
  int max_depth = 5;
  Nat max_horizon = 30;
  Nat max_template_value = 10;
  Nat max_duration = 6;     // numerals in translate/ifWithin
  bool templates = true;    // allow template variables in durations
  bool let_acc = false;     // allow let, acc and variables (not compilable)
  Int min_obs_index = -3;
  Int max_obs_index = 3;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed, Options opt = {}) : rng_(seed), opt_(opt) {}

  std::mt19937_64& rng() { return rng_; }
  const Options& options() const { return opt_; }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform_real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform_real(0.0, 1.0) < p; }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(uniform_int(0, static_cast<int>(xs.size()) - 1))];
  }

  /// Literals with two decimals keep printed forms short.
  double literal() { return std::round(uniform_real(-10.0, 10.0) * 100.0) / 100.0; }

  TemplateExpr duration() {
    if (opt_.templates && coin(0.35)) return TemplateExpr::var(TVar(pick(kTemplateVars)));
    return TemplateExpr::num(static_cast<Nat>(uniform_int(0, static_cast<int>(opt_.max_duration))));
  }

  Int obs_index() {
    return std::uniform_int_distribution<Int>(opt_.min_obs_index, opt_.max_obs_index)(rng_);
  }

  Exp real_exp(int depth) { return exp(Ty::Real, depth); }
  Exp bool_exp(int depth) { return exp(Ty::Bool, depth); }

  Exp exp(Ty want, int depth) {
    std::vector<std::string> vars;
    for (const auto& [n, t] : scope_)
      if (t == want) vars.push_back(n);
    bool leaf = depth <= 0 || coin(0.3);
    if (leaf) {
      int k = uniform_int(0, vars.empty() ? 1 : 2);
      if (k == 2) return Exp::var(Var(pick(vars)));
      if (want == Ty::Real) {
        if (k == 0) return Exp::real(literal());
        return Exp::obs(Label{pick(kRealLabels), Ty::Real}, obs_index());
      }
      if (k == 0) return Exp::boolean(coin());
      return Exp::obs(Label{pick(kBoolLabels), Ty::Bool}, obs_index());
    }
    if (opt_.let_acc && coin(0.1)) {
      std::string x = "x" + std::to_string(scope_.size());
      Exp init = exp(want, depth - 1);
      scope_.emplace_back(x, want);
      Exp body = exp(want, depth - 1);
      scope_.pop_back();
      return Exp::acc(Var(x), body, static_cast<Nat>(uniform_int(0, 3)), init);
    }
    if (want == Ty::Real) {
      static const OpCode kOps[] = {OpCode::Add, OpCode::Sub, OpCode::Mult, OpCode::Max,
                                    OpCode::Min, OpCode::Neg, OpCode::Cond};
      OpCode op = kOps[uniform_int(0, 6)];
      if (op == OpCode::Neg) return Exp::op(op, {real_exp(depth - 1)});
      if (op == OpCode::Cond)
        return Exp::op(op, {bool_exp(depth - 1), real_exp(depth - 1), real_exp(depth - 1)});
      return Exp::op(op, {real_exp(depth - 1), real_exp(depth - 1)});
    }
    static const OpCode kOps[] = {OpCode::Lt, OpCode::Le, OpCode::Eq, OpCode::Ge, OpCode::Gt,
                                  OpCode::And, OpCode::Or, OpCode::Not, OpCode::Cond};
    OpCode op = kOps[uniform_int(0, 8)];
    switch (op) {
      case OpCode::And:
      case OpCode::Or: return Exp::op(op, {bool_exp(depth - 1), bool_exp(depth - 1)});
      case OpCode::Not: return Exp::op(op, {bool_exp(depth - 1)});
      case OpCode::Cond:
        return Exp::op(op, {bool_exp(depth - 1), bool_exp(depth - 1), bool_exp(depth - 1)});
      default: return Exp::op(op, {real_exp(depth - 1), real_exp(depth - 1)});
    }
  }

  /// Mostly between two of you/me; occasionally a third party or a self transfer.
  Contr transfer() {
    Party p(coin(0.85) ? (coin() ? "you" : "me") : pick(kParties));
    Party q(pick(kParties));
    while (q == p && !coin(0.05)) q = Party(pick(kParties));
    return Contr::transfer(p, q, Asset(pick(kAssets)));
  }

  Contr contract(int depth) {
    if (depth <= 0 || coin(0.15)) {
      if (coin(0.1)) return Contr::zero();
      return transfer();
    }
    int k = uniform_int(0, opt_.let_acc ? 5 : 4);
    switch (k) {
      case 0: return Contr::scale(real_exp(2), contract(depth - 1));
      case 1: return Contr::translate(duration(), contract(depth - 1));
      case 2: return Contr::both(contract(depth - 1), contract(depth - 1));
      case 3:
      case 4:
        if (k == 3 || coin())
          return Contr::if_within(bool_exp(2), duration(), contract(depth - 1),
                                  contract(depth - 1));
        return Contr::scale(real_exp(2), contract(depth - 1));
      default: {
        Ty t = coin(0.7) ? Ty::Real : Ty::Bool;
        std::string x = "v" + std::to_string(scope_.size());
        Exp e = exp(t, 2);
        scope_.emplace_back(x, t);
        Contr body = contract(depth - 1);
        scope_.pop_back();
        return Contr::let(Var(x), e, body);
      }
    }
  }

  TEnv tenv() {
    TEnv d;
    for (const auto& v : kTemplateVars)
      d.set(v, static_cast<Nat>(uniform_int(0, static_cast<int>(opt_.max_template_value))));
    return d;
  }

  /// Contract and template environment with horizon within the bound.
  std::pair<Contr, TEnv> bounded_contract() {
    for (;;) {
      Contr c = contract(opt_.max_depth);
      TEnv d = tenv();
      if (horizon(c, d) <= opt_.max_horizon) return {c, d};
    }
  }

  /// A total environment: reals uniform in [-100, 100], independent booleans.
  ExtEnv total_env() { return hashed_env(rng_()); }

  static ExtEnv hashed_env(std::uint64_t seed) {
    return ExtEnv::from_function([seed](const std::string& l, Int t) -> std::optional<Value> {
      std::uint64_t h = contractc::detail::splitmix64(
          seed ^ contractc::detail::fnv1a(l) ^
          contractc::detail::splitmix64(static_cast<std::uint64_t>(t)));
      for (const auto& b : kBoolLabels)
        if (l == b) return Value::boolean((h >> 17) & 1U);
      double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
      return Value::real(-100.0 + 200.0 * u);
    });
  }

  /// Flat per-day discount with rate in [0, 0.1].
  DiscountSpec discount() { return DiscountSpec::flat(uniform_real(0.0, 0.1)); }

  Trans trans() {
    Trans t;
    int n = uniform_int(0, 4);
    for (int i = 0; i < n; ++i)
      t = t + uniform_real(-50.0, 50.0) *
                  Trans::unit(Party(pick(kParties)), Party(pick(kParties)), Asset(pick(kAssets)));
    return t;
  }

  Trace trace() {
    Trace tr;
    int n = uniform_int(0, 6);
    for (int i = 0; i < n; ++i)
      tr = tr + Trace::at_time(static_cast<Nat>(uniform_int(0, 20)), trans());
    return tr;
  }

 private:
  std::mt19937_64 rng_;
  Options opt_;
  std::vector<std::pair<std::string, Ty>> scope_;
};

}  // namespace contractc::gen
