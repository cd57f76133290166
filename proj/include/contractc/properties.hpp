#pragma once

// Randomised property checks over the whole toolchain. Each check is
// deterministic in its seed and reports the cases it ran and any failures.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "contractc/codegen.hpp"
#include "contractc/compiler.hpp"
#include "contractc/generate.hpp"
#include "contractc/payoff_il.hpp"
#include "contractc/pricing.hpp"
#include "contractc/reduction.hpp"
#include "contractc/semantics.hpp"
#include "contractc/syntax.hpp"
#include "contractc/typing.hpp"

namespace contractc::props {

struct Result {
  Result() = default;
  explicit Result(std::string n) : name(std::move(n)) {}

  std::string name;
  Nat cases = 0;
  Nat skipped = 0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty() && cases > 0; }
  void fail(std::string msg) {
    if (failures.size() < 5) failures.push_back(std::move(msg));
    else if (failures.size() == 5) failures.push_back("...");
  }
};

inline bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * (1.0 + std::abs(a));
}

inline std::string show(const Contr& c) { return print_contract(c); }

inline std::string fmt(double v) { return lex::format_real(v); }

namespace detail {

inline gen::Options compilable_options() {
  gen::Options o;
  o.let_acc = false;
  return o;
}

inline gen::Options full_options() {
  gen::Options o;
  o.let_acc = true;
  return o;
}

inline std::pair<Party, Party> two_parties(gen::Generator& g) {
  Party a(g.pick(gen::kParties));
  Party b(g.pick(gen::kParties));
  while (b == a) b = Party(g.pick(gen::kParties));
  return {a, b};
}

template <class F>
void guarded(Result& r, const std::string& context, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    r.fail(context + ": unexpected error [" + e.code_name() + "] " + e.what());
  }
}

}  // namespace detail

/// Trace-sum oracle vs evaluation of the compiled payoff, at t0 = 0 and
/// t_now = 0, with and without prior instantiation.
inline Result soundness(std::uint64_t seed, Nat n, double rel = 1e-7) {
  Result r{"compilation soundness"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    Disc d = g.discount().function();
    auto [p1, p2] = detail::two_parties(g);
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      double oracle = aggregate_price(c, {}, rho, delta, d, p1, p2);
      ILVal v = il_sem(compile_contract(c), rho, delta, 0, 0, d, p1, p2);
      ILVal w = il_sem(compile_contract(instantiate(c, delta)), rho, delta, 0, 0, d, p1, p2);
      if (!v.is_real() || !close(oracle, v.as_real(), rel))
        r.fail(show(c) + ": oracle " + fmt(oracle) + " vs compiled " + v.to_string());
      else if (!w.is_real() || !close(oracle, w.as_real(), rel))
        r.fail(show(c) + ": oracle " + fmt(oracle) + " vs instantiated " + w.to_string());
    });
  }
  return r;
}

/// Compiled contracts evaluate to a real at arbitrary (t0, t_now), guarded
/// or not.
inline Result totality(std::uint64_t seed, Nat n, Nat pairs = 10) {
  Result r{"compiled totality"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    Disc d = g.discount().function();
    auto [p1, p2] = detail::two_parties(g);
    ILExpr il = compile_contract(c);
    ILExpr cut = cut_payoff(il);
    for (Nat k = 0; k < pairs; ++k) {
      Nat t0 = static_cast<Nat>(g.uniform_int(0, 30));
      Nat now = static_cast<Nat>(g.uniform_int(0, 60));
      ++r.cases;
      std::string ctx = show(c) + " at t0=" + std::to_string(t0) + " now=" + std::to_string(now);
      detail::guarded(r, ctx, [&] {
        if (!il_sem(il, rho, delta, t0, now, d, p1, p2).is_real() ||
            !il_sem(cut, rho, delta, t0, now, d, p1, p2).is_real())
          r.fail(ctx + ": non-real result");
      });
    }
  }
  return r;
}

/// evalAt_1 . cutPayoff . compile == evalAt_0 . compile . reduce under
/// (rho/1, d/1). Cases where reduction cannot decide today are skipped.
inline Result commutation(std::uint64_t seed, Nat want, double rel = 1e-7) {
  Result r{"reduction commutation"};
  gen::Options o = detail::compilable_options();
  o.max_obs_index = 1;
  gen::Generator g(seed, o);
  Nat attempts = 0;
  while (r.cases < want && attempts < want * 50) {
    ++attempts;
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    ExtEnv known = g.coin() ? rho.restricted_to(0) : rho;
    PricingConfig cfg;
    cfg.discount = g.discount();
    std::tie(cfg.p1, cfg.p2) = detail::two_parties(g);
    cfg.tenv = delta;
    try {
      reduce(instantiate(c, delta), {}, known);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ReductionStuck || e.code() == ErrorCode::MissingObservable) {
        ++r.skipped;
        continue;
      }
      r.fail(show(c) + ": reduce failed [" + e.code_name() + "] " + e.what());
      ++r.cases;
      continue;
    }
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      CommutationResult cr = commutation_check(c, rho, known, cfg, rel);
      if (!cr.agree)
        r.fail(show(c) + ": cut at 1 gives " + fmt(cr.cut_at_one) + ", reduced gives " +
               fmt(cr.reduced_at_zero) + " (residual " + show(cr.residual) + ")");
    });
  }
  if (r.cases < want) r.fail("only " + std::to_string(r.cases) + " reducible cases found");
  return r;
}

/// cut_payoff is invisible at now = 0: identical evaluation results.
inline Result cut_identity_at_zero(std::uint64_t seed, Nat n, Nat envs = 5) {
  Result r{"cutPayoff identity at now = 0"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ILExpr il = compile_contract(c);
    ILExpr cut = cut_payoff(il);
    std::vector<ILCase> cases;
    for (Nat k = 0; k < envs; ++k) {
      auto [p1, p2] = detail::two_parties(g);
      cases.push_back(ILCase{g.total_env(), delta, g.discount().function(), p1, p2});
    }
    Nat t0 = static_cast<Nat>(g.uniform_int(0, 20));
    r.cases += envs;
    detail::guarded(r, show(c), [&] {
      if (!il_equiv_at(cut, il, t0, 0, cases)) r.fail(show(c) + ": evaluation differs");
    });
  }
  return r;
}

/// Support of csem stays below the symbolic horizon; every trace is
/// antisymmetric. Includes translate(n, zero)-style edge cases.
inline Result horizon_soundness(std::uint64_t seed, Nat n, Result* antisym = nullptr) {
  Result r{"horizon soundness"};
  Result a{"trace antisymmetry"};
  gen::Generator g(seed, detail::full_options());
  std::vector<std::pair<Contr, TEnv>> cases;
  TEnv tv{{"T", 4}, {"U", 0}, {"W", 9}};
  Contr tr = Contr::transfer("you", "me", "USD");
  for (Nat k : {0, 1, 5, 30}) {
    cases.emplace_back(Contr::translate(k, Contr::zero()), tv);
    cases.emplace_back(Contr::translate(k, Contr::translate(3, Contr::zero())), tv);
    cases.emplace_back(Contr::if_within(Exp::boolean(false), TemplateExpr::num(k), Contr::zero(),
                                        Contr::zero()),
                       tv);
    cases.emplace_back(Contr::both(Contr::translate(k, Contr::zero()), tr), tv);
    cases.emplace_back(Contr::translate(k, tr), tv);
  }
  cases.emplace_back(Contr::translate(TemplateExpr::var(TVar("T")), Contr::zero()), tv);
  cases.emplace_back(Contr::translate(TemplateExpr::var(TVar("W")),
                                      Contr::scale(Exp::real(2.0), Contr::zero())),
                     tv);
  while (cases.size() < n) cases.push_back(g.bounded_contract());
  for (const auto& [c, delta] : cases) {
    ExtEnv rho = g.total_env();
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      Trace t = csem(c, {}, rho, delta);
      Nat h = horizon(c, delta);
      if (t.support_end() > h)
        r.fail(show(c) + ": support ends at " + std::to_string(t.support_end()) +
               " beyond horizon " + std::to_string(h));
      if (c.as<contr_node::Translate>() && c.as<contr_node::Translate>()->body->is_zero() &&
          h != 0)
        r.fail(show(c) + ": translate over zero must have horizon 0");
      ++a.cases;
      for (const auto& [day, trans] : t.entries())
        for (const auto& [k, v] : trans.entries())
          if (!(trans(k.to, k.from, k.asset) == -v))
            a.fail(show(c) + ": day " + std::to_string(day) + " not antisymmetric");
    });
  }
  if (antisym) *antisym = a;
  return r;
}

/// Vector-space axioms and delay linearity, pointwise on random traces.
inline Result trace_algebra(std::uint64_t seed, Nat n) {
  Result r{"trace algebra"};
  gen::Generator g(seed);
  for (Nat i = 0; i < n; ++i) {
    Trace x = g.trace();
    Trace y = g.trace();
    Trace z = g.trace();
    double a = g.uniform_real(-5.0, 5.0);
    double b = g.uniform_real(-5.0, 5.0);
    Nat t = static_cast<Nat>(g.uniform_int(0, 10));
    auto law = [&](bool holds, const char* what) {
      if (!holds) r.fail(std::string("law failed: ") + what);
    };
    ++r.cases;
    law(approx_equal((x + y) + z, x + (y + z)), "associativity");
    law(approx_equal(x + y, y + x), "commutativity");
    law(approx_equal(x + Trace{}, x), "identity");
    law(approx_equal(x + (-1.0) * x, Trace{}), "inverse");
    law(approx_equal(a * (b * x), (a * b) * x), "scalar compatibility");
    law(approx_equal(1.0 * x, x), "scalar identity");
    law(approx_equal(a * (x + y), a * x + a * y), "distributivity over traces");
    law(approx_equal((a + b) * x, a * x + b * x), "distributivity over scalars");
    law(approx_equal(trace_scale(0.0, x), Trace{}), "zero annihilates");
    law(approx_equal(delay(t, a * x), a * delay(t, x)), "delay scale");
    law(approx_equal(delay(t, x + y), delay(t, x) + delay(t, y)), "delay add");
    law(approx_equal(delay(0, x), x), "delay zero");
  }
  return r;
}

/// csem(c, delta) == csem(instantiate(c, delta), delta') for unrelated delta'.
inline Result instantiation(std::uint64_t seed, Nat n, Nat others = 3) {
  Result r{"instantiation soundness"};
  gen::Generator g(seed, detail::full_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    Contr inst = instantiate(c, delta);
    if (!is_template_closed(inst)) r.fail(show(c) + ": instantiation left template variables");
    detail::guarded(r, show(c), [&] {
      Trace want = csem(c, {}, rho, delta);
      for (Nat k = 0; k < others; ++k) {
        TEnv other = k == 0 ? TEnv{} : g.tenv();
        ++r.cases;
        if (!approx_equal(want, csem(inst, {}, rho, other)))
          r.fail(show(c) + ": traces differ after instantiation");
      }
    });
  }
  return r;
}

/// The two-transfer example: one step yields transfer(you, me, USD) and a
/// unit transfer today.
inline Result reduction_example() {
  Result r{"reduction example"};
  ++r.cases;
  Contr tr = Contr::transfer("you", "me", "USD");
  Contr c = Contr::both(tr, Contr::translate(1, tr));
  Reduct red = reduce(c, {}, ExtEnv{});
  if (!(red.residual == tr)) r.fail("residual is " + show(red.residual));
  if (!approx_equal(red.transfer, Trans::unit("you", "me", "USD"), 0.0))
    r.fail("transfer is not the unit you -> me in USD");
  if (!(smart_both(Contr::zero(), smart_translate(0, tr)) == tr))
    r.fail("smart constructors do not simplify to the transfer");
  return r;
}

/// LoopIf with bound 0 rewritten to If evaluates identically.
inline Result simplify_loopif0_preserves(std::uint64_t seed, Nat n) {
  Result r{"simplify_loopif0 preserves evaluation"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ILExpr il = compile_contract(c);
    ILExpr s = simplify_loopif0(il);
    ExtEnv rho = g.total_env();
    Disc d = g.discount().function();
    auto [p1, p2] = detail::two_parties(g);
    Nat t0 = static_cast<Nat>(g.uniform_int(0, 10));
    Nat now = static_cast<Nat>(g.uniform_int(0, 20));
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      if (!(il_sem(il, rho, delta, t0, now, d, p1, p2) == il_sem(s, rho, delta, t0, now, d, p1, p2)))
        r.fail(show(c) + ": evaluation changed");
      if (!(il_sem(cut_payoff(il), rho, delta, t0, now, d, p1, p2) ==
            il_sem(cut_payoff(s), rho, delta, t0, now, d, p1, p2)))
        r.fail(show(c) + ": guarded evaluation changed");
    });
  }
  return r;
}

/// esem agrees on e and its specialisation under a restriction of rho.
inline Result specialization(std::uint64_t seed, Nat n) {
  Result r{"specialisation soundness"};
  gen::Generator g(seed, detail::full_options());
  for (Nat i = 0; i < n; ++i) {
    Exp e = g.exp(g.coin() ? Ty::Real : Ty::Bool, 4);
    ExtEnv rho = g.total_env();
    ExtEnv part = rho.restricted_to(g.uniform_int(-4, 4));
    ++r.cases;
    detail::guarded(r, print_exp(e), [&] {
      Exp s = specialize_exp(e, {}, part);
      if (!(esem(s, {}, rho) == esem(e, {}, rho)))
        r.fail(print_exp(e) + ": specialised to " + print_exp(s) + " changes its value");
    });
  }
  return r;
}

/// Smart constructors agree with the plain ones on traces and horizons.
inline Result smart_constructors(std::uint64_t seed, Nat n) {
  Result r{"smart constructor equivalence"};
  gen::Options o = detail::full_options();
  o.max_depth = 3;
  gen::Generator g(seed, o);
  for (Nat i = 0; i < n; ++i) {
    auto [c1, delta] = g.bounded_contract();
    auto [c2, unused] = g.bounded_contract();
    (void)unused;
    ExtEnv rho = g.total_env();
    Nat k = static_cast<Nat>(g.uniform_int(0, 3));
    Exp e = g.coin(0.3) ? Exp::real(static_cast<double>(g.uniform_int(0, 1))) : g.real_exp(2);
    if (g.coin(0.2)) c1 = Contr::zero();
    ++r.cases;
    detail::guarded(r, show(c1), [&] {
      auto same = [&](const Contr& a, const Contr& b, const char* what) {
        if (!approx_equal(csem(a, {}, rho, delta), csem(b, {}, rho, delta)))
          r.fail(std::string(what) + " differs on " + show(b));
      };
      same(smart_translate(k, c1), Contr::translate(k, c1), "smart_translate");
      same(smart_scale(e, c1), Contr::scale(e, c1), "smart_scale");
      same(smart_both(c1, c2), Contr::both(c1, c2), "smart_both");
      same(smart_let(Var("x"), e, c1), Contr::let(Var("x"), e, c1), "smart_let");
      if (horizon(smart_both(c1, c2), delta) != horizon(Contr::both(c1, c2), delta))
        r.fail("smart_both changes the horizon of " + show(Contr::both(c1, c2)));
      bool lit0 = e.as<exp_node::RLit>() && e.as<exp_node::RLit>()->value == 0.0;
      if (!lit0 && horizon(smart_scale(e, c1), delta) != horizon(Contr::scale(e, c1), delta))
        r.fail("smart_scale changes the horizon of " + show(c1));
    });
  }
  return r;
}

/// esem(promote(n, e), rho) == esem(e, rho/n).
inline Result promote_shift(std::uint64_t seed, Nat n) {
  Result r{"promote shifts observables"};
  gen::Generator g(seed, detail::full_options());
  for (Nat i = 0; i < n; ++i) {
    Exp e = g.real_exp(4);
    ExtEnv rho = g.total_env();
    Int k = g.uniform_int(-3, 3);
    ++r.cases;
    detail::guarded(r, print_exp(e), [&] {
      if (!(esem(promote(k, e), {}, rho) == esem(e, {}, rho.advanced(k))))
        r.fail(print_exp(e) + ": promote by " + std::to_string(k) + " disagrees with shifting");
    });
  }
  return r;
}

/// csem(c) == today's transfer at day 0 + delay(1, csem(residual, rho/1)).
inline Result reduction_soundness(std::uint64_t seed, Nat want) {
  Result r{"reduction soundness"};
  gen::Options o = detail::full_options();
  o.max_obs_index = 1;
  gen::Generator g(seed, o);
  Nat attempts = 0;
  while (r.cases < want && attempts < want * 50) {
    ++attempts;
    auto [c0, delta] = g.bounded_contract();
    Contr c = instantiate(c0, delta);
    ExtEnv rho = g.total_env();
    ExtEnv known = g.coin() ? rho.restricted_to(0) : rho;
    Reduct red;
    try {
      red = reduce(c, {}, known);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ReductionStuck || e.code() == ErrorCode::MissingObservable) {
        ++r.skipped;
        continue;
      }
      throw;
    }
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      Trace lhs = csem(c, {}, rho, {});
      Trace rhs = Trace::at_time(0, red.transfer) + delay(1, csem(red.residual, {}, rho.advanced(1), {}));
      if (!approx_equal(lhs, rhs, 1e-9))
        r.fail(show(c) + ": reduct " + show(red.residual) + " is not sound");
    });
  }
  if (r.cases < want) r.fail("only " + std::to_string(r.cases) + " reducible cases found");
  return r;
}

/// Closed expressions: esem vs evaluation of compile_exp.
inline Result expression_soundness(std::uint64_t seed, Nat n, double rel = 1e-9) {
  Result r{"expression compilation soundness"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    Ty t = g.coin() ? Ty::Real : Ty::Bool;
    Exp e = g.exp(t, 4);
    ExtEnv rho = g.total_env();
    ++r.cases;
    detail::guarded(r, print_exp(e), [&] {
      ILExpr il = compile_exp(e);
      if (!(cut_payoff(il) == il)) r.fail(print_exp(e) + ": cut_payoff changed an expression");
      Value v = esem(e, {}, rho);
      ILVal w = il_sem(il, rho, {}, 0, 0, [](Nat) { return 1.0; }, "p", "q");
      bool ok = v.is_real() ? (w.is_real() && close(v.as_real(), w.as_real(), rel))
                            : (w.is_bool() && w.as_bool() == v.as_bool());
      if (!ok) r.fail(print_exp(e) + ": " + w.to_string());
    });
  }
  return r;
}

/// Numeral start times: compiling at t0 = k equals pricing the delayed trace.
inline Result generalised_t0(std::uint64_t seed, Nat n, double rel = 1e-7) {
  Result r{"soundness at shifted start"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    Disc d = g.discount().function();
    auto [p1, p2] = detail::two_parties(g);
    Nat k = static_cast<Nat>(g.uniform_int(0, 10));
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      double oracle = aggregate_price(Contr::translate(k, c), {}, rho, delta, d, p1, p2);
      double at_k = il_sem(compile_contract(c), rho, delta, k, 0, d, p1, p2).as_real();
      double from_k = il_sem(compile_contract(c, ILTExpr::num(k)), rho, delta, 0, 0, d, p1, p2).as_real();
      if (!close(oracle, at_k, rel) || !close(oracle, from_k, rel))
        r.fail(show(c) + " at " + std::to_string(k) + ": " + fmt(oracle) + " vs " + fmt(at_k) +
               " / " + fmt(from_k));
    });
  }
  return r;
}

/// cut_payoff twice equals once; swapping the parties negates a payoff.
inline Result cut_and_payoff_laws(std::uint64_t seed, Nat n) {
  Result r{"cutPayoff idempotence and payoff sign"};
  gen::Generator g(seed, detail::compilable_options());
  for (Nat i = 0; i < n; ++i) {
    auto [c, delta] = g.bounded_contract();
    ExtEnv rho = g.total_env();
    Disc d = g.discount().function();
    auto [p1, p2] = detail::two_parties(g);
    Nat now = static_cast<Nat>(g.uniform_int(0, 30));
    ILExpr cut = cut_payoff(compile_contract(c));
    ++r.cases;
    detail::guarded(r, show(c), [&] {
      if (!(il_sem(cut_payoff(cut), rho, delta, 0, now, d, p1, p2) ==
            il_sem(cut, rho, delta, 0, now, d, p1, p2)))
        r.fail(show(c) + ": cut_payoff is not idempotent");
      ILExpr pay = ILExpr::payoff(ILTExpr::num(static_cast<Nat>(g.uniform_int(0, 9))), p1, p2);
      double fwd = il_sem(pay, rho, delta, 0, 0, d, p1, p2).as_real();
      double back = il_sem(pay, rho, delta, 0, 0, d, p2, p1).as_real();
      if (!(fwd == -back)) r.fail("payoff sign is not antisymmetric");
    });
  }
  return r;
}

/// Printing then parsing gives back the same tree, for contracts and IL.
inline Result text_round_trip(std::uint64_t seed, Nat n) {
  Result r{"text round trip"};
  gen::Generator g(seed, detail::full_options());
  gen::Generator h(seed + 1, detail::compilable_options());
  std::map<std::string, Ty> sorts;
  for (const auto& l : gen::kBoolLabels) sorts[l] = Ty::Bool;
  for (Nat i = 0; i < n; ++i) {
    Contr c = g.contract(5);
    ++r.cases;
    try {
      std::string text = print_contract(c);
      if (!(parse_contract(text) == c)) r.fail("contract does not round-trip: " + text);
    } catch (const Error& e) {
      r.fail(std::string("contract text rejected: ") + e.what());
    }
    ILExpr il = compile_contract(h.contract(5));
    for (const ILExpr& x : {il, cut_payoff(il), simplify_loopif0(il)}) {
      try {
        std::string text = print_il(x);
        if (!(parse_il(text, sorts) == x)) r.fail("IL does not round-trip: " + text);
      } catch (const Error& e) {
        r.fail(std::string("IL text rejected: ") + e.what());
      }
    }
  }
  return r;
}

}  // namespace contractc::props
