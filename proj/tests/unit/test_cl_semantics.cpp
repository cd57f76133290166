#include <gtest/gtest.h>

#include "contractc/reduction.hpp"
#include "contractc/semantics.hpp"
#include "contractc/syntax.hpp"
#include "contractc/typing.hpp"

using namespace contractc;

namespace {

const Label kAapl{"AAPL", Ty::Real};
const Party kYou("you");
const Party kMe("me");
const Asset kUsd("USD");

Contr you_me() { return Contr::transfer(kYou, kMe, kUsd); }

ExtEnv table(std::initializer_list<std::pair<std::pair<std::string, Int>, double>> xs) {
  ExtEnv::Table t;
  for (const auto& [k, v] : xs) t.emplace(k, Value::real(v));
  return ExtEnv::from_table(t);
}

double real_of(const Value& v) {
  EXPECT_TRUE(v.is_real());
  return v.as_real();
}

}  // namespace

TEST(Tsem, Cases) {
  EXPECT_EQ(tsem(TemplateExpr::num(90), {}), 90u);
  EXPECT_EQ(tsem(TemplateExpr::var(TVar("t0")), {{"t0", 5}}), 5u);
  try {
    tsem(TemplateExpr::var(TVar("t0")), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnboundTemplateVariable);
  }
}

TEST(Esem, Subtraction) {
  Exp e = Exp::op(OpCode::Sub, {Exp::obs(kAapl, 0), Exp::real(100.0)});
  EXPECT_EQ(real_of(esem(e, {}, table({{{"AAPL", 0}, 110.0}}))), 10.0);
}

TEST(Esem, AccIdentityBody) {
  Exp e = Exp::acc(Var("x"), Exp::var(Var("x")), 3, Exp::real(7.0));
  EXPECT_EQ(real_of(esem(e, {}, ExtEnv{})), 7.0);
}

TEST(Esem, AccSumsPastObservations) {
  // acc(x -> x + obs(A,0), 2, 0) at day 0 = A(-1) + A(0)
  Exp e = Exp::acc(Var("x"), Exp::op(OpCode::Add, {Exp::var(Var("x")), Exp::obs(kAapl, 0)}), 2,
                   Exp::real(0.0));
  ExtEnv rho = table({{{"AAPL", -2}, 1.0}, {{"AAPL", -1}, 2.0}, {{"AAPL", 0}, 4.0}});
  EXPECT_EQ(real_of(esem(e, {}, rho)), 6.0);
}

TEST(Esem, NegativeIndex) {
  EXPECT_EQ(real_of(esem(Exp::obs(kAapl, -1), {}, table({{{"AAPL", -1}, 95.0}}))), 95.0);
}

TEST(Esem, ErrorClasses) {
  auto code = [](const Exp& e, const ExtEnv& rho) {
    try {
      esem(e, {}, rho);
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::InvalidConfig;
  };
  EXPECT_EQ(code(Exp::obs(kAapl, 3), ExtEnv{}), ErrorCode::MissingObservable);
  EXPECT_EQ(code(Exp::op(OpCode::Div, {Exp::real(1.0), Exp::real(0.0)}), ExtEnv{}),
            ErrorCode::DivisionByZero);
  ExtEnv::Table t;
  t.emplace(std::make_pair("AAPL", Int{0}), Value::boolean(true));
  EXPECT_EQ(code(Exp::obs(kAapl, 0), ExtEnv::from_table(t)), ErrorCode::SortMismatch);
}

TEST(Esem, MaxMinCond) {
  ExtEnv rho;
  auto ev = [&](OpCode op, std::vector<Exp> a) { return real_of(esem(Exp::op(op, a), {}, rho)); };
  EXPECT_EQ(ev(OpCode::Max, {Exp::real(2.0), Exp::real(-3.0)}), 2.0);
  EXPECT_EQ(ev(OpCode::Min, {Exp::real(2.0), Exp::real(-3.0)}), -3.0);
  EXPECT_EQ(ev(OpCode::Cond, {Exp::boolean(false), Exp::real(1.0), Exp::real(5.0)}), 5.0);
}

TEST(AdvEnv, Shifts) {
  ExtEnv rho = table({{{"AAPL", 1}, 7.0}, {{"AAPL", 0}, 3.0}});
  EXPECT_EQ(adv_env(rho, 1).at(kAapl, 0).as_real(), 7.0);
  EXPECT_EQ(adv_env(rho, 0).at(kAapl, 0).as_real(), 3.0);
  EXPECT_EQ(adv_env(adv_env(rho, 1), -1).at(kAapl, 0).as_real(), 3.0);
  EXPECT_EQ(adv_env(adv_env(rho, 1), -1).at(kAapl, 1).as_real(), 7.0);
}

TEST(Csem, ZeroIsEmpty) {
  Trace tr = csem(Contr::zero(), {}, ExtEnv{}, {});
  for (Nat n = 0; n < 5; ++n) EXPECT_TRUE(tr(n).is_zero());
}

TEST(Csem, TransferUnit) {
  Trace tr = csem(you_me(), {}, ExtEnv{}, {});
  EXPECT_EQ(tr(0)(kYou, kMe, kUsd), 1.0);
  EXPECT_EQ(tr(0)(kMe, kYou, kUsd), -1.0);
  EXPECT_EQ(tr(0)(kYou, kMe, Asset("EUR")), 0.0);
  EXPECT_TRUE(tr(1).is_zero());
}

TEST(Csem, FxSwapAtDay22) {
  Contr c = parse_contract(
      "scale(1.000.000, both(all[translate(22, transfer(me, you, EUR)), "
      "translate(52, transfer(me, you, EUR)), translate(83, transfer(me, you, EUR))], "
      "scale(7.21, all[translate(22, transfer(you, me, DKK)), translate(52, transfer(you, me, "
      "DKK)), translate(83, transfer(you, me, DKK))])))");
  Trace tr = csem(c, {}, ExtEnv{}, {});
  Trans t22 = tr(22);
  EXPECT_DOUBLE_EQ(t22(kMe, kYou, Asset("EUR")), 1000000.0);
  EXPECT_DOUBLE_EQ(t22(kYou, kMe, Asset("DKK")), 7210000.0);
  EXPECT_DOUBLE_EQ(t22(kYou, kMe, Asset("EUR")), -1000000.0);
  EXPECT_DOUBLE_EQ(t22(kMe, kYou, Asset("DKK")), -7210000.0);
  EXPECT_TRUE(tr(21).is_zero());
  EXPECT_TRUE(tr(53).is_zero());
  EXPECT_EQ(horizon(c, {}), 84u);
}

TEST(Csem, TranslateAdvancesObservations) {
  Contr c = Contr::translate(2, Contr::scale(Exp::obs(kAapl, 0), you_me()));
  Trace tr = csem(c, {}, table({{{"AAPL", 2}, 4.0}}), {});
  EXPECT_EQ(tr(2)(kYou, kMe, kUsd), 4.0);
}

TEST(Csem, IfWithinWaitsForCondition) {
  // Condition first true at day 2 (within window 3): c1 runs from day 2.
  Label flag{"F", Ty::Bool};
  ExtEnv::Table t;
  for (Int d = 0; d <= 3; ++d) t.emplace(std::make_pair("F", d), Value::boolean(d == 2));
  Contr c = Contr::if_within(Exp::obs(flag, 0), TemplateExpr::num(3), you_me(),
                             Contr::transfer(kMe, kYou, kUsd));
  Trace tr = csem(c, {}, ExtEnv::from_table(t), {});
  EXPECT_EQ(tr(2)(kYou, kMe, kUsd), 1.0);
  EXPECT_TRUE(tr(0).is_zero());
  EXPECT_TRUE(tr(3).is_zero());
  // Never true: c2 runs after the window, at day 3.
  ExtEnv::Table f;
  for (Int d = 0; d <= 3; ++d) f.emplace(std::make_pair("F", d), Value::boolean(false));
  Trace tf = csem(c, {}, ExtEnv::from_table(f), {});
  EXPECT_EQ(tf(3)(kMe, kYou, kUsd), 1.0);
}

TEST(Csem, LetBindsAtDefinitionTime) {
  Contr c = Contr::let(Var("v"), Exp::obs(kAapl, 0),
                       Contr::translate(1, Contr::scale(Exp::var(Var("v")), you_me())));
  Trace tr = csem(c, {}, table({{{"AAPL", 0}, 3.0}, {{"AAPL", 1}, 9.0}}), {});
  EXPECT_EQ(tr(1)(kYou, kMe, kUsd), 3.0);
}

TEST(Delay, Cases) {
  Trace unit0 = Trace::at_time(0, Trans::unit(kYou, kMe, kUsd));
  EXPECT_TRUE(approx_equal(delay(0, unit0), unit0));
  EXPECT_TRUE(approx_equal(delay(2, unit0), Trace::at_time(2, Trans::unit(kYou, kMe, kUsd))));
  EXPECT_TRUE(approx_equal(delay(3, trace_scale(2.5, unit0)), trace_scale(2.5, delay(3, unit0))));
}

TEST(TraceSpace, Laws) {
  Trace tr = Trace::at_time(1, 3.0 * Trans::unit(kYou, kMe, kUsd)) +
             Trace::at_time(4, Trans::unit(kMe, Party("bank"), Asset("EUR")));
  EXPECT_TRUE(trace_scale(0.0, tr).support_end() == 0);
  EXPECT_TRUE(approx_equal(trace_add(tr, Trace{}), tr));
  EXPECT_EQ(trace_add(tr, trace_scale(-1.0, tr)).support_end(), 0u);
}

TEST(Horizon, Cases) {
  EXPECT_EQ(horizon(Contr::zero(), {}), 0u);
  EXPECT_EQ(horizon(you_me(), {}), 1u);
  EXPECT_EQ(horizon(Contr::translate(5, Contr::zero()), {}), 0u);
  EXPECT_EQ(horizon(Contr::translate(5, you_me()), {}), 6u);
  EXPECT_EQ(horizon(Contr::translate(TemplateExpr::var(TVar("t")), you_me()), {{"t", 4}}), 5u);
  Contr w = Contr::if_within(Exp::boolean(true), TemplateExpr::num(3), you_me(), Contr::zero());
  EXPECT_EQ(horizon(w, {}), 4u);
}

TEST(Instantiate, Cases) {
  EXPECT_EQ(instantiate(Contr::zero(), {}), Contr::zero());
  EXPECT_EQ(instantiate(Contr::translate(TemplateExpr::var(TVar("t0")), Contr::zero()), {{"t0", 3}}),
            Contr::translate(3, Contr::zero()));
  Contr c = parse_contract("translate(t0, both(transfer(you, me), translate(t1, zero)))");
  EXPECT_TRUE(is_template_closed(instantiate(c, {{"t0", 1}, {"t1", 2}})));
}

TEST(Specialize, Cases) {
  ExtEnv known = table({{{"AAPL", 0}, 110.0}});
  EXPECT_EQ(specialize_exp(Exp::real(4.2), {}, ExtEnv{}), Exp::real(4.2));
  EXPECT_EQ(specialize_exp(Exp::op(OpCode::Lt, {Exp::obs(kAapl, 0), Exp::real(100.0)}), {}, known),
            Exp::boolean(false));
  Label x{"X", Ty::Real};
  Exp residual = Exp::op(OpCode::Add, {Exp::obs(x, 0), Exp::real(1.0)});
  EXPECT_EQ(specialize_exp(residual, {}, known), residual);
}

TEST(Promote, Cases) {
  EXPECT_EQ(promote(-1, Exp::obs(kAapl, 0)), Exp::obs(kAapl, -1));
  Exp e = Exp::op(OpCode::Add, {Exp::obs(kAapl, 2), Exp::real(1.0)});
  EXPECT_EQ(promote(0, e), e);
  ExtEnv rho = table({{{"AAPL", 1}, 5.0}, {{"AAPL", 2}, 8.0}});
  EXPECT_EQ(esem(promote(-1, e), {}, rho), esem(e, {}, adv_env(rho, -1)));
}

TEST(SmartConstructors, Cases) {
  EXPECT_EQ(smart_both(Contr::zero(), smart_translate(0, you_me())), you_me());
  EXPECT_EQ(smart_scale(Exp::real(0.0), you_me()), Contr::zero());
  EXPECT_EQ(smart_translate(3, Contr::zero()), Contr::zero());
  EXPECT_EQ(smart_let(Var("x"), Exp::real(1.0), you_me()), you_me());
}

TEST(Reduce, OneStepExample) {
  Contr c = Contr::both(you_me(), Contr::translate(1, you_me()));
  Reduct r = reduce(c, {}, ExtEnv{});
  EXPECT_EQ(r.residual, you_me());
  EXPECT_TRUE(approx_equal(r.transfer, Trans::unit(kYou, kMe, kUsd)));
}

TEST(Reduce, Zero) {
  Reduct r = reduce(Contr::zero(), {}, ExtEnv{});
  EXPECT_EQ(r.residual, Contr::zero());
  EXPECT_TRUE(r.transfer.is_zero());
}

TEST(Reduce, TranslateStepsDown) {
  Reduct r = reduce(Contr::translate(3, you_me()), {}, ExtEnv{});
  EXPECT_EQ(r.residual, Contr::translate(2, you_me()));
  EXPECT_TRUE(r.transfer.is_zero());
}

TEST(Reduce, ScalePromotesResidualObservation) {
  Contr c = Contr::translate(1, Contr::scale(Exp::obs(kAapl, 0), you_me()));
  Reduct r = reduce(c, {}, ExtEnv{});
  // obs(AAPL,1) relative to today is obs(AAPL,0) tomorrow.
  EXPECT_EQ(r.residual, Contr::scale(Exp::obs(kAapl, 0), you_me()));
}

TEST(Reduce, ScaleWithUnknownTodayIsError) {
  try {
    reduce(Contr::scale(Exp::obs(kAapl, 0), you_me()), {}, ExtEnv{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingObservable);
  }
}

TEST(Reduce, IfWithinKnownTrueReducesFirstBranch) {
  Contr c = Contr::if_within(Exp::op(OpCode::Gt, {Exp::obs(kAapl, 0), Exp::real(100.0)}),
                             TemplateExpr::num(2), you_me(), Contr::zero());
  Reduct r = reduce(c, {}, table({{{"AAPL", 0}, 110.0}}));
  EXPECT_EQ(r.residual, Contr::zero());
  EXPECT_TRUE(approx_equal(r.transfer, Trans::unit(kYou, kMe, kUsd)));
}

TEST(Reduce, IfWithinFalseCountsDown) {
  Contr c = Contr::if_within(Exp::op(OpCode::Gt, {Exp::obs(kAapl, 0), Exp::real(100.0)}),
                             TemplateExpr::num(2), you_me(), Contr::zero());
  Reduct r = reduce(c, {}, table({{{"AAPL", 0}, 90.0}}));
  Contr want = Contr::if_within(Exp::op(OpCode::Gt, {Exp::obs(kAapl, 0), Exp::real(100.0)}),
                                TemplateExpr::num(1), you_me(), Contr::zero());
  EXPECT_EQ(r.residual, want);
}

TEST(Reduce, IfWithinUnknownIsStuck) {
  Contr c = Contr::if_within(Exp::op(OpCode::Gt, {Exp::obs(kAapl, 0), Exp::real(100.0)}),
                             TemplateExpr::num(2), you_me(), Contr::zero());
  try {
    reduce(c, {}, ExtEnv{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ReductionStuck);
  }
}

TEST(Reduce, TemplateVariableRejected) {
  try {
    reduce(Contr::translate(TemplateExpr::var(TVar("t")), you_me()), {}, ExtEnv{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnboundTemplateVariable);
  }
}
