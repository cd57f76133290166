#include <gtest/gtest.h>

#include "contractc/compiler.hpp"
#include "contractc/payoff_il.hpp"
#include "contractc/syntax.hpp"

using namespace contractc;

namespace {

const Label kAapl{"AAPL", Ty::Real};
const Disc kOne = [](Nat) { return 1.0; };

ILTExpr tv(const char* v) { return ILTExpr::var(TVar(v)); }

Contr example() {
  return parse_contract(
      "translate(t0, both(scale(100.0, transfer(you,me,USD)), translate(t1, "
      "if(obs(AAPL,0) > 100.0, scale(obs(AAPL,0) - 100.0, transfer(you,me,USD)), zero))))");
}

ExtEnv aapl_at(Int t, double v) {
  ExtEnv::Table tb;
  tb.emplace(std::make_pair("AAPL", t), Value::real(v));
  return ExtEnv::from_table(tb);
}

}  // namespace

TEST(Iltsem, Cases) {
  EXPECT_EQ(iltsem(ILTExpr::num(3), {}), 3u);
  EXPECT_EQ(iltsem(ILTExpr::plus(tv("t0"), tv("t1")), {{"t0", 2}, {"t1", 5}}), 7u);
  EXPECT_EQ(iltsem_z(ILTExprZ::plus(ILTExprZ::tez(tv("t0")), ILTExprZ::num(-3)), {{"t0", 2}}), -1);
}

TEST(Iltsem, OffsetAppliedAtPayoff) {
  // payoff(3, you, me) evaluated with t0 = 4 discounts at day 7.
  Disc d = [](Nat t) { return t == 7 ? 0.5 : 1.0; };
  ILVal v = il_sem(ILExpr::payoff(ILTExpr::num(3), Party("you"), Party("me")), ExtEnv{}, {}, 4, 0,
                   d, Party("you"), Party("me"));
  EXPECT_EQ(v.as_real(), 0.5);
}

TEST(IlSem, Literal) {
  ILVal v = il_sem(ILExpr::real(0.0), ExtEnv{}, {}, 0, 0, kOne, Party("you"), Party("me"));
  ASSERT_TRUE(v.is_real());
  EXPECT_EQ(v.as_real(), 0.0);
}

TEST(IlSem, CompiledExample) {
  ILVal v = il_sem(compile_contract(example()), aapl_at(7, 110.0), {{"t0", 2}, {"t1", 5}}, 0, 0,
                   kOne, Party("you"), Party("me"));
  EXPECT_DOUBLE_EQ(v.as_real(), 110.0);
}

TEST(IlSem, PayoffSign) {
  Disc d = [](Nat t) { return t == 3 ? 0.9 : 1.0; };
  ILExpr p = ILExpr::payoff(ILTExpr::num(3), Party("me"), Party("you"));
  EXPECT_DOUBLE_EQ(il_sem(p, ExtEnv{}, {}, 0, 0, d, Party("you"), Party("me")).as_real(), -0.9);
  EXPECT_DOUBLE_EQ(il_sem(p, ExtEnv{}, {}, 0, 0, d, Party("me"), Party("you")).as_real(), 0.9);
  EXPECT_EQ(il_sem(p, ExtEnv{}, {}, 0, 0, d, Party("bank"), Party("you")).as_real(), 0.0);
}

TEST(IlSem, LoopIfSearchesWindow) {
  // Condition true first at t0 + 2: then-branch evaluated there.
  ILExpr c = ILExpr::binop(ILBinOp::Lt, ILExpr::real(100.0), ILExpr::model(kAapl, ILTExprZ::num(0)));
  ILExpr body = ILExpr::model(kAapl, ILTExprZ::num(0));
  ILExpr l = ILExpr::loopif(c, body, ILExpr::real(-1.0), TemplateExpr::num(3));
  ExtEnv::Table tb;
  for (Int t = 0; t <= 3; ++t) tb.emplace(std::make_pair("AAPL", t), Value::real(t == 2 ? 120.0 : 90.0));
  ILVal v = il_sem(l, ExtEnv::from_table(tb), {}, 0, 0, kOne, Party("you"), Party("me"));
  EXPECT_EQ(v.as_real(), 120.0);
}

TEST(IlSem, SortErrors) {
  ILExpr bad = ILExpr::binop(ILBinOp::Add, ILExpr::boolean(true), ILExpr::real(1.0));
  try {
    il_sem(bad, ExtEnv{}, {}, 0, 0, kOne, Party("you"), Party("me"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SortMismatch);
  }
}

TEST(CutPayoff, LeavesModelAlone) {
  ILExpr m = ILExpr::model(kAapl, ILTExprZ::num(0));
  EXPECT_EQ(cut_payoff(m), m);
}

TEST(CutPayoff, GuardsEveryPayoff) {
  ILExpr e = compile_contract(example());
  ILExpr guarded = ILExpr::if_(ILExpr::binop(ILBinOp::LtN, ILExpr::tval(tv("t0")), ILExpr::now()),
                               ILExpr::real(0.0), ILExpr::payoff(tv("t0"), Party("you"), Party("me")));
  ILExpr cut = cut_payoff(e);
  std::string s = print_il(cut);
  EXPECT_NE(s.find(print_il(guarded)), std::string::npos) << s;
  EXPECT_NE(s.find("if(ltn(tval(t0+t1), now), 0.0, payoff(t0+t1, you, me))"), std::string::npos)
      << s;
}

TEST(CutPayoff, DropsPastPayments) {
  ILExpr cut = cut_payoff(compile_contract(example()));
  TEnv d{{"t0", 2}, {"t1", 5}};
  ExtEnv rho = aapl_at(7, 110.0);
  auto at = [&](Nat now) {
    return il_sem(cut, rho, d, 0, now, kOne, Party("you"), Party("me")).as_real();
  };
  EXPECT_DOUBLE_EQ(at(0), 110.0);
  EXPECT_DOUBLE_EQ(at(2), 110.0);
  EXPECT_DOUBLE_EQ(at(3), 10.0);
  EXPECT_DOUBLE_EQ(at(8), 0.0);
}

TEST(IlEquiv, Reflexive) {
  ILExpr e = compile_contract(example());
  std::vector<ILCase> cases{{aapl_at(7, 110.0), {{"t0", 2}, {"t1", 5}}, kOne, Party("you"), Party("me")},
                            {aapl_at(7, 90.0), {{"t0", 2}, {"t1", 5}}, kOne, Party("me"), Party("you")}};
  EXPECT_TRUE(il_equiv_at(e, e, 0, 0, cases));
  EXPECT_TRUE(il_equiv_at(cut_payoff(e), e, 0, 0, cases));
  EXPECT_TRUE(il_equiv_at(cut_payoff(e), e, 0, 2, cases));
  EXPECT_FALSE(il_equiv_at(cut_payoff(e), e, 0, 3, cases));
}

TEST(IlText, ParsesSugar) {
  ILExpr a = parse_il("if(model(AAPL, t0+t1) > 100.0, 1.0, 0.0)");
  ILExpr b = ILExpr::if_(ILExpr::binop(ILBinOp::Lt, ILExpr::real(100.0),
                                       ILExpr::model(kAapl, ILTExprZ::tez(ILTExpr::plus(tv("t0"), tv("t1"))))),
                         ILExpr::real(1.0), ILExpr::real(0.0));
  EXPECT_EQ(a, b);
}

TEST(IlText, RoundTrip) {
  ILExpr e = cut_payoff(compile_contract(example()));
  EXPECT_EQ(parse_il(print_il(e)), e);
  ILExpr n = ILExpr::binop(ILBinOp::Sub, ILExpr::real(-1.5),
                           ILExpr::unop(ILUnOp::Neg, ILExpr::model(kAapl, ILTExprZ::num(-2))));
  EXPECT_EQ(parse_il(print_il(n)), n) << print_il(n);
}
