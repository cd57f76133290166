#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "contractc/codegen.hpp"
#include "contractc/compiler.hpp"
#include "contractc/syntax.hpp"

using namespace contractc;

namespace {

const Label kAapl{"AAPL", Ty::Real};
const Disc kOne = [](Nat) { return 1.0; };

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(CONTRACTC_TEST_DIR) + "/" + name);
  EXPECT_TRUE(in) << name;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Contr example() { return parse_contract(slurp("data/option.cl")); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST(SmartTplus, Cases) {
  EXPECT_EQ(smart_tplus(ILTExpr::num(2), ILTExpr::num(3)), ILTExpr::num(5));
  ILTExpr v = ILTExpr::var(TVar("t0"));
  EXPECT_EQ(smart_tplus(v, ILTExpr::num(3)), ILTExpr::plus(v, ILTExpr::num(3)));
  EXPECT_EQ(smart_tplus(v, ILTExpr::num(0)), v);
  EXPECT_EQ(smart_tplus(ILTExpr::num(0), v), v);
}

TEST(SmartTplus, Semantics) {
  TEnv d{{"a", 4}, {"b", 9}};
  std::vector<ILTExpr> xs{ILTExpr::num(0), ILTExpr::num(6), ILTExpr::var(TVar("a")),
                          ILTExpr::plus(ILTExpr::var(TVar("b")), ILTExpr::num(1))};
  for (const auto& a : xs)
    for (const auto& b : xs) EXPECT_EQ(iltsem(smart_tplus(a, b), d), iltsem(a, d) + iltsem(b, d));
}

TEST(CompileExp, Cases) {
  EXPECT_EQ(compile_exp(Exp::real(100.0)), ILExpr::real(100.0));
  ILTExprZ t0 = ILTExprZ::tez(ILTExpr::var(TVar("t0")));
  EXPECT_EQ(compile_exp(Exp::obs(kAapl, 0), t0), ILExpr::model(kAapl, t0));
  EXPECT_EQ(compile_exp(Exp::obs(kAapl, -2), t0),
            ILExpr::model(kAapl, ILTExprZ::plus(t0, ILTExprZ::num(-2))));
  Exp acc = Exp::acc(Var("x"), Exp::var(Var("x")), 2, Exp::real(1.0));
  EXPECT_EQ(code_of([&] { compile_exp(acc); }), ErrorCode::UnsupportedAcc);
  EXPECT_EQ(code_of([&] { compile_exp(Exp::var(Var("x"))); }), ErrorCode::UnsupportedVar);
}

TEST(CompileExp, DerivedOperators) {
  Exp a = Exp::obs(kAapl, 0);
  Exp b = Exp::real(3.0);
  ILExpr ma = compile_exp(a);
  ILExpr mb = compile_exp(b);
  EXPECT_EQ(compile_exp(Exp::op(OpCode::Gt, {a, b})), ILExpr::binop(ILBinOp::Lt, mb, ma));
  EXPECT_EQ(compile_exp(Exp::op(OpCode::Ge, {a, b})), ILExpr::binop(ILBinOp::Le, mb, ma));
  EXPECT_EQ(compile_exp(Exp::op(OpCode::Max, {a, b})),
            ILExpr::if_(ILExpr::binop(ILBinOp::Lt, ma, mb), mb, ma));
}

TEST(CompileContract, Zero) { EXPECT_EQ(compile_contract(Contr::zero()), ILExpr::real(0.0)); }

TEST(CompileContract, BothZeroZero) {
  EXPECT_EQ(compile_contract(Contr::both(Contr::zero(), Contr::zero()), ILTExpr::num(0)),
            ILExpr::binop(ILBinOp::Add, ILExpr::real(0.0), ILExpr::real(0.0)));
}

TEST(CompileContract, ExampleMatchesExpectedText) {
  ILExpr il = compile_contract(example(), ILTExpr::num(0));
  ILExpr want = parse_il(slurp("golden/option.il"));
  EXPECT_EQ(simplify_loopif0(il), want) << print_il(il);
}

TEST(CompileContract, LetRejected) {
  Contr c = Contr::let(Var("x"), Exp::real(1.0), Contr::scale(Exp::var(Var("x")), Contr::zero()));
  EXPECT_EQ(code_of([&] { compile_contract(c); }), ErrorCode::UnsupportedLet);
  EXPECT_FALSE(is_compilable(c));
  EXPECT_TRUE(is_compilable(example()));
}

TEST(CompileContract, ErrorPathNamesNode) {
  Contr c = Contr::both(Contr::zero(), Contr::scale(Exp::var(Var("x")), Contr::zero()));
  try {
    compile_contract(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("both"), std::string::npos) << e.what();
  }
}

TEST(AggregatePrice, Cases) {
  Party you("you"), me("me");
  EXPECT_EQ(aggregate_price(Contr::zero(), {}, ExtEnv{}, {}, kOne, you, me), 0.0);
  EXPECT_EQ(aggregate_price(Contr::transfer(you, me, Asset("USD")), {}, ExtEnv{}, {}, kOne, you, me),
            1.0);
}

TEST(AggregatePrice, EuropeanOption) {
  Contr c = parse_contract(
      "translate(T, if(obs(AAPL,0) > 100.0, scale(obs(AAPL,0) - 100.0, transfer(you, me)), zero))");
  ExtEnv::Table tb;
  tb.emplace(std::make_pair("AAPL", Int{2}), Value::real(110.0));
  double p = aggregate_price(c, {}, ExtEnv::from_table(tb), {{"T", 2}}, kOne, Party("you"),
                             Party("me"));
  EXPECT_DOUBLE_EQ(p, 10.0);
}

TEST(AggregatePrice, DiscountedExampleAgreesWithCompiled) {
  ExtEnv::Table tb;
  tb.emplace(std::make_pair("AAPL", Int{7}), Value::real(130.0));
  ExtEnv rho = ExtEnv::from_table(tb);
  TEnv d{{"t0", 2}, {"t1", 5}};
  Disc disc = [](Nat t) { return std::exp(-0.01 * static_cast<double>(t)); };
  double oracle = aggregate_price(example(), {}, rho, d, disc, Party("you"), Party("me"));
  double il = il_sem(compile_contract(example()), rho, d, 0, 0, disc, Party("you"), Party("me")).as_real();
  EXPECT_NEAR(oracle, 100.0 * std::exp(-0.02) + 30.0 * std::exp(-0.07), 1e-12);
  EXPECT_NEAR(il, oracle, 1e-12);
}
