#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "contractc/codegen.hpp"
#include "contractc/compiler.hpp"
#include "contractc/properties.hpp"
#include "contractc/syntax.hpp"

using namespace contractc;

namespace {

std::string path_of(const std::string& name) { return std::string(CONTRACTC_TEST_DIR) + "/" + name; }

std::string slurp(const std::string& name) {
  std::ifstream in(path_of(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ILExpr example_il() { return compile_contract(parse_contract(slurp("data/option.cl"))); }

}  // namespace

// Set CONTRACTC_UPDATE_GOLDEN=1 to rewrite the checked-in module.
TEST(Emit, GoldenModule) {
  EmittedModule m = emit(example_il());
  if (std::getenv("CONTRACTC_UPDATE_GOLDEN")) {
    std::ofstream(path_of("golden/option_payoff.hs"), std::ios::binary) << m.source;
    GTEST_SKIP() << "golden rewritten";
  }
  EXPECT_EQ(m.source, slurp("golden/option_payoff.hs"));
  EXPECT_EQ(m.file_name, "PayoffFunction.hs");
  EXPECT_EQ(m.entry_point, "payoff");
  EXPECT_TRUE(m.helper_included);
  EXPECT_TRUE(lint(m).empty());
}

TEST(Emit, LiteralBody) {
  EmittedModule m = emit(ILExpr::real(0.0));
  EXPECT_NE(m.source.find("payoffInternal ext tenv t0 t_now p1 p2 =\n  0.0\n"), std::string::npos)
      << m.source;
  EXPECT_FALSE(m.helper_included);
  EXPECT_TRUE(lint(m).empty());
}

TEST(Emit, SimplifiedExampleHasNoHelper) {
  EmittedModule m = emit(simplify_loopif0(example_il()));
  EXPECT_FALSE(m.helper_included);
  EXPECT_EQ(m.source.find("loopif"), std::string::npos);
  EXPECT_NE(m.source.find("(if (100.0 < (ext Map.! (\"AAPL\","), std::string::npos) << m.source;
}

TEST(Emit, CutPayoffGuards) {
  EmittedModule m = emit(cut_payoff(example_il()));
  EXPECT_NE(m.source.find("(if (((tenv Map.! \"t0\") + t0) < t_now) then 0.0 else (disc"),
            std::string::npos)
      << m.source;
  EXPECT_TRUE(lint(m).empty());
}

TEST(Emit, ModuleNameAndBackend) {
  Backend b;
  b.kind = backend_from_name("haskell");
  b.module_name = "Pricing.Swap";
  EmittedModule m = emit(ILExpr::real(1.0), b);
  EXPECT_EQ(m.source.rfind("module Pricing.Swap where\n", 0), 0u);
  EXPECT_EQ(m.file_name, "Swap.hs");
  try {
    backend_from_name("opencl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownBackend);
  }
}

TEST(Lint, FindsDamage) {
  EmittedModule m = emit(example_il());
  m.source.pop_back();
  m.source.pop_back();
  m.source += ")\n";
  m.source += "(";
  EXPECT_FALSE(lint(m).empty());
}

TEST(SimplifyLoopIf0, Cases) {
  ILExpr c = ILExpr::boolean(true);
  ILExpr a = ILExpr::real(1.0);
  ILExpr b = ILExpr::real(2.0);
  EXPECT_EQ(simplify_loopif0(ILExpr::loopif(c, a, b, TemplateExpr::num(0))), ILExpr::if_(c, a, b));
  ILExpr two = ILExpr::loopif(c, a, b, TemplateExpr::num(2));
  EXPECT_EQ(simplify_loopif0(two), two);
  ILExpr var = ILExpr::loopif(c, a, b, TemplateExpr::var(TVar("w")));
  EXPECT_EQ(simplify_loopif0(var), var);
}

TEST(SimplifyLoopIf0, PreservesEvaluation) {
  props::Result r = props::simplify_loopif0_preserves(5, 100);
  EXPECT_TRUE(r.ok()) << (r.failures.empty() ? "" : r.failures[0]);
  EXPECT_EQ(r.cases, 100u);
}
