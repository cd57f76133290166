// Generated-case property suites. Seeds differ from the acceptance run.

#include <gtest/gtest.h>

#include "contractc/properties.hpp"

using namespace contractc;

namespace {

void expect_ok(const props::Result& r, Nat min_cases) {
  std::string msg;
  for (const auto& f : r.failures) msg += f + "\n";
  EXPECT_TRUE(r.ok()) << r.name << ":\n" << msg;
  EXPECT_GE(r.cases, min_cases) << r.name;
}

}  // namespace

TEST(Properties, Soundness) { expect_ok(props::soundness(101, 200), 200); }
TEST(Properties, Totality) { expect_ok(props::totality(102, 100, 5), 500); }
TEST(Properties, Commutation) { expect_ok(props::commutation(103, 100), 100); }
TEST(Properties, CutIdentityAtZero) { expect_ok(props::cut_identity_at_zero(104, 100, 5), 500); }

TEST(Properties, HorizonAndAntisymmetry) {
  props::Result anti("antisymmetry");
  expect_ok(props::horizon_soundness(105, 150, &anti), 150);
  expect_ok(anti, 150);
}

TEST(Properties, TraceAlgebra) { expect_ok(props::trace_algebra(106, 50), 50); }
TEST(Properties, Instantiation) { expect_ok(props::instantiation(107, 100, 3), 300); }
TEST(Properties, Specialization) { expect_ok(props::specialization(108, 150), 150); }
TEST(Properties, SmartConstructors) { expect_ok(props::smart_constructors(109, 100), 100); }
TEST(Properties, PromoteShift) { expect_ok(props::promote_shift(110, 150), 150); }
TEST(Properties, ReductionSoundness) { expect_ok(props::reduction_soundness(111, 100), 100); }
TEST(Properties, ExpressionSoundness) { expect_ok(props::expression_soundness(112, 150), 150); }
TEST(Properties, ShiftedStart) { expect_ok(props::generalised_t0(113, 100), 100); }
TEST(Properties, CutAndPayoffLaws) { expect_ok(props::cut_and_payoff_laws(114, 100), 100); }
TEST(Properties, TextRoundTrip) { expect_ok(props::text_round_trip(115, 150), 150); }
