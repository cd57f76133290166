#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "contractc/pricing.hpp"
#include "contractc/syntax.hpp"

using namespace contractc;

namespace {

std::string path_of(const std::string& name) { return std::string(CONTRACTC_TEST_DIR) + "/" + name; }

Contr load_contract(const std::string& name) {
  return parse_contract(detail::read_file(path_of(name)));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidConfig;
}

PricingConfig flat_config(TEnv d = {}) {
  PricingConfig cfg;
  cfg.discount = DiscountSpec::flat(0.0);
  cfg.tenv = std::move(d);
  return cfg;
}

const Label kAapl{"AAPL", Ty::Real};
const Label kS{"S", Ty::Real};

}  // namespace

TEST(LoadEnv, SingleEntry) {
  ExtEnv rho = parse_env(R"({"AAPL": {"0": 110.0}})");
  EXPECT_EQ(rho.at(kAapl, 0).as_real(), 110.0);
  EXPECT_FALSE(rho.find("AAPL", 1).has_value());
}

TEST(LoadEnv, NegativeKeyRoundTripsThroughShift) {
  ExtEnv rho = parse_env(R"({"AAPL": {"-1": 95.0, "0": 100.0}})");
  EXPECT_EQ(rho.at(kAapl, -1).as_real(), 95.0);
  EXPECT_EQ(adv_env(rho, -1).at(kAapl, 0).as_real(), 95.0);
  EXPECT_EQ(env_to_json(rho), json::parse(R"({"AAPL": {"-1": 95.0, "0": 100.0}})"));
}

TEST(LoadEnv, FromFile) {
  ExtEnv rho = load_env(path_of("data/option_env.json"));
  EXPECT_EQ(rho.at(kAapl, 7).as_real(), 110.0);
}

TEST(LoadEnv, Errors) {
  EXPECT_EQ(code_of([] { parse_env(R"({"A": {"x": 1}})"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_env(R"({"A": {"0": "one"}})"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_env(R"([1, 2])"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_env(R"({"A": {"0": 1, "0": 2}})"); }), ErrorCode::DuplicateKey);
  EXPECT_EQ(code_of([] { load_env(path_of("data/dup_env.json")); }), ErrorCode::DuplicateKey);
  EXPECT_EQ(code_of([] { parse_env(R"({"F": {"0": 1.0}})", {{"F", Ty::Bool}}); }),
            ErrorCode::SortMismatch);
  EXPECT_EQ(code_of([] { parse_env(R"({"A": {"0": 1.0, "1": true}})"); }), ErrorCode::SortMismatch);
  EXPECT_EQ(code_of([] { parse_env("{"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { load_env(path_of("data/missing.json")); }), ErrorCode::Io);
}

TEST(LoadTenv, Cases) {
  TEnv d = load_tenv(path_of("data/option_tenv.json"));
  EXPECT_EQ(d.at(TVar("t0")), 2u);
  EXPECT_EQ(d.at(TVar("t1")), 5u);
  EXPECT_EQ(code_of([] { parse_tenv(R"({"t0": -1})"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_tenv(R"({"t0": 1.5})"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_tenv(R"({"t0": 1, "t0": 2})"); }), ErrorCode::DuplicateKey);
}

TEST(Discount, FlatAndTable) {
  Disc d = DiscountSpec::flat(0.05).function();
  EXPECT_EQ(d(0), 1.0);
  EXPECT_DOUBLE_EQ(d(4), std::exp(-0.2));
  Disc t = parse_discount_table("[1.0, 0.99, 0.97]").function();
  EXPECT_EQ(t(2), 0.97);
  EXPECT_EQ(code_of([&] { t(3); }), ErrorCode::MissingDiscount);
  EXPECT_EQ(shift_disc(t, 1)(1), 0.97);
  EXPECT_EQ(code_of([] { DiscountSpec::flat(std::nan("")); }), ErrorCode::InvalidConfig);
}

TEST(Price, ZeroContract) {
  for (Pipeline p : {Pipeline::Oracle, Pipeline::Compiled, Pipeline::CompiledCut})
    EXPECT_EQ(price(Contr::zero(), ExtEnv{}, flat_config(), p).price, 0.0);
}

TEST(Price, ExampleAllPipelines) {
  Contr c = load_contract("data/option.cl");
  ExtEnv rho = load_env(path_of("data/option_env.json"));
  PricingConfig cfg = flat_config(load_tenv(path_of("data/option_tenv.json")));
  for (Pipeline p : {Pipeline::Oracle, Pipeline::Compiled, Pipeline::CompiledCut}) {
    PriceReport r = price(c, rho, cfg, p);
    EXPECT_DOUBLE_EQ(r.price, 110.0) << pipeline_name(p);
    EXPECT_EQ(r.stderr_estimate, 0.0);
    EXPECT_EQ(r.horizon_used, 8u);
  }
}

TEST(Price, ErrorsAreDistinct) {
  Contr c = load_contract("data/option.cl");
  PricingConfig cfg = flat_config(load_tenv(path_of("data/option_tenv.json")));
  EXPECT_EQ(code_of([&] { price(c, ExtEnv{}, cfg, Pipeline::Compiled); }),
            ErrorCode::MissingObservable);
  EXPECT_EQ(code_of([&] { price(c, ExtEnv{}, flat_config(), Pipeline::Oracle); }),
            ErrorCode::UnboundTemplateVariable);
  Contr let = parse_contract("let v = 1.0 in scale(v, transfer(you, me))");
  EXPECT_EQ(code_of([&] { price(let, ExtEnv{}, flat_config(), Pipeline::Compiled); }),
            ErrorCode::UnsupportedLet);
  EXPECT_EQ(price(let, ExtEnv{}, flat_config(), Pipeline::Oracle).price, 1.0);
}

TEST(Price, CutPipelineAtLaterNow) {
  Contr c = load_contract("data/option.cl");
  ExtEnv rho = load_env(path_of("data/option_env.json"));
  PricingConfig cfg = flat_config(load_tenv(path_of("data/option_tenv.json")));
  cfg.t_now = 3;
  EXPECT_DOUBLE_EQ(price(c, rho, cfg, Pipeline::CompiledCut).price, 10.0);
}

TEST(Commutation, ExampleOneDay) {
  Contr c = load_contract("data/option.cl");
  ExtEnv rho = load_env(path_of("data/option_env.json"));
  PricingConfig cfg = flat_config(load_tenv(path_of("data/option_tenv.json")));
  cfg.discount = DiscountSpec::flat(0.01);
  CommutationResult r = commutation_check(c, rho, rho, cfg);
  EXPECT_TRUE(r.agree) << r.cut_at_one << " vs " << r.reduced_at_zero;
  EXPECT_NEAR(r.cut_at_one, 100.0 * std::exp(-0.02) + 10.0 * std::exp(-0.07), 1e-12);
  EXPECT_TRUE(r.today.is_zero());
}

TEST(Gbm, PathMatchesReference) {
  // Reference values from an independent implementation of the documented
  // mt19937_64 / splitmix64 / FNV-1a / Box-Muller chain.
  Gbm g{100.0, 0.001, 0.2, 11};
  std::vector<double> p0 = detail::gbm_path(g, "S", 0, 4);
  std::vector<double> p1 = detail::gbm_path(g, "S", 1, 4);
  const double want0[] = {100.0, 110.17979994338367, 109.95157077855636, 62.38194594778985,
                          99.88390313053955};
  const double want1[] = {100.0, 104.5014794789191, 100.86827521681532, 101.95009202096215,
                          87.44251706996957};
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(p0[i], want0[i], 1e-10 * want0[i]);
    EXPECT_NEAR(p1[i], want1[i], 1e-10 * want1[i]);
  }
}

TEST(Gbm, ZeroVolIsFlat) {
  Gbm g{110.0, 0.0, 0.0, 3};
  for (double v : detail::gbm_path(g, "S", 5, 10)) EXPECT_EQ(v, 110.0);
}

TEST(MonteCarlo, ZeroContract) {
  ScenarioSpec spec;
  spec.n_paths = 50;
  spec.labels.emplace("S", Gbm{100.0, 0.0, 0.3, 1});
  PriceReport r = monte_carlo_price(Contr::zero(), spec, flat_config());
  EXPECT_EQ(r.price, 0.0);
  EXPECT_EQ(r.stderr_estimate, 0.0);
}

TEST(MonteCarlo, SinglePathTableEqualsCompiled) {
  Contr c = load_contract("data/option.cl");
  ExtEnv rho = load_env(path_of("data/option_env.json"));
  PricingConfig cfg = flat_config(load_tenv(path_of("data/option_tenv.json")));
  ScenarioSpec spec;
  spec.labels.emplace("AAPL", rho);
  PriceReport mc = monte_carlo_price(c, spec, cfg);
  EXPECT_EQ(mc.price, price(c, rho, cfg, Pipeline::Compiled).price);
  EXPECT_EQ(mc.stderr_estimate, 0.0);
}

TEST(MonteCarlo, VolZeroEuropean) {
  Contr c = load_contract("data/european.cl");
  ScenarioSpec spec = load_scenario(path_of("data/european_flat.json"));
  spec.n_paths = 25;
  PriceReport r = monte_carlo_price(c, spec, flat_config());
  EXPECT_EQ(r.price, 10.0);
  EXPECT_EQ(r.stderr_estimate, 0.0);
}

TEST(MonteCarlo, DeterministicForSeed) {
  Contr c = load_contract("data/european.cl");
  ScenarioSpec spec = load_scenario(path_of("data/european_gbm.json"));
  spec.n_paths = 500;
  json a = to_json(monte_carlo_price(c, spec, flat_config()));
  json b = to_json(monte_carlo_price(c, spec, flat_config()));
  EXPECT_EQ(a.dump(), b.dump());
  std::get<Gbm>(spec.labels.at("S")).seed = 12;
  EXPECT_NE(to_json(monte_carlo_price(c, spec, flat_config())).dump(), a.dump());
}

TEST(MonteCarlo, HistoryWinsOverSimulation) {
  Contr c = parse_contract("scale(obs(S, 1), transfer(you, me))");
  ScenarioSpec spec;
  spec.labels.emplace("S", Gbm{100.0, 0.0, 0.5, 9});
  spec.history = parse_env(R"({"S": {"1": 42.0}})");
  EXPECT_EQ(monte_carlo_price(c, spec, flat_config()).price, 42.0);
}

TEST(Scenario, Errors) {
  EXPECT_EQ(code_of([] { parse_scenario(R"({"labels": {"S": {"gbm": {"spot": 1, "vol": -1}}}})"); }),
            ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_scenario(R"({"paths": 0, "labels": {}})"); }), ErrorCode::Schema);
  EXPECT_EQ(code_of([] { parse_scenario(R"({"labels": {"S": {"walk": {}}}})"); }), ErrorCode::Schema);
}
