#pragma once

// Environment files, discounting, the three pricing pipelines, the one-day
// commutation check and Monte Carlo pricing over simulated paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "contractc/ast.hpp"
#include "contractc/compiler.hpp"
#include "contractc/error.hpp"
#include "contractc/payoff_il.hpp"
#include "contractc/reduction.hpp"
#include "contractc/semantics.hpp"

namespace contractc {

using json = nlohmann::json;

// --- discounting ---------------------------------------------------------------

struct DiscountSpec {
  enum class Kind { FlatRate, Table };
  Kind kind = Kind::FlatRate;
  double rate = 0.0;           // d(t) = exp(-rate * t)
  std::vector<double> table;   // d(t) = table[t]

  static DiscountSpec flat(double r) {
    if (!std::isfinite(r)) throw Error(ErrorCode::InvalidConfig, "discount rate must be finite");
    return DiscountSpec{Kind::FlatRate, r, {}};
  }
  static DiscountSpec from_table(std::vector<double> t) {
    for (double v : t)
      if (!std::isfinite(v))
        throw Error(ErrorCode::InvalidConfig, "discount table entries must be finite");
    return DiscountSpec{Kind::Table, 0.0, std::move(t)};
  }

  Disc function() const {
    if (kind == Kind::FlatRate) {
      double r = rate;
      return [r](Nat t) { return r == 0.0 ? 1.0 : std::exp(-r * static_cast<double>(t)); };
    }
    auto tbl = std::make_shared<const std::vector<double>>(table);
    return [tbl](Nat t) {
      if (t >= tbl->size())
        throw Error(ErrorCode::MissingDiscount,
                    "discount table has no factor for day " + std::to_string(t));
      return (*tbl)[t];
    };
  }
};

/// d/n : t -> d(t + n)
inline Disc shift_disc(Disc d, Nat n) {
  return [d = std::move(d), n](Nat t) { return d(t + n); };
}

struct PricingConfig {
  DiscountSpec discount;
  Party p1 = "you";
  Party p2 = "me";
  Nat t_now = 0;
  TEnv tenv;
};

enum class Pipeline { Oracle, Compiled, CompiledCut };

inline const char* pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::Oracle: return "oracle";
    case Pipeline::Compiled: return "compiled";
    case Pipeline::CompiledCut: return "compiled-cut";
  }
  return "?";
}

inline Pipeline pipeline_from_name(const std::string& s) {
  if (s == "oracle") return Pipeline::Oracle;
  if (s == "compiled") return Pipeline::Compiled;
  if (s == "compiled-cut" || s == "cut") return Pipeline::CompiledCut;
  throw Error(ErrorCode::InvalidConfig, "unknown pipeline '" + s + "'");
}

struct PriceReport {
  double price = 0.0;
  double stderr_estimate = 0.0;
  Pipeline pipeline = Pipeline::Oracle;
  Nat horizon_used = 0;
  Nat paths = 0;
};

inline json to_json(const PriceReport& r) {
  json j{{"price", r.price},
         {"stderr", r.stderr_estimate},
         {"pipeline", pipeline_name(r.pipeline)},
         {"horizon", r.horizon_used}};
  if (r.paths) j["paths"] = r.paths;
  return j;
}

// --- files -----------------------------------------------------------------------

namespace detail {

/// Parse JSON, rejecting objects with repeated keys.
inline json parse_json_strict(const std::string& text, const std::string& what) {
  std::vector<std::set<std::string>> seen;
  json::parser_callback_t cb = [&](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start: seen.emplace_back(); break;
      case json::parse_event_t::object_end: seen.pop_back(); break;
      case json::parse_event_t::key: {
        auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second)
          throw Error(ErrorCode::DuplicateKey, what + ": duplicate key '" + key + "'");
        break;
      }
      default: break;
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, what + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Int parse_time_key(const std::string& k, const std::string& where) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(k, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != k.size())
    throw Error(ErrorCode::Schema, where + ": time key '" + k + "' is not an integer");
  return static_cast<Int>(v);
}

}  // namespace detail

/// {"LABEL": {"<int time>": number | bool, ...}, ...}. Labels listed in
/// `sorts` must carry values of that sort; others must be uniform.
inline ExtEnv parse_env(const std::string& text, const std::map<std::string, Ty>& sorts = {},
                        const std::string& what = "env") {
  json j = detail::parse_json_strict(text, what);
  if (!j.is_object()) throw Error(ErrorCode::Schema, what + ": top level must be an object");
  ExtEnv::Table table;
  for (const auto& [label, series] : j.items()) {
    if (!series.is_object())
      throw Error(ErrorCode::Schema, what + ": '" + label + "' must map times to values");
    std::optional<Ty> sort;
    if (auto it = sorts.find(label); it != sorts.end()) sort = it->second;
    for (const auto& [key, v] : series.items()) {
      Int t = detail::parse_time_key(key, what + "/" + label);
      Value val;
      if (v.is_boolean()) {
        val = Value::boolean(v.get<bool>());
      } else if (v.is_number()) {
        val = Value::real(v.get<double>());
      } else {
        throw Error(ErrorCode::Schema, what + "/" + label + "/" + key + ": expected number or bool");
      }
      if (!sort) sort = val.sort();
      if (val.sort() != *sort)
        throw Error(ErrorCode::SortMismatch, what + "/" + label + "/" + key + ": expected " +
                                                 ty_name(*sort) + " value");
      table.emplace(std::make_pair(label, t), val);
    }
  }
  return ExtEnv::from_table(std::move(table));
}

inline ExtEnv load_env(const std::string& path, const std::map<std::string, Ty>& sorts = {}) {
  return parse_env(detail::read_file(path), sorts, path);
}

/// {"var": natural, ...}
inline TEnv parse_tenv(const std::string& text, const std::string& what = "tenv") {
  json j = detail::parse_json_strict(text, what);
  if (!j.is_object()) throw Error(ErrorCode::Schema, what + ": top level must be an object");
  TEnv out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_unsigned())
      throw Error(ErrorCode::Schema, what + "/" + k + ": expected a natural number");
    out.set(k, v.get<Nat>());
  }
  return out;
}

inline TEnv load_tenv(const std::string& path) { return parse_tenv(detail::read_file(path), path); }

/// A JSON array of factors indexed by day.
inline DiscountSpec parse_discount_table(const std::string& text,
                                         const std::string& what = "discount") {
  json j = detail::parse_json_strict(text, what);
  if (!j.is_array()) throw Error(ErrorCode::Schema, what + ": expected an array of factors");
  std::vector<double> t;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::Schema, what + ": factors must be numbers");
    t.push_back(v.get<double>());
  }
  return DiscountSpec::from_table(std::move(t));
}

inline DiscountSpec load_discount_table(const std::string& path) {
  return parse_discount_table(detail::read_file(path), path);
}

/// Serialises the table-backed part of an environment.
inline json env_to_json(const ExtEnv& env) {
  json j = json::object();
  if (const auto* t = env.table()) {
    for (const auto& [k, v] : *t) {
      json& series = j[k.first];
      if (v.is_real()) {
        series[std::to_string(k.second)] = v.as_real();
      } else {
        series[std::to_string(k.second)] = v.as_bool();
      }
    }
  }
  return j;
}

// --- pricing ---------------------------------------------------------------------

namespace detail {

inline double expect_real(const ILVal& v) {
  if (!v.is_real()) throw Error(ErrorCode::SortMismatch, "payoff expression did not yield a real");
  return v.as_real();
}

}  // namespace detail

inline PriceReport price(const Contr& c, const ExtEnv& rho, const PricingConfig& cfg,
                         Pipeline pipeline) {
  PriceReport r;
  r.pipeline = pipeline;
  r.horizon_used = horizon(c, cfg.tenv);
  Disc d = cfg.discount.function();
  switch (pipeline) {
    case Pipeline::Oracle:
      r.price = aggregate_price(c, {}, rho, cfg.tenv, d, cfg.p1, cfg.p2);
      break;
    case Pipeline::Compiled:
      r.price = detail::expect_real(
          il_sem(compile_contract(c), rho, cfg.tenv, 0, 0, d, cfg.p1, cfg.p2));
      break;
    case Pipeline::CompiledCut:
      r.price = detail::expect_real(il_sem(cut_payoff(compile_contract(c)), rho, cfg.tenv, 0,
                                           cfg.t_now, d, cfg.p1, cfg.p2));
      break;
  }
  return r;
}

struct CommutationResult {
  double cut_at_one = 0.0;       // evalAt_1 . cutPayoff . compile
  double reduced_at_zero = 0.0;  // evalAt_0 . compile . reduce, under rho/1 and d/1
  Contr residual;
  Trans today;
  bool agree = false;
};

/// One-day commutation: pricing the guarded payoff at now = 1 equals pricing
/// the reduced contract tomorrow. `rho_known` is what reduction may consult;
/// `rho` is the evaluation environment.
inline CommutationResult commutation_check(const Contr& c, const ExtEnv& rho,
                                           const ExtEnv& rho_known, const PricingConfig& cfg,
                                           double tol = 1e-7) {
  Contr closed = instantiate(c, cfg.tenv);
  Disc d = cfg.discount.function();
  CommutationResult out;
  out.cut_at_one = detail::expect_real(
      il_sem(cut_payoff(compile_contract(closed)), rho, cfg.tenv, 0, 1, d, cfg.p1, cfg.p2));
  Reduct red = reduce(closed, {}, rho_known);
  out.residual = red.residual;
  out.today = red.transfer;
  out.reduced_at_zero = detail::expect_real(il_sem(compile_contract(red.residual),
                                                   rho.advanced(1), cfg.tenv, 0, 0,
                                                   shift_disc(d, 1), cfg.p1, cfg.p2));
  out.agree = std::abs(out.cut_at_one - out.reduced_at_zero) <=
              tol * (1.0 + std::abs(out.cut_at_one));
  return out;
}

// --- Monte Carlo -----------------------------------------------------------------

/// Latest absolute day at which evaluation of c may consult an observable
/// (negative indices may make this negative).
inline Int max_observation_time(const Contr& c, const TEnv& delta) {
  using namespace contr_node;
  Int best = 0;
  std::function<void(const Exp&, Int)> ex = [&](const Exp& e, Int off) {
    std::visit(overloaded{
                   [&](const exp_node::Obs& o) { best = std::max(best, off + o.index); },
                   [&](const exp_node::Op& o) {
                     for (const auto& a : o.args) ex(a, off);
                   },
                   [&](const exp_node::Acc& a) {
                     ex(*a.body, off);
                     ex(*a.init, off);
                   },
                   [](const auto&) {},
               },
               e.node());
  };
  std::function<void(const Contr&, Int)> go = [&](const Contr& k, Int off) {
    std::visit(overloaded{
                   [](const Zero&) {},
                   [](const Transfer&) {},
                   [&](const Let& l) {
                     ex(l.exp, off);
                     go(*l.body, off);
                   },
                   [&](const Scale& s) {
                     ex(s.factor, off);
                     go(*s.body, off);
                   },
                   [&](const Translate& t) {
                     go(*t.body, off + static_cast<Int>(tsem(t.delay, delta)));
                   },
                   [&](const Both& b) {
                     go(*b.left, off);
                     go(*b.right, off);
                   },
                   [&](const IfWithin& i) {
                     Int w = static_cast<Int>(tsem(i.window, delta));
                     ex(i.cond, off + w);
                     go(*i.then_branch, off + w);
                     go(*i.else_branch, off + w);
                   },
               },
               k.node());
  };
  go(c, 0);
  return best;
}

/// S_0 = spot; S_{t+1} = S_t * exp((drift - vol^2/2) + vol * Z_t); S_t = spot for t < 0.
struct Gbm {
  double spot = 100.0;
  double drift = 0.0;
  double vol = 0.0;
  std::uint64_t seed = 0;
};

using Generator = std::variant<ExtEnv, Gbm>;

struct ScenarioSpec {
  std::map<std::string, Generator> labels;
  Nat n_paths = 1;
  Nat horizon_hint = 0;
  std::optional<ExtEnv> history;  // wins over generated values on collision
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Box-Muller over 53-bit uniforms from mt19937_64; both variates are used.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double k = 1.0 / 9007199254740992.0;  // 2^-53
    double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * k;  // (0, 1]
    double u2 = static_cast<double>(eng_() >> 11) * k;          // [0, 1)
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> gbm_path(const Gbm& g, const std::string& label, Nat path, Nat steps) {
  std::uint64_t s = splitmix64(splitmix64(g.seed ^ fnv1a(label)) + path);
  NormalStream z(s);
  std::vector<double> out(steps + 1);
  out[0] = g.spot;
  double mu = g.drift - 0.5 * g.vol * g.vol;
  for (Nat t = 0; t < steps; ++t) out[t + 1] = out[t] * std::exp(mu + g.vol * z.next());
  return out;
}

/// Fixed-order pairwise sum.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace detail

/// Environment for one simulated path.
inline ExtEnv scenario_env(const ScenarioSpec& spec, Nat path, Nat steps) {
  auto paths = std::make_shared<std::map<std::string, std::vector<double>>>();
  auto tables = std::make_shared<std::map<std::string, ExtEnv>>();
  for (const auto& [label, gen] : spec.labels) {
    if (auto g = std::get_if<Gbm>(&gen)) {
      if (!(g->vol >= 0.0) || !std::isfinite(g->spot))
        throw Error(ErrorCode::InvalidConfig, "invalid GBM parameters for '" + label + "'");
      (*paths)[label] = detail::gbm_path(*g, label, path, steps);
    } else {
      (*tables)[label] = std::get<ExtEnv>(gen);
    }
  }
  ExtEnv gen = ExtEnv::from_function(
      [paths, tables](const std::string& l, Int t) -> std::optional<Value> {
        if (auto it = paths->find(l); it != paths->end()) {
          if (t < 0) return Value::real(it->second.front());
          if (static_cast<std::size_t>(t) >= it->second.size()) return std::nullopt;
          return Value::real(it->second[static_cast<std::size_t>(t)]);
        }
        if (auto it = tables->find(l); it != tables->end()) return it->second.find(l, t);
        return std::nullopt;
      });
  return spec.history ? ExtEnv::overlay(*spec.history, gen) : gen;
}

/// Mean of compiled-pipeline prices over simulated paths (guarded when
/// t_now > 0). Deterministic in the seeds.
inline PriceReport monte_carlo_price(const Contr& c, const ScenarioSpec& spec,
                                     const PricingConfig& cfg) {
  if (spec.n_paths < 1) throw Error(ErrorCode::InvalidConfig, "n_paths must be at least 1");
  ILExpr il = compile_contract(c);
  if (cfg.t_now > 0) il = cut_payoff(il);
  Disc d = cfg.discount.function();
  Nat steps = std::max<Nat>(spec.horizon_hint,
                            static_cast<Nat>(std::max<Int>(0, max_observation_time(c, cfg.tenv))));
  std::vector<double> xs(spec.n_paths);
  for (Nat p = 0; p < spec.n_paths; ++p) {
    ExtEnv env = scenario_env(spec, p, steps);
    xs[p] = detail::expect_real(il_sem(il, env, cfg.tenv, 0, cfg.t_now, d, cfg.p1, cfg.p2));
  }
  double n = static_cast<double>(spec.n_paths);
  double mean = detail::pairwise_sum(xs.data(), xs.size()) / n;
  PriceReport r;
  r.pipeline = cfg.t_now > 0 ? Pipeline::CompiledCut : Pipeline::Compiled;
  r.horizon_used = horizon(c, cfg.tenv);
  r.paths = spec.n_paths;
  r.price = mean;
  if (spec.n_paths > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    double var = detail::pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    r.stderr_estimate = std::sqrt(var / n);
  }
  return r;
}

/// {"paths": N, "horizon": H, "labels": {"L": {"gbm": {spot, drift, vol, seed}} |
///  {"table": {"t": v}}}}
inline ScenarioSpec parse_scenario(const std::string& text, const std::string& what = "scenario") {
  json j = detail::parse_json_strict(text, what);
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_object())
    throw Error(ErrorCode::Schema, what + ": expected an object with 'labels'");
  ScenarioSpec s;
  if (j.contains("paths")) {
    if (!j["paths"].is_number_unsigned() || j["paths"].get<Nat>() < 1)
      throw Error(ErrorCode::Schema, what + ": 'paths' must be a positive integer");
    s.n_paths = j["paths"].get<Nat>();
  }
  if (j.contains("horizon")) {
    if (!j["horizon"].is_number_unsigned())
      throw Error(ErrorCode::Schema, what + ": 'horizon' must be a natural");
    s.horizon_hint = j["horizon"].get<Nat>();
  }
  for (const auto& [label, g] : j["labels"].items()) {
    if (g.contains("gbm")) {
      const json& p = g["gbm"];
      Gbm gbm;
      try {
        gbm.spot = p.at("spot").get<double>();
        gbm.drift = p.value("drift", 0.0);
        gbm.vol = p.value("vol", 0.0);
        gbm.seed = p.value("seed", std::uint64_t{0});
      } catch (const json::exception& e) {
        throw Error(ErrorCode::Schema, what + "/" + label + ": " + e.what());
      }
      if (!(gbm.vol >= 0.0))
        throw Error(ErrorCode::Schema, what + "/" + label + ": vol must be non-negative");
      s.labels.emplace(label, gbm);
    } else if (g.contains("table")) {
      json one = json::object();
      one[label] = g["table"];
      s.labels.emplace(label, parse_env(one.dump(), {}, what));
    } else {
      throw Error(ErrorCode::Schema, what + "/" + label + ": expected 'gbm' or 'table'");
    }
  }
  return s;
}

inline ScenarioSpec load_scenario(const std::string& path) {
  return parse_scenario(detail::read_file(path), path);
}

}  // namespace contractc
