#pragma once

// Denotational semantics of contracts: values, environments, transfers,
// traces, the symbolic horizon and template instantiation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"

namespace contractc {

/// Default absolute+relative tolerance for semantic equality of reals.
inline constexpr double kSemanticTolerance = 1e-9;

inline bool approx_equal(double a, double b, double tol = kSemanticTolerance) {
  if (a == b) return true;
  return std::abs(a - b) <= tol + tol * std::max(std::abs(a), std::abs(b));
}

class Value {
 public:
  Value() : v_(0.0) {}
  static Value real(double r) { return Value(r); }
  static Value boolean(bool b) { return Value(b); }

  bool is_real() const noexcept { return std::holds_alternative<double>(v_); }
  bool is_bool() const noexcept { return std::holds_alternative<bool>(v_); }
  Ty sort() const noexcept { return is_real() ? Ty::Real : Ty::Bool; }
  double as_real() const { return std::get<double>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }

  Exp to_literal() const { return is_real() ? Exp::real(as_real()) : Exp::boolean(as_bool()); }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(double r) : v_(r) {}
  explicit Value(bool b) : v_(b) {}
  std::variant<double, bool> v_;
};

inline std::optional<Value> literal_value(const Exp& e) {
  if (auto r = e.as<exp_node::RLit>()) return Value::real(r->value);
  if (auto b = e.as<exp_node::BLit>()) return Value::boolean(b->value);
  return std::nullopt;
}

/// External environment: (label, time) -> value, possibly partial. Time may
/// be negative. Advancing is O(1) and composes additively.
class ExtEnv {
 public:
  using Table = std::map<std::pair<std::string, Int>, Value>;
  using Lookup = std::function<std::optional<Value>(const std::string& label, Int time)>;

  ExtEnv() : ExtEnv(Table{}) {}

  static ExtEnv from_table(Table t) { return ExtEnv(std::move(t)); }
  static ExtEnv from_function(Lookup f) {
    ExtEnv env;
    env.table_.reset();
    env.fn_ = std::make_shared<const Lookup>(std::move(f));
    return env;
  }
  /// Keys of `primary` win over `fallback`.
  static ExtEnv overlay(ExtEnv primary, ExtEnv fallback) {
    return from_function([primary = std::move(primary), fallback = std::move(fallback)](
                             const std::string& l, Int t) -> std::optional<Value> {
      if (auto v = primary.find(l, t)) return v;
      return fallback.find(l, t);
    });
  }
  /// Restriction to times <= `last` (as seen through this environment).
  ExtEnv restricted_to(Int last) const {
    return from_function([self = *this, last](const std::string& l, Int t) -> std::optional<Value> {
      if (t > last) return std::nullopt;
      return self.find(l, t);
    });
  }

  std::optional<Value> find(const std::string& label, Int time) const {
    Int t = time + shift_;
    if (table_) {
      auto it = table_->find({label, t});
      if (it == table_->end()) return std::nullopt;
      return it->second;
    }
    return (*fn_)(label, t);
  }

  /// Lookup with sort check; missing entries and wrong sorts are errors.
  /// Messages give the time in the unshifted environment.
  Value at(const Label& l, Int time) const {
    auto v = find(l.name, time);
    std::string when = std::to_string(time + shift_);
    if (!v)
      throw Error(ErrorCode::MissingObservable, "no value for observable " + l.name + " at time " + when);
    if (v->sort() != l.sort)
      throw Error(ErrorCode::SortMismatch,
                  "observable " + l.name + " at time " + when + " is not of sort " + ty_name(l.sort));
    return *v;
  }

  /// result(l, i) = this(l, i + n)
  ExtEnv advanced(Int n) const {
    ExtEnv out = *this;
    out.shift_ += n;
    return out;
  }

  const Table* table() const noexcept { return shift_ == 0 ? table_.get() : nullptr; }

 private:
  explicit ExtEnv(Table t) : table_(std::make_shared<const Table>(std::move(t))) {}

  std::shared_ptr<const Table> table_;
  std::shared_ptr<const Lookup> fn_;
  Int shift_ = 0;
};

inline ExtEnv adv_env(const ExtEnv& rho, Int n) { return rho.advanced(n); }

/// Template environment: template variable -> natural.
class TEnv {
 public:
  TEnv() = default;
  TEnv(std::initializer_list<std::pair<const std::string, Nat>> init) : map_(init) {}
  explicit TEnv(std::map<std::string, Nat> m) : map_(std::move(m)) {}

  Nat at(const TVar& v) const {
    auto it = map_.find(v.value);
    if (it == map_.end())
      throw Error(ErrorCode::UnboundTemplateVariable,
                  "unbound template variable '" + v.value + "'");
    return it->second;
  }
  void set(const std::string& v, Nat n) { map_[v] = n; }
  const std::map<std::string, Nat>& entries() const noexcept { return map_; }

 private:
  std::map<std::string, Nat> map_;
};

/// Variable assignment for let/acc-bound expression variables.
using VarAssign = std::map<std::string, Value>;

inline Nat tsem(const TemplateExpr& t, const TEnv& delta) {
  return t.is_num() ? t.as_num() : delta.at(t.as_var());
}

// --- transfers and traces ---------------------------------------------------

struct TransferKey {
  Party from;
  Party to;
  Asset asset;
  friend auto operator<=>(const TransferKey&, const TransferKey&) = default;
  friend bool operator==(const TransferKey&, const TransferKey&) = default;
};

/// Party x Party x Asset -> R with finite support.
class Trans {
 public:
  Trans() = default;

  /// The unit transfer of one `a` from p to q (zero when p == q).
  static Trans unit(const Party& p, const Party& q, const Asset& a) {
    Trans t;
    if (p == q) return t;
    t.m_[{p, q, a}] = 1.0;
    t.m_[{q, p, a}] = -1.0;
    return t;
  }

  double operator()(const Party& p, const Party& q, const Asset& a) const {
    auto it = m_.find({p, q, a});
    return it == m_.end() ? 0.0 : it->second;
  }
  /// Net amount from p to q summed over all assets.
  double between(const Party& p, const Party& q) const {
    double s = 0.0;
    for (const auto& [k, v] : m_)
      if (k.from == p && k.to == q) s += v;
    return s;
  }

  bool empty() const noexcept { return m_.empty(); }
  const std::map<TransferKey, double>& entries() const noexcept { return m_; }

  friend Trans operator+(const Trans& a, const Trans& b) {
    Trans out = a;
    for (const auto& [k, v] : b.m_) out.m_[k] += v;
    return out;
  }
  friend Trans operator*(double s, const Trans& t) {
    Trans out = t;
    for (auto& [k, v] : out.m_) v *= s;
    return out;
  }

  /// Pointwise comparison over the union of supports.
  friend bool approx_equal(const Trans& a, const Trans& b, double tol = kSemanticTolerance) {
    for (const auto& [k, v] : a.m_)
      if (!contractc::approx_equal(v, b(k.from, k.to, k.asset), tol)) return false;
    for (const auto& [k, v] : b.m_)
      if (!contractc::approx_equal(v, a(k.from, k.to, k.asset), tol)) return false;
    return true;
  }
  bool is_zero(double tol = kSemanticTolerance) const {
    return std::all_of(m_.begin(), m_.end(),
                       [&](const auto& kv) { return std::abs(kv.second) <= tol; });
  }

 private:
  std::map<TransferKey, double> m_;
};

/// N -> Trans with finite support.
class Trace {
 public:
  Trace() = default;
  static Trace at_time(Nat n, Trans t) {
    Trace tr;
    if (!t.empty()) tr.m_.emplace(n, std::move(t));
    return tr;
  }

  Trans operator()(Nat n) const {
    auto it = m_.find(n);
    return it == m_.end() ? Trans{} : it->second;
  }
  const std::map<Nat, Trans>& entries() const noexcept { return m_; }

  /// One past the last time with a non-zero transfer (0 for the zero trace).
  Nat support_end(double tol = 0.0) const {
    for (auto it = m_.rbegin(); it != m_.rend(); ++it)
      if (!it->second.is_zero(tol)) return it->first + 1;
    return 0;
  }

  friend Trace operator+(const Trace& a, const Trace& b) {
    Trace out = a;
    for (const auto& [n, t] : b.m_) {
      auto it = out.m_.find(n);
      if (it == out.m_.end()) {
        out.m_.emplace(n, t);
      } else {
        it->second = it->second + t;
      }
    }
    return out;
  }
  friend Trace operator*(double s, const Trace& tr) {
    Trace out;
    for (const auto& [n, t] : tr.m_) out.m_.emplace(n, s * t);
    return out;
  }

  friend bool approx_equal(const Trace& a, const Trace& b, double tol = kSemanticTolerance) {
    for (const auto& [n, t] : a.m_)
      if (!approx_equal(t, b(n), tol)) return false;
    for (const auto& [n, t] : b.m_)
      if (!approx_equal(t, a(n), tol)) return false;
    return true;
  }

  Trace delayed(Nat d) const {
    Trace out;
    for (const auto& [n, t] : m_) out.m_.emplace(n + d, t);
    return out;
  }

 private:
  std::map<Nat, Trans> m_;
};

/// result(n) = tr(n - d) for n >= d, zero otherwise.
inline Trace delay(Nat d, const Trace& tr) { return tr.delayed(d); }
inline Trace trace_scale(double s, const Trace& tr) { return s * tr; }
inline Trace trace_add(const Trace& a, const Trace& b) { return a + b; }

// --- expressions --------------------------------------------------------------

namespace detail {

inline double want_real(const Value& v, OpCode op) {
  if (!v.is_real())
    throw Error(ErrorCode::SortMismatch, std::string("operator '") + op_name(op) +
                                             "' applied to a boolean");
  return v.as_real();
}
inline bool want_bool(const Value& v, OpCode op) {
  if (!v.is_bool())
    throw Error(ErrorCode::SortMismatch, std::string("operator '") + op_name(op) +
                                             "' applied to a real");
  return v.as_bool();
}

}  // namespace detail

/// Operator semantics on already-evaluated arguments.
inline Value apply_op(OpCode op, std::span<const Value> a) {
  using detail::want_bool;
  using detail::want_real;
  std::size_t want = (op == OpCode::Not || op == OpCode::Neg) ? 1 : op == OpCode::Cond ? 3 : 2;
  if (a.size() != want)
    throw Error(ErrorCode::SortMismatch,
                std::string("operator '") + op_name(op) + "' applied to wrong arity");
  switch (op) {
    case OpCode::Add: return Value::real(want_real(a[0], op) + want_real(a[1], op));
    case OpCode::Sub: return Value::real(want_real(a[0], op) - want_real(a[1], op));
    case OpCode::Mult: return Value::real(want_real(a[0], op) * want_real(a[1], op));
    case OpCode::Div: {
      double num = want_real(a[0], op);
      double den = want_real(a[1], op);
      if (den == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero");
      return Value::real(num / den);
    }
    case OpCode::Max: return Value::real(std::max(want_real(a[0], op), want_real(a[1], op)));
    case OpCode::Min: return Value::real(std::min(want_real(a[0], op), want_real(a[1], op)));
    case OpCode::Lt: return Value::boolean(want_real(a[0], op) < want_real(a[1], op));
    case OpCode::Le: return Value::boolean(want_real(a[0], op) <= want_real(a[1], op));
    case OpCode::Eq: return Value::boolean(want_real(a[0], op) == want_real(a[1], op));
    case OpCode::Ge: return Value::boolean(want_real(a[0], op) >= want_real(a[1], op));
    case OpCode::Gt: return Value::boolean(want_real(a[0], op) > want_real(a[1], op));
    case OpCode::And: return Value::boolean(want_bool(a[0], op) && want_bool(a[1], op));
    case OpCode::Or: return Value::boolean(want_bool(a[0], op) || want_bool(a[1], op));
    case OpCode::Not: return Value::boolean(!want_bool(a[0], op));
    case OpCode::Neg: return Value::real(-want_real(a[0], op));
    case OpCode::Cond: {
      if (want_bool(a[0], op)) return a[1];
      return a[2];
    }
  }
  throw Error(ErrorCode::UnknownOp, "unknown operator");
}

inline Value esem(const Exp& e, const VarAssign& gamma, const ExtEnv& rho) {
  using namespace exp_node;
  return std::visit(
      overloaded{
          [](const RLit& r) { return Value::real(r.value); },
          [](const BLit& b) { return Value::boolean(b.value); },
          [&](const VarE& v) {
            auto it = gamma.find(v.var.value);
            if (it == gamma.end())
              throw Error(ErrorCode::UnboundVariable, "unbound variable '" + v.var.value + "'");
            return it->second;
          },
          [&](const Obs& o) { return rho.at(o.label, o.index); },
          [&](const Op& o) {
            std::vector<Value> args;
            args.reserve(o.args.size());
            for (const auto& a : o.args) args.push_back(esem(a, gamma, rho));
            return apply_op(o.op, args);
          },
          [&](const Acc& a) {
            // Unrolled from the oldest step: value_0 = init at rho/-d, value_k =
            // body[binder := value_{k-1}] at rho/(k-d).
            Int d = static_cast<Int>(a.steps);
            Value acc = esem(*a.init, gamma, rho.advanced(-d));
            for (Int k = 1; k <= d; ++k) {
              VarAssign inner = gamma;
              inner[a.binder.value] = acc;
              acc = esem(*a.body, inner, rho.advanced(k - d));
            }
            return acc;
          },
      },
      e.node());
}

// --- contracts ----------------------------------------------------------------

inline Trace csem(const Contr& c, const VarAssign& gamma, const ExtEnv& rho, const TEnv& delta) {
  using namespace contr_node;
  return std::visit(
      overloaded{
          [](const Zero&) { return Trace{}; },
          [&](const Let& l) {
            VarAssign inner = gamma;
            inner[l.var.value] = esem(l.exp, gamma, rho);
            return csem(*l.body, inner, rho, delta);
          },
          [](const Transfer& t) { return Trace::at_time(0, Trans::unit(t.from, t.to, t.asset)); },
          [&](const Scale& s) {
            Value f = esem(s.factor, gamma, rho);
            if (!f.is_real()) throw Error(ErrorCode::SortMismatch, "scale factor is not real");
            return f.as_real() * csem(*s.body, gamma, rho, delta);
          },
          [&](const Translate& t) {
            Nat n = tsem(t.delay, delta);
            return delay(n, csem(*t.body, gamma, rho.advanced(static_cast<Int>(n)), delta));
          },
          [&](const Both& b) {
            return csem(*b.left, gamma, rho, delta) + csem(*b.right, gamma, rho, delta);
          },
          [&](const IfWithin& i) {
            Nat remaining = tsem(i.window, delta);
            ExtEnv cur = rho;
            for (Nat step = 0;; ++step) {
              Value b = esem(i.cond, gamma, cur);
              if (!b.is_bool())
                throw Error(ErrorCode::SortMismatch, "ifWithin condition is not boolean");
              if (b.as_bool()) return delay(step, csem(*i.then_branch, gamma, cur, delta));
              if (remaining == 0) return delay(step, csem(*i.else_branch, gamma, cur, delta));
              --remaining;
              cur = cur.advanced(1);
            }
          },
      },
      c.node());
}

/// a (+) b = 0 if b = 0, a + b otherwise.
inline Nat horizon_plus(Nat a, Nat b) { return b == 0 ? 0 : a + b; }

inline Nat horizon(const Contr& c, const TEnv& delta) {
  using namespace contr_node;
  return std::visit(overloaded{
                        [](const Zero&) -> Nat { return 0; },
                        [](const Transfer&) -> Nat { return 1; },
                        [&](const Let& l) { return horizon(*l.body, delta); },
                        [&](const Scale& s) { return horizon(*s.body, delta); },
                        [&](const Translate& t) {
                          return horizon_plus(tsem(t.delay, delta), horizon(*t.body, delta));
                        },
                        [&](const Both& b) {
                          return std::max(horizon(*b.left, delta), horizon(*b.right, delta));
                        },
                        [&](const IfWithin& i) {
                          return horizon_plus(tsem(i.window, delta),
                                              std::max(horizon(*i.then_branch, delta),
                                                       horizon(*i.else_branch, delta)));
                        },
                    },
                    c.node());
}

/// Replace every template duration by its numeral under delta. Let and scale
/// are kept around the instantiated body so that semantics is preserved.
inline Contr instantiate(const Contr& c, const TEnv& delta) {
  using namespace contr_node;
  auto num = [&](const TemplateExpr& t) { return TemplateExpr::num(tsem(t, delta)); };
  return std::visit(overloaded{
                        [](const Zero&) { return Contr::zero(); },
                        [&](const Let& l) { return Contr::let(l.var, l.exp, instantiate(*l.body, delta)); },
                        [&](const Transfer&) { return c; },
                        [&](const Scale& s) { return Contr::scale(s.factor, instantiate(*s.body, delta)); },
                        [&](const Translate& t) {
                          return Contr::translate(num(t.delay), instantiate(*t.body, delta));
                        },
                        [&](const Both& b) {
                          return Contr::both(instantiate(*b.left, delta), instantiate(*b.right, delta));
                        },
                        [&](const IfWithin& i) {
                          return Contr::if_within(i.cond, num(i.window),
                                                  instantiate(*i.then_branch, delta),
                                                  instantiate(*i.else_branch, delta));
                        },
                    },
                    c.node());
}

}  // namespace contractc
