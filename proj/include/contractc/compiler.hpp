#pragma once

// Contracts and expressions to payoff IL, plus the trace-sum pricing oracle.

#include <string>
#include <utility>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"
#include "contractc/payoff_il.hpp"
#include "contractc/semantics.hpp"

namespace contractc {

/// Numerals add up; a numeral 0 on either side disappears.
inline ILTExpr smart_tplus(const ILTExpr& a, const ILTExpr& b) {
  auto na = a.numeral();
  auto nb = b.numeral();
  if (na && nb) return ILTExpr::num(*na + *nb);
  if (na && *na == 0) return b;
  if (nb && *nb == 0) return a;
  return ILTExpr::plus(a, b);
}

/// t0 shifted by an observable index.
inline ILTExprZ smart_tplus_z(const ILTExprZ& t0, Int i) {
  if (i == 0) return t0;
  if (auto n = t0.as<iltz_node::NumZ>()) return ILTExprZ::num(n->value + i);
  if (auto e = t0.as<iltz_node::TEZ>()) {
    if (auto k = e->t.numeral()) return ILTExprZ::num(static_cast<Int>(*k) + i);
  }
  return ILTExprZ::plus(t0, ILTExprZ::num(i));
}

namespace detail {

inline ILExpr compile_op(OpCode op, std::vector<ILExpr> a) {
  auto bin = [&](ILBinOp o) { return ILExpr::binop(o, a[0], a[1]); };
  switch (op) {
    case OpCode::Add: return bin(ILBinOp::Add);
    case OpCode::Sub: return bin(ILBinOp::Sub);
    case OpCode::Mult: return bin(ILBinOp::Mult);
    case OpCode::Div: return bin(ILBinOp::Div);
    case OpCode::Lt: return bin(ILBinOp::Lt);
    case OpCode::Le: return bin(ILBinOp::Le);
    case OpCode::Gt: return ILExpr::binop(ILBinOp::Lt, a[1], a[0]);
    case OpCode::Ge: return ILExpr::binop(ILBinOp::Le, a[1], a[0]);
    case OpCode::Eq:
      return ILExpr::binop(ILBinOp::And, ILExpr::binop(ILBinOp::Le, a[0], a[1]),
                           ILExpr::binop(ILBinOp::Le, a[1], a[0]));
    case OpCode::Max: return ILExpr::if_(ILExpr::binop(ILBinOp::Lt, a[0], a[1]), a[1], a[0]);
    case OpCode::Min: return ILExpr::if_(ILExpr::binop(ILBinOp::Lt, a[0], a[1]), a[0], a[1]);
    case OpCode::And: return bin(ILBinOp::And);
    case OpCode::Or: return bin(ILBinOp::Or);
    case OpCode::Not: return ILExpr::unop(ILUnOp::Not, a[0]);
    case OpCode::Neg: return ILExpr::unop(ILUnOp::Neg, a[0]);
    case OpCode::Cond: return ILExpr::if_(a[0], a[1], a[2]);
  }
  throw Error(ErrorCode::UnknownOp, std::string("no IL form for operator ") + op_name(op));
}

inline ILExpr compile_exp_at(const Exp& e, const ILTExprZ& t0, const std::string& path) {
  using namespace exp_node;
  return std::visit(
      overloaded{
          [](const RLit& r) { return ILExpr::real(r.value); },
          [](const BLit& b) { return ILExpr::boolean(b.value); },
          [&](const VarE& v) -> ILExpr {
            throw Error(ErrorCode::UnsupportedVar,
                        path + ": variable '" + v.var.value + "' cannot be compiled");
          },
          [&](const Obs& o) { return ILExpr::model(o.label, smart_tplus_z(t0, o.index)); },
          [&](const Op& o) {
            std::vector<ILExpr> args;
            args.reserve(o.args.size());
            for (std::size_t i = 0; i < o.args.size(); ++i)
              args.push_back(compile_exp_at(o.args[i], t0,
                                            path + "/" + op_name(o.op) + "[" + std::to_string(i) + "]"));
            std::size_t want = (o.op == OpCode::Not || o.op == OpCode::Neg) ? 1
                               : o.op == OpCode::Cond                        ? 3
                                                                             : 2;
            if (args.size() != want)
              throw Error(ErrorCode::UnknownOp, path + ": operator '" + op_name(o.op) +
                                                    "' with wrong arity");
            return compile_op(o.op, std::move(args));
          },
          [&](const Acc&) -> ILExpr {
            throw Error(ErrorCode::UnsupportedAcc, path + ": acc cannot be compiled");
          },
      },
      e.node());
}

inline ILExpr compile_contract_at(const Contr& c, const ILTExpr& t0, const std::string& path) {
  using namespace contr_node;
  return std::visit(
      overloaded{
          [](const Zero&) { return ILExpr::real(0.0); },
          [&](const Transfer& t) { return ILExpr::payoff(t0, t.from, t.to); },
          [&](const Scale& s) {
            return ILExpr::binop(ILBinOp::Mult,
                                 compile_exp_at(s.factor, ILTExprZ::tez(t0), path + "/scale"),
                                 compile_contract_at(*s.body, t0, path + "/scale.body"));
          },
          [&](const Translate& t) {
            return compile_contract_at(*t.body, smart_tplus(t0, ILTExpr::te(t.delay)),
                                       path + "/translate");
          },
          [&](const Both& b) {
            return ILExpr::binop(ILBinOp::Add, compile_contract_at(*b.left, t0, path + "/both.0"),
                                 compile_contract_at(*b.right, t0, path + "/both.1"));
          },
          [&](const IfWithin& i) {
            return ILExpr::loopif(compile_exp_at(i.cond, ILTExprZ::tez(t0), path + "/ifWithin"),
                                  compile_contract_at(*i.then_branch, t0, path + "/ifWithin.then"),
                                  compile_contract_at(*i.else_branch, t0, path + "/ifWithin.else"),
                                  i.window);
          },
          [&](const Let&) -> ILExpr {
            throw Error(ErrorCode::UnsupportedLet, path + ": let cannot be compiled");
          },
      },
      c.node());
}

}  // namespace detail

inline ILExpr compile_exp(const Exp& e, const ILTExprZ& t0 = ILTExprZ::num(0)) {
  return detail::compile_exp_at(e, t0, "$");
}

inline ILExpr compile_contract(const Contr& c, const ILTExpr& t0 = ILTExpr::num(0)) {
  return detail::compile_contract_at(c, t0, "$");
}

/// True when c uses neither let nor acc nor free variables.
inline bool is_compilable(const Contr& c) {
  try {
    compile_contract(c);
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// sum_{t=0}^{horizon} d(t) * sum_a trace(t)(p1, p2, a)
inline double aggregate_price(const Contr& c, const VarAssign& gamma, const ExtEnv& rho,
                              const TEnv& delta, const Disc& d, const Party& p1,
                              const Party& p2) {
  Trace tr = csem(c, gamma, rho, delta);
  Nat h = horizon(c, delta);
  double sum = 0.0;
  for (const auto& [t, trans] : tr.entries()) {
    if (t > h) break;
    double amount = trans.between(p1, p2);
    if (amount != 0.0) sum += d(t) * amount;
  }
  return sum;
}

}  // namespace contractc
