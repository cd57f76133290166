#pragma once

// Partial evaluation of expressions and one-step contract reduction.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"
#include "contractc/semantics.hpp"

namespace contractc {

/// Constant folding under a possibly partial environment. Subterms that
/// cannot be decided (unknown observables, unbound variables, failing
/// operators) are left in place.
inline Exp specialize_exp(const Exp& e, const VarAssign& gamma, const ExtEnv& rho) {
  using namespace exp_node;
  return std::visit(
      overloaded{
          [&](const RLit&) { return e; },
          [&](const BLit&) { return e; },
          [&](const VarE& v) {
            auto it = gamma.find(v.var.value);
            return it == gamma.end() ? e : it->second.to_literal();
          },
          [&](const Obs& o) {
            auto v = rho.find(o.label.name, o.index);
            if (!v || v->sort() != o.label.sort) return e;
            return v->to_literal();
          },
          [&](const Op& o) {
            std::vector<Exp> args;
            std::vector<Value> vals;
            args.reserve(o.args.size());
            for (const auto& a : o.args) {
              args.push_back(specialize_exp(a, gamma, rho));
              if (auto v = literal_value(args.back())) vals.push_back(*v);
            }
            if (vals.size() == args.size()) {
              try {
                return apply_op(o.op, vals).to_literal();
              } catch (const Error&) {
                // division by zero and friends stay residual
              }
            }
            return Exp::op(o.op, std::move(args));
          },
          [&](const Acc&) {
            try {
              return esem(e, gamma, rho).to_literal();
            } catch (const Error&) {
              return e;
            }
          },
      },
      e.node());
}

/// Shift every observable index by n.
inline Exp promote(Int n, const Exp& e) {
  if (n == 0) return e;
  using namespace exp_node;
  return std::visit(overloaded{
                        [&](const Obs& o) { return Exp::obs(o.label, o.index + n); },
                        [&](const Op& o) {
                          std::vector<Exp> args;
                          args.reserve(o.args.size());
                          for (const auto& a : o.args) args.push_back(promote(n, a));
                          return Exp::op(o.op, std::move(args));
                        },
                        [&](const Acc& a) {
                          return Exp::acc(a.binder, promote(n, *a.body), a.steps,
                                          promote(n, *a.init));
                        },
                        [&](const auto&) { return e; },
                    },
                    e.node());
}

inline Contr smart_translate(Nat n, const Contr& c) {
  if (n == 0 || c.is_zero()) return c;
  return Contr::translate(n, c);
}

inline Contr smart_scale(const Exp& e, const Contr& c) {
  if (c.is_zero()) return c;
  if (auto r = e.as<exp_node::RLit>()) {
    if (r->value == 0.0) return Contr::zero();
    if (r->value == 1.0) return c;
  }
  return Contr::scale(e, c);
}

inline Contr smart_both(const Contr& a, const Contr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Contr::both(a, b);
}

/// Drops the binding when the body does not mention x; never substitutes.
inline Contr smart_let(const Var& x, const Exp& e, const Contr& c) {
  std::set<std::string> fv;
  free_vars(c, fv);
  if (!fv.count(x.value)) return c;
  return Contr::let(x, e, c);
}

struct Reduct {
  Contr residual;
  Trans transfer;
};

namespace detail {

inline Nat closed_duration(const TemplateExpr& t) {
  if (!t.is_num())
    throw Error(ErrorCode::UnboundTemplateVariable,
                "reduction requires a template-closed contract (found '" + t.as_var().value +
                    "')");
  return t.as_num();
}

}  // namespace detail

/// One day of contract evolution: today's transfers and the residual
/// contract, to be read against the environment advanced by one.
inline Reduct reduce(const Contr& c, const VarAssign& gamma, const ExtEnv& rho) {
  using namespace contr_node;
  return std::visit(
      overloaded{
          [](const Zero&) { return Reduct{Contr::zero(), Trans{}}; },
          [](const Transfer& t) { return Reduct{Contr::zero(), Trans::unit(t.from, t.to, t.asset)}; },
          [&](const Translate& t) {
            Nat d = detail::closed_duration(t.delay);
            if (d == 0) return reduce(*t.body, gamma, rho);
            return Reduct{smart_translate(d - 1, *t.body), Trans{}};
          },
          [&](const Scale& s) {
            Exp e = specialize_exp(s.factor, gamma, rho);
            Reduct inner = reduce(*s.body, gamma, rho);
            if (auto r = e.as<exp_node::RLit>()) {
              return Reduct{smart_scale(e, inner.residual), r->value * inner.transfer};
            }
            if (!inner.transfer.is_zero(0.0)) {
              throw Error(ErrorCode::MissingObservable,
                          "scale factor depends on observables missing from the environment");
            }
            return Reduct{smart_scale(promote(-1, e), inner.residual), Trans{}};
          },
          [&](const Both& b) {
            Reduct l = reduce(*b.left, gamma, rho);
            Reduct r = reduce(*b.right, gamma, rho);
            return Reduct{smart_both(l.residual, r.residual), l.transfer + r.transfer};
          },
          [&](const Let& l) {
            Exp e = specialize_exp(l.exp, gamma, rho);
            VarAssign inner = gamma;
            if (auto v = literal_value(e)) {
              inner[l.var.value] = *v;
            } else {
              inner.erase(l.var.value);
            }
            Reduct body = reduce(*l.body, inner, rho);
            return Reduct{smart_let(l.var, promote(-1, e), body.residual), body.transfer};
          },
          [&](const IfWithin& i) {
            Exp e = specialize_exp(i.cond, gamma, rho);
            auto b = e.as<exp_node::BLit>();
            if (!b)
              throw Error(ErrorCode::ReductionStuck,
                          "ifWithin condition cannot be decided from the environment");
            if (b->value) return reduce(*i.then_branch, gamma, rho);
            Nat d = detail::closed_duration(i.window);
            if (d == 0) return reduce(*i.else_branch, gamma, rho);
            return Reduct{Contr::if_within(i.cond, TemplateExpr::num(d - 1), *i.then_branch,
                                           *i.else_branch),
                          Trans{}};
          },
      },
      c.node());
}

}  // namespace contractc
