#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"
#include "contractc/syntax.hpp"

namespace contractc {

/// Argument and result sorts of an operator. `Cond` is sort-polymorphic in its
/// two branches: the reported signature is the Real instance and
/// `polymorphic` is set.
struct OpSignature {
  std::vector<Ty> args;
  Ty result;
  bool polymorphic = false;

  friend bool operator==(const OpSignature&, const OpSignature&) = default;
};

inline OpSignature op_signature(OpCode op) {
  using enum OpCode;
  switch (op) {
    case Add:
    case Sub:
    case Mult:
    case Div:
    case Max:
    case Min: return {{Ty::Real, Ty::Real}, Ty::Real};
    case Lt:
    case Le:
    case Eq:
    case Ge:
    case Gt: return {{Ty::Real, Ty::Real}, Ty::Bool};
    case And:
    case Or: return {{Ty::Bool, Ty::Bool}, Ty::Bool};
    case Not: return {{Ty::Bool}, Ty::Bool};
    case Neg: return {{Ty::Real}, Ty::Real};
    case Cond: return {{Ty::Bool, Ty::Real, Ty::Real}, Ty::Real, true};
  }
  return {{}, Ty::Real};
}

/// Ordered variable typing context; later bindings shadow earlier ones.
class TypingCtx {
 public:
  TypingCtx() = default;

  TypingCtx extended(const Var& x, Ty t) const {
    TypingCtx out = *this;
    out.bindings_.emplace_back(x.value, t);
    return out;
  }

  std::optional<Ty> lookup(const Var& x) const {
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it)
      if (it->first == x.value) return it->second;
    return std::nullopt;
  }

 private:
  std::vector<std::pair<std::string, Ty>> bindings_;
};

namespace detail {

inline Ty check_exp(const TypingCtx& ctx, const Exp& e, const std::string& path) {
  using namespace exp_node;
  return std::visit(
      overloaded{
          [](const RLit&) { return Ty::Real; },
          [](const BLit&) { return Ty::Bool; },
          [&](const VarE& v) {
            auto t = ctx.lookup(v.var);
            if (!t) throw Error(ErrorCode::UnboundVariable,
                                path + ": unbound variable '" + v.var.value + "'");
            return *t;
          },
          [](const Obs& o) { return o.label.sort; },
          [&](const Op& o) {
            OpSignature sig = op_signature(o.op);
            if (o.args.size() != sig.args.size()) {
              throw Error(ErrorCode::Type, path + ": operator '" + op_name(o.op) + "' expects " +
                                               std::to_string(sig.args.size()) + " arguments");
            }
            std::vector<Ty> got;
            for (std::size_t i = 0; i < o.args.size(); ++i)
              got.push_back(check_exp(ctx, o.args[i], path + "/" + op_name(o.op) + "[" +
                                                          std::to_string(i) + "]"));
            if (sig.polymorphic) {
              if (got[0] != Ty::Bool || got[1] != got[2]) {
                throw Error(ErrorCode::Type, path + ": cond expects Bool and two branches of "
                                                    "one sort");
              }
              return got[1];
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
              if (got[i] != sig.args[i]) {
                throw Error(ErrorCode::Type, path + ": operator '" + op_name(o.op) +
                                                 "' argument " + std::to_string(i) + " expects " +
                                                 ty_name(sig.args[i]) + ", got " + ty_name(got[i]));
              }
            }
            return sig.result;
          },
          [&](const Acc& a) {
            Ty init = check_exp(ctx, *a.init, path + "/acc.init");
            Ty body = check_exp(ctx.extended(a.binder, init), *a.body, path + "/acc.body");
            if (body != init) {
              throw Error(ErrorCode::Type, path + ": acc body has sort " +
                                               std::string(ty_name(body)) + " but init has " +
                                               ty_name(init));
            }
            return init;
          },
      },
      e.node());
}

inline void expect_sort(const TypingCtx& ctx, const Exp& e, Ty want, const std::string& path,
                        const char* who) {
  Ty got = check_exp(ctx, e, path);
  if (got != want) {
    throw Error(ErrorCode::Type, path + ": " + who + " expects " + ty_name(want) + ", got " +
                                     ty_name(got));
  }
}

inline void check_contr(const TypingCtx& ctx, const Contr& c, const std::string& path) {
  using namespace contr_node;
  std::visit(overloaded{
                 [](const Zero&) {},
                 [](const Transfer&) {},
                 [&](const Let& l) {
                   Ty t = check_exp(ctx, l.exp, path + "/let");
                   check_contr(ctx.extended(l.var, t), *l.body, path + "/let.body");
                 },
                 [&](const Scale& s) {
                   expect_sort(ctx, s.factor, Ty::Real, path + "/scale", "Scale");
                   check_contr(ctx, *s.body, path + "/scale.body");
                 },
                 [&](const Translate& t) { check_contr(ctx, *t.body, path + "/translate"); },
                 [&](const Both& b) {
                   check_contr(ctx, *b.left, path + "/both.0");
                   check_contr(ctx, *b.right, path + "/both.1");
                 },
                 [&](const IfWithin& i) {
                   expect_sort(ctx, i.cond, Ty::Bool, path + "/ifWithin", "IfWithin");
                   check_contr(ctx, *i.then_branch, path + "/ifWithin.then");
                   check_contr(ctx, *i.else_branch, path + "/ifWithin.else");
                 },
             },
             c.node());
}

}  // namespace detail

/// The sort of e under ctx; throws Error(Type/UnboundVariable) otherwise.
inline Ty type_check_exp(const TypingCtx& ctx, const Exp& e) {
  return detail::check_exp(ctx, e, "$");
}

/// Succeeds iff ctx |- c : Contr. Every label must also occur at one sort only.
inline void type_check_contract(const TypingCtx& ctx, const Contr& c) {
  std::map<std::string, Ty> seen;
  for_each_label(c, [&](const Label& l) {
    auto [it, fresh] = seen.emplace(l.name, l.sort);
    if (!fresh && it->second != l.sort) {
      throw Error(ErrorCode::SortMismatch, "label '" + l.name + "' used at two sorts");
    }
  });
  detail::check_contr(ctx, c, "$");
}

/// True iff every translate/ifWithin duration is a numeral.
inline bool is_template_closed(const Contr& c) {
  using namespace contr_node;
  return std::visit(overloaded{
                        [](const Zero&) { return true; },
                        [](const Transfer&) { return true; },
                        [](const Let& l) { return is_template_closed(*l.body); },
                        [](const Scale& s) { return is_template_closed(*s.body); },
                        [](const Translate& t) {
                          return t.delay.is_num() && is_template_closed(*t.body);
                        },
                        [](const Both& b) {
                          return is_template_closed(*b.left) && is_template_closed(*b.right);
                        },
                        [](const IfWithin& i) {
                          return i.window.is_num() && is_template_closed(*i.then_branch) &&
                                 is_template_closed(*i.else_branch);
                        },
                    },
                    c.node());
}

/// Template variables occurring in c.
inline std::set<std::string> template_vars(const Contr& c) {
  using namespace contr_node;
  std::set<std::string> out;
  auto note = [&](const TemplateExpr& t) {
    if (!t.is_num()) out.insert(t.as_var().value);
  };
  std::function<void(const Contr&)> go = [&](const Contr& k) {
    std::visit(overloaded{
                   [](const Zero&) {},
                   [](const Transfer&) {},
                   [&](const Let& l) { go(*l.body); },
                   [&](const Scale& s) { go(*s.body); },
                   [&](const Translate& t) {
                     note(t.delay);
                     go(*t.body);
                   },
                   [&](const Both& b) {
                     go(*b.left);
                     go(*b.right);
                   },
                   [&](const IfWithin& i) {
                     note(i.window);
                     go(*i.then_branch);
                     go(*i.else_branch);
                   },
               },
               k.node());
  };
  go(c);
  return out;
}

}  // namespace contractc
