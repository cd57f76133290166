#pragma once

// Abstract syntax of the contract language: template expressions, the
// expression sublanguage and contracts. All nodes are immutable values;
// sharing is by reference-counted pointer and equality is structural.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace contractc {

using Nat = std::uint64_t;
using Int = std::int64_t;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

/// Immutable heap cell with value semantics: copies share, equality compares
/// the pointees.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}  // NOLINT

  const T& operator*() const noexcept { return *ptr_; }
  const T* operator->() const noexcept { return ptr_.get(); }
  const T& get() const noexcept { return *ptr_; }

  friend bool operator==(const Box& a, const Box& b) {
    return a.ptr_ == b.ptr_ || *a.ptr_ == *b.ptr_;
  }

 private:
  std::shared_ptr<const T> ptr_;
};

/// Distinct nominal kinds of identifiers.
template <class Tag>
struct Name {
  std::string value;

  Name() = default;
  explicit Name(std::string v) : value(std::move(v)) {}
  Name(const char* v) : value(v) {}  // NOLINT

  friend auto operator<=>(const Name&, const Name&) = default;
  friend bool operator==(const Name&, const Name&) = default;
};

using Party = Name<struct PartyTag>;
using Asset = Name<struct AssetTag>;
using Var = Name<struct VarTag>;
using TVar = Name<struct TVarTag>;

enum class Ty { Real, Bool };

inline const char* ty_name(Ty t) { return t == Ty::Real ? "Real" : "Bool"; }

/// An observable label. The sort is fixed per name within one program.
struct Label {
  std::string name;
  Ty sort = Ty::Real;

  friend auto operator<=>(const Label&, const Label&) = default;
  friend bool operator==(const Label&, const Label&) = default;
};

enum class OpCode { Add, Sub, Mult, Div, Max, Min, Lt, Le, Eq, Ge, Gt, And, Or, Not, Neg, Cond };

inline constexpr OpCode kAllOpCodes[] = {
    OpCode::Add, OpCode::Sub, OpCode::Mult, OpCode::Div, OpCode::Max, OpCode::Min,
    OpCode::Lt,  OpCode::Le,  OpCode::Eq,   OpCode::Ge,  OpCode::Gt,  OpCode::And,
    OpCode::Or,  OpCode::Not, OpCode::Neg,  OpCode::Cond};

inline const char* op_name(OpCode op) {
  switch (op) {
    case OpCode::Add: return "add";
    case OpCode::Sub: return "sub";
    case OpCode::Mult: return "mult";
    case OpCode::Div: return "div";
    case OpCode::Max: return "max";
    case OpCode::Min: return "min";
    case OpCode::Lt: return "lt";
    case OpCode::Le: return "le";
    case OpCode::Eq: return "eq";
    case OpCode::Ge: return "ge";
    case OpCode::Gt: return "gt";
    case OpCode::And: return "and";
    case OpCode::Or: return "or";
    case OpCode::Not: return "not";
    case OpCode::Neg: return "neg";
    case OpCode::Cond: return "cond";
  }
  return "?";
}

/// t ::= n | v
class TemplateExpr {
 public:
  TemplateExpr() : v_(Nat{0}) {}
  static TemplateExpr num(Nat n) { return TemplateExpr(n); }
  static TemplateExpr var(TVar v) { return TemplateExpr(std::move(v)); }

  bool is_num() const noexcept { return std::holds_alternative<Nat>(v_); }
  Nat as_num() const { return std::get<Nat>(v_); }
  const TVar& as_var() const { return std::get<TVar>(v_); }
  const std::variant<Nat, TVar>& node() const noexcept { return v_; }

  friend bool operator==(const TemplateExpr&, const TemplateExpr&) = default;

 private:
  explicit TemplateExpr(Nat n) : v_(n) {}
  explicit TemplateExpr(TVar v) : v_(std::move(v)) {}
  std::variant<Nat, TVar> v_;
};

class Exp;

namespace exp_node {
struct RLit {
  double value;
  friend bool operator==(const RLit&, const RLit&) = default;
};
struct BLit {
  bool value;
  friend bool operator==(const BLit&, const BLit&) = default;
};
struct VarE {
  Var var;
  friend bool operator==(const VarE&, const VarE&) = default;
};
struct Obs {
  Label label;
  Int index;
  friend bool operator==(const Obs&, const Obs&) = default;
};
struct Op {
  OpCode op;
  std::vector<Exp> args;
  friend bool operator==(const Op&, const Op&);
};
/// acc(binder -> body, steps, init)
struct Acc {
  Var binder;
  Box<Exp> body;
  Nat steps;
  Box<Exp> init;
  friend bool operator==(const Acc&, const Acc&);
};
}  // namespace exp_node

class Exp {
 public:
  using Node = std::variant<exp_node::RLit, exp_node::BLit, exp_node::VarE, exp_node::Obs,
                            exp_node::Op, exp_node::Acc>;

  Exp(Node n) : node_(std::move(n)) {}  // NOLINT

  static Exp real(double r) { return Exp(exp_node::RLit{r}); }
  static Exp boolean(bool b) { return Exp(exp_node::BLit{b}); }
  static Exp var(Var v) { return Exp(exp_node::VarE{std::move(v)}); }
  static Exp obs(Label l, Int i) { return Exp(exp_node::Obs{std::move(l), i}); }
  static Exp op(OpCode o, std::vector<Exp> args) {
    return Exp(exp_node::Op{o, std::move(args)});
  }
  static Exp acc(Var binder, Exp body, Nat steps, Exp init) {
    return Exp(exp_node::Acc{std::move(binder), Box<Exp>(std::move(body)), steps,
                             Box<Exp>(std::move(init))});
  }

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }
  bool is_literal() const noexcept {
    return as<exp_node::RLit>() != nullptr || as<exp_node::BLit>() != nullptr;
  }

  friend bool operator==(const Exp&, const Exp&) = default;

 private:
  Node node_;
};

namespace exp_node {
inline bool operator==(const Op& a, const Op& b) { return a.op == b.op && a.args == b.args; }
inline bool operator==(const Acc& a, const Acc& b) {
  return a.binder == b.binder && a.steps == b.steps && a.body == b.body && a.init == b.init;
}
}  // namespace exp_node

// Binary/unary helpers for building expressions in code and tests.
inline Exp operator+(Exp a, Exp b) { return Exp::op(OpCode::Add, {std::move(a), std::move(b)}); }
inline Exp operator-(Exp a, Exp b) { return Exp::op(OpCode::Sub, {std::move(a), std::move(b)}); }
inline Exp operator*(Exp a, Exp b) { return Exp::op(OpCode::Mult, {std::move(a), std::move(b)}); }
inline Exp operator/(Exp a, Exp b) { return Exp::op(OpCode::Div, {std::move(a), std::move(b)}); }
inline Exp operator<(Exp a, Exp b) { return Exp::op(OpCode::Lt, {std::move(a), std::move(b)}); }
inline Exp operator>(Exp a, Exp b) { return Exp::op(OpCode::Gt, {std::move(a), std::move(b)}); }

class Contr;

namespace contr_node {
struct Zero {
  friend bool operator==(const Zero&, const Zero&) = default;
};
struct Let {
  Var var;
  Exp exp;
  Box<Contr> body;
  friend bool operator==(const Let&, const Let&);
};
struct Transfer {
  Party from;
  Party to;
  Asset asset;
  friend bool operator==(const Transfer&, const Transfer&) = default;
};
struct Scale {
  Exp factor;
  Box<Contr> body;
  friend bool operator==(const Scale&, const Scale&);
};
struct Translate {
  TemplateExpr delay;
  Box<Contr> body;
  friend bool operator==(const Translate&, const Translate&);
};
struct Both {
  Box<Contr> left;
  Box<Contr> right;
  friend bool operator==(const Both&, const Both&);
};
struct IfWithin {
  Exp cond;
  TemplateExpr window;
  Box<Contr> then_branch;
  Box<Contr> else_branch;
  friend bool operator==(const IfWithin&, const IfWithin&);
};
}  // namespace contr_node

class Contr {
 public:
  using Node = std::variant<contr_node::Zero, contr_node::Let, contr_node::Transfer,
                            contr_node::Scale, contr_node::Translate, contr_node::Both,
                            contr_node::IfWithin>;

  Contr() : node_(contr_node::Zero{}) {}
  Contr(Node n) : node_(std::move(n)) {}  // NOLINT

  static Contr zero() { return Contr(); }
  static Contr let(Var x, Exp e, Contr body) {
    return Contr(contr_node::Let{std::move(x), std::move(e), Box<Contr>(std::move(body))});
  }
  static Contr transfer(Party from, Party to, Asset asset) {
    return Contr(contr_node::Transfer{std::move(from), std::move(to), std::move(asset)});
  }
  static Contr scale(Exp e, Contr body) {
    return Contr(contr_node::Scale{std::move(e), Box<Contr>(std::move(body))});
  }
  static Contr translate(TemplateExpr t, Contr body) {
    return Contr(contr_node::Translate{std::move(t), Box<Contr>(std::move(body))});
  }
  static Contr translate(Nat n, Contr body) {
    return translate(TemplateExpr::num(n), std::move(body));
  }
  static Contr both(Contr a, Contr b) {
    return Contr(contr_node::Both{Box<Contr>(std::move(a)), Box<Contr>(std::move(b))});
  }
  static Contr if_within(Exp cond, TemplateExpr t, Contr a, Contr b) {
    return Contr(contr_node::IfWithin{std::move(cond), std::move(t), Box<Contr>(std::move(a)),
                                      Box<Contr>(std::move(b))});
  }
  /// all[c1, ..., cn] = both(c1, both(..., cn)); all[] = zero.
  static Contr all(std::vector<Contr> cs) {
    if (cs.empty()) return zero();
    Contr acc = cs.back();
    for (auto it = cs.rbegin() + 1; it != cs.rend(); ++it) acc = both(*it, acc);
    return acc;
  }

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }
  bool is_zero() const noexcept { return as<contr_node::Zero>() != nullptr; }

  friend bool operator==(const Contr&, const Contr&) = default;

 private:
  Node node_;
};

namespace contr_node {
inline bool operator==(const Let& a, const Let& b) {
  return a.var == b.var && a.exp == b.exp && a.body == b.body;
}
inline bool operator==(const Scale& a, const Scale& b) {
  return a.factor == b.factor && a.body == b.body;
}
inline bool operator==(const Translate& a, const Translate& b) {
  return a.delay == b.delay && a.body == b.body;
}
inline bool operator==(const Both& a, const Both& b) {
  return a.left == b.left && a.right == b.right;
}
inline bool operator==(const IfWithin& a, const IfWithin& b) {
  return a.cond == b.cond && a.window == b.window && a.then_branch == b.then_branch &&
         a.else_branch == b.else_branch;
}
}  // namespace contr_node

/// Free expression variables of e.
inline void free_vars(const Exp& e, std::set<std::string>& out,
                      const std::set<std::string>& bound = {}) {
  std::visit(overloaded{
                 [&](const exp_node::VarE& v) {
                   if (!bound.count(v.var.value)) out.insert(v.var.value);
                 },
                 [&](const exp_node::Op& o) {
                   for (const auto& a : o.args) free_vars(a, out, bound);
                 },
                 [&](const exp_node::Acc& a) {
                   free_vars(*a.init, out, bound);
                   auto inner = bound;
                   inner.insert(a.binder.value);
                   free_vars(*a.body, out, inner);
                 },
                 [](const auto&) {},
             },
             e.node());
}

inline void free_vars(const Contr& c, std::set<std::string>& out,
                      const std::set<std::string>& bound = {}) {
  using namespace contr_node;
  std::visit(overloaded{
                 [](const Zero&) {},
                 [](const Transfer&) {},
                 [&](const Let& l) {
                   free_vars(l.exp, out, bound);
                   auto inner = bound;
                   inner.insert(l.var.value);
                   free_vars(*l.body, out, inner);
                 },
                 [&](const Scale& s) {
                   free_vars(s.factor, out, bound);
                   free_vars(*s.body, out, bound);
                 },
                 [&](const Translate& t) { free_vars(*t.body, out, bound); },
                 [&](const Both& b) {
                   free_vars(*b.left, out, bound);
                   free_vars(*b.right, out, bound);
                 },
                 [&](const IfWithin& i) {
                   free_vars(i.cond, out, bound);
                   free_vars(*i.then_branch, out, bound);
                   free_vars(*i.else_branch, out, bound);
                 },
             },
             c.node());
}

/// Visit every Obs label occurring in an expression or contract.
template <class F>
void for_each_label(const Exp& e, F&& f) {
  std::visit(overloaded{
                 [&](const exp_node::Obs& o) { f(o.label); },
                 [&](const exp_node::Op& o) {
                   for (const auto& a : o.args) for_each_label(a, f);
                 },
                 [&](const exp_node::Acc& a) {
                   for_each_label(*a.body, f);
                   for_each_label(*a.init, f);
                 },
                 [](const auto&) {},
             },
             e.node());
}

template <class F>
void for_each_label(const Contr& c, F&& f) {
  using namespace contr_node;
  std::visit(overloaded{
                 [](const Zero&) {},
                 [](const Transfer&) {},
                 [&](const Let& l) {
                   for_each_label(l.exp, f);
                   for_each_label(*l.body, f);
                 },
                 [&](const Scale& s) {
                   for_each_label(s.factor, f);
                   for_each_label(*s.body, f);
                 },
                 [&](const Translate& t) { for_each_label(*t.body, f); },
                 [&](const Both& b) {
                   for_each_label(*b.left, f);
                   for_each_label(*b.right, f);
                 },
                 [&](const IfWithin& i) {
                   for_each_label(i.cond, f);
                   for_each_label(*i.then_branch, f);
                   for_each_label(*i.else_branch, f);
                 },
             },
             c.node());
}

}  // namespace contractc
