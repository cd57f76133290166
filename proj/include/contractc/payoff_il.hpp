#pragma once

// Payoff intermediate language: template-time sums, the expression tree,
// its evaluator (discounting, loop clock, current time) and cut_payoff.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"
#include "contractc/lexer.hpp"
#include "contractc/semantics.hpp"

namespace contractc {

class ILTExpr;
namespace ilt_node {
struct TPlus {
  Box<ILTExpr> left;
  Box<ILTExpr> right;
  friend bool operator==(const TPlus&, const TPlus&);
};
struct TE {
  TemplateExpr t;
  friend bool operator==(const TE&, const TE&) = default;
};
}  // namespace ilt_node

class ILTExpr {
 public:
  using Node = std::variant<ilt_node::TPlus, ilt_node::TE>;
  ILTExpr(Node n) : node_(std::move(n)) {}  // NOLINT

  static ILTExpr te(TemplateExpr t) { return ILTExpr(ilt_node::TE{std::move(t)}); }
  static ILTExpr num(Nat n) { return te(TemplateExpr::num(n)); }
  static ILTExpr var(TVar v) { return te(TemplateExpr::var(std::move(v))); }
  static ILTExpr plus(ILTExpr a, ILTExpr b) {
    return ILTExpr(ilt_node::TPlus{Box<ILTExpr>(std::move(a)), Box<ILTExpr>(std::move(b))});
  }

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }
  /// The numeral if this is a numeric leaf.
  std::optional<Nat> numeral() const {
    if (auto t = as<ilt_node::TE>(); t && t->t.is_num()) return t->t.as_num();
    return std::nullopt;
  }

  friend bool operator==(const ILTExpr&, const ILTExpr&) = default;

 private:
  Node node_;
};

namespace ilt_node {
inline bool operator==(const TPlus& a, const TPlus& b) {
  return a.left == b.left && a.right == b.right;
}
}  // namespace ilt_node

class ILTExprZ;
namespace iltz_node {
struct TPlusZ {
  Box<ILTExprZ> left;
  Box<ILTExprZ> right;
  friend bool operator==(const TPlusZ&, const TPlusZ&);
};
struct TEZ {
  ILTExpr t;
  friend bool operator==(const TEZ&, const TEZ&) = default;
};
struct NumZ {
  Int value;
  friend bool operator==(const NumZ&, const NumZ&) = default;
};
}  // namespace iltz_node

class ILTExprZ {
 public:
  using Node = std::variant<iltz_node::TPlusZ, iltz_node::TEZ, iltz_node::NumZ>;
  ILTExprZ(Node n) : node_(std::move(n)) {}  // NOLINT

  static ILTExprZ tez(ILTExpr t) { return ILTExprZ(iltz_node::TEZ{std::move(t)}); }
  static ILTExprZ num(Int i) { return ILTExprZ(iltz_node::NumZ{i}); }
  static ILTExprZ plus(ILTExprZ a, ILTExprZ b) {
    return ILTExprZ(
        iltz_node::TPlusZ{Box<ILTExprZ>(std::move(a)), Box<ILTExprZ>(std::move(b))});
  }

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }

  friend bool operator==(const ILTExprZ&, const ILTExprZ&) = default;

 private:
  Node node_;
};

namespace iltz_node {
inline bool operator==(const TPlusZ& a, const TPlusZ& b) {
  return a.left == b.left && a.right == b.right;
}
}  // namespace iltz_node

enum class ILUnOp { Neg, Not };
enum class ILBinOp { Add, Sub, Mult, Div, Lt, Le, And, Or, LtN };

inline const char* il_op_name(ILUnOp op) { return op == ILUnOp::Neg ? "neg" : "not"; }
inline const char* il_op_name(ILBinOp op) {
  switch (op) {
    case ILBinOp::Add: return "add";
    case ILBinOp::Sub: return "sub";
    case ILBinOp::Mult: return "mult";
    case ILBinOp::Div: return "div";
    case ILBinOp::Lt: return "lt";
    case ILBinOp::Le: return "le";
    case ILBinOp::And: return "and";
    case ILBinOp::Or: return "or";
    case ILBinOp::LtN: return "ltn";
  }
  return "?";
}

class ILExpr;
namespace il_node {
struct If {
  Box<ILExpr> cond, then_branch, else_branch;
  friend bool operator==(const If&, const If&);
};
struct FloatLit {
  double value;
  friend bool operator==(const FloatLit&, const FloatLit&) = default;
};
struct NatLit {
  Nat value;
  friend bool operator==(const NatLit&, const NatLit&) = default;
};
struct BoolLit {
  bool value;
  friend bool operator==(const BoolLit&, const BoolLit&) = default;
};
struct TexprVal {
  ILTExpr t;
  friend bool operator==(const TexprVal&, const TexprVal&) = default;
};
struct Now {
  friend bool operator==(const Now&, const Now&) = default;
};
struct Model {
  Label label;
  ILTExprZ t;
  friend bool operator==(const Model&, const Model&) = default;
};
struct UnOp {
  ILUnOp op;
  Box<ILExpr> arg;
  friend bool operator==(const UnOp&, const UnOp&);
};
struct BinOp {
  ILBinOp op;
  Box<ILExpr> left, right;
  friend bool operator==(const BinOp&, const BinOp&);
};
struct LoopIf {
  Box<ILExpr> cond, then_branch, else_branch;
  TemplateExpr bound;
  friend bool operator==(const LoopIf&, const LoopIf&);
};
struct Payoff {
  ILTExpr t;
  Party from;
  Party to;
  friend bool operator==(const Payoff&, const Payoff&) = default;
};
}  // namespace il_node

class ILExpr {
 public:
  using Node = std::variant<il_node::If, il_node::FloatLit, il_node::NatLit, il_node::BoolLit,
                            il_node::TexprVal, il_node::Now, il_node::Model, il_node::UnOp,
                            il_node::BinOp, il_node::LoopIf, il_node::Payoff>;
  ILExpr(Node n) : node_(std::move(n)) {}  // NOLINT

  static ILExpr if_(ILExpr c, ILExpr a, ILExpr b) {
    return ILExpr(il_node::If{Box<ILExpr>(std::move(c)), Box<ILExpr>(std::move(a)),
                              Box<ILExpr>(std::move(b))});
  }
  static ILExpr real(double v) { return ILExpr(il_node::FloatLit{v}); }
  static ILExpr nat(Nat v) { return ILExpr(il_node::NatLit{v}); }
  static ILExpr boolean(bool v) { return ILExpr(il_node::BoolLit{v}); }
  static ILExpr tval(ILTExpr t) { return ILExpr(il_node::TexprVal{std::move(t)}); }
  static ILExpr now() { return ILExpr(il_node::Now{}); }
  static ILExpr model(Label l, ILTExprZ t) { return ILExpr(il_node::Model{std::move(l), std::move(t)}); }
  static ILExpr unop(ILUnOp op, ILExpr a) { return ILExpr(il_node::UnOp{op, Box<ILExpr>(std::move(a))}); }
  static ILExpr binop(ILBinOp op, ILExpr a, ILExpr b) {
    return ILExpr(il_node::BinOp{op, Box<ILExpr>(std::move(a)), Box<ILExpr>(std::move(b))});
  }
  static ILExpr loopif(ILExpr c, ILExpr a, ILExpr b, TemplateExpr bound) {
    return ILExpr(il_node::LoopIf{Box<ILExpr>(std::move(c)), Box<ILExpr>(std::move(a)),
                                  Box<ILExpr>(std::move(b)), std::move(bound)});
  }
  static ILExpr payoff(ILTExpr t, Party from, Party to) {
    return ILExpr(il_node::Payoff{std::move(t), std::move(from), std::move(to)});
  }

  const Node& node() const noexcept { return node_; }
  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&node_);
  }

  friend bool operator==(const ILExpr&, const ILExpr&) = default;

 private:
  Node node_;
};

namespace il_node {
inline bool operator==(const If& a, const If& b) {
  return a.cond == b.cond && a.then_branch == b.then_branch && a.else_branch == b.else_branch;
}
inline bool operator==(const UnOp& a, const UnOp& b) { return a.op == b.op && a.arg == b.arg; }
inline bool operator==(const BinOp& a, const BinOp& b) {
  return a.op == b.op && a.left == b.left && a.right == b.right;
}
inline bool operator==(const LoopIf& a, const LoopIf& b) {
  return a.cond == b.cond && a.then_branch == b.then_branch && a.else_branch == b.else_branch &&
         a.bound == b.bound;
}
}  // namespace il_node

// --- values and evaluation ------------------------------------------------------

class ILVal {
 public:
  static ILVal nat(Nat n) { return ILVal(Rep{std::in_place_index<0>, n}); }
  static ILVal real(double r) { return ILVal(Rep{std::in_place_index<1>, r}); }
  static ILVal boolean(bool b) { return ILVal(Rep{std::in_place_index<2>, b}); }

  bool is_nat() const noexcept { return v_.index() == 0; }
  bool is_real() const noexcept { return v_.index() == 1; }
  bool is_bool() const noexcept { return v_.index() == 2; }
  Nat as_nat() const { return std::get<0>(v_); }
  double as_real() const { return std::get<1>(v_); }
  bool as_bool() const { return std::get<2>(v_); }

  std::string to_string() const {
    if (is_nat()) return "nat " + std::to_string(as_nat());
    if (is_real()) return "real " + lex::format_real(as_real());
    return as_bool() ? "bool true" : "bool false";
  }

  friend bool operator==(const ILVal&, const ILVal&) = default;

 private:
  using Rep = std::variant<Nat, double, bool>;
  explicit ILVal(Rep v) : v_(std::move(v)) {}
  Rep v_;
};

/// Discount factor per absolute day.
using Disc = std::function<double(Nat)>;

inline Nat iltsem(const ILTExpr& t, const TEnv& delta) {
  using namespace ilt_node;
  return std::visit(overloaded{
                        [&](const TPlus& p) { return iltsem(*p.left, delta) + iltsem(*p.right, delta); },
                        [&](const TE& e) { return tsem(e.t, delta); },
                    },
                    t.node());
}

inline Int iltsem_z(const ILTExprZ& t, const TEnv& delta) {
  using namespace iltz_node;
  return std::visit(overloaded{
                        [&](const TPlusZ& p) {
                          return iltsem_z(*p.left, delta) + iltsem_z(*p.right, delta);
                        },
                        [&](const TEZ& e) { return static_cast<Int>(iltsem(e.t, delta)); },
                        [](const NumZ& n) { return n.value; },
                    },
                    t.node());
}

/// Everything il_sem reads besides the expression and the loop clock.
struct ILContext {
  ExtEnv rho;
  TEnv delta;
  Nat t_now = 0;
  Disc disc = [](Nat) { return 1.0; };
  Party p1;
  Party p2;
};

namespace detail {

[[noreturn]] inline void il_sort_error(const char* op, const char* want) {
  throw Error(ErrorCode::SortMismatch, std::string("IL operator '") + op + "' expects " + want);
}

inline ILVal il_eval(const ILExpr& il, const ILContext& cx, Nat t0) {
  using namespace il_node;
  return std::visit(
      overloaded{
          [&](const FloatLit& f) { return ILVal::real(f.value); },
          [&](const NatLit& n) { return ILVal::nat(n.value); },
          [&](const BoolLit& b) { return ILVal::boolean(b.value); },
          [&](const TexprVal& t) { return ILVal::nat(iltsem(t.t, cx.delta) + t0); },
          [&](const Now&) { return ILVal::nat(cx.t_now); },
          [&](const Model& m) {
            Int time = iltsem_z(m.t, cx.delta) + static_cast<Int>(t0);
            Value v = cx.rho.at(m.label, time);
            return v.is_real() ? ILVal::real(v.as_real()) : ILVal::boolean(v.as_bool());
          },
          [&](const If& i) {
            ILVal c = il_eval(*i.cond, cx, t0);
            if (!c.is_bool()) il_sort_error("if", "a boolean condition");
            return il_eval(c.as_bool() ? *i.then_branch : *i.else_branch, cx, t0);
          },
          [&](const LoopIf& l) {
            Nat n = tsem(l.bound, cx.delta);
            Nat clock = t0;
            for (;;) {
              ILVal c = il_eval(*l.cond, cx, clock);
              if (!c.is_bool()) il_sort_error("loopif", "a boolean condition");
              if (c.as_bool()) return il_eval(*l.then_branch, cx, clock);
              if (n == 0) return il_eval(*l.else_branch, cx, clock);
              --n;
              ++clock;
            }
          },
          [&](const Payoff& p) {
            Nat time = iltsem(p.t, cx.delta) + t0;
            if (p.from == p.to) return ILVal::real(0.0);
            if (p.from == cx.p1 && p.to == cx.p2) return ILVal::real(cx.disc(time));
            if (p.from == cx.p2 && p.to == cx.p1) return ILVal::real(-cx.disc(time));
            return ILVal::real(0.0);
          },
          [&](const UnOp& u) {
            ILVal a = il_eval(*u.arg, cx, t0);
            if (u.op == ILUnOp::Neg) {
              if (!a.is_real()) il_sort_error("neg", "a real");
              return ILVal::real(-a.as_real());
            }
            if (!a.is_bool()) il_sort_error("not", "a boolean");
            return ILVal::boolean(!a.as_bool());
          },
          [&](const BinOp& b) {
            ILVal x = il_eval(*b.left, cx, t0);
            ILVal y = il_eval(*b.right, cx, t0);
            const char* name = il_op_name(b.op);
            switch (b.op) {
              case ILBinOp::And:
              case ILBinOp::Or:
                if (!x.is_bool() || !y.is_bool()) il_sort_error(name, "booleans");
                return ILVal::boolean(b.op == ILBinOp::And ? x.as_bool() && y.as_bool()
                                                           : x.as_bool() || y.as_bool());
              case ILBinOp::LtN:
                if (!x.is_nat() || !y.is_nat()) il_sort_error(name, "naturals");
                return ILVal::boolean(x.as_nat() < y.as_nat());
              default: break;
            }
            if (!x.is_real() || !y.is_real()) il_sort_error(name, "reals");
            double l = x.as_real();
            double r = y.as_real();
            switch (b.op) {
              case ILBinOp::Add: return ILVal::real(l + r);
              case ILBinOp::Sub: return ILVal::real(l - r);
              case ILBinOp::Mult: return ILVal::real(l * r);
              case ILBinOp::Div:
                if (r == 0.0) throw Error(ErrorCode::DivisionByZero, "division by zero");
                return ILVal::real(l / r);
              case ILBinOp::Lt: return ILVal::boolean(l < r);
              case ILBinOp::Le: return ILVal::boolean(l <= r);
              default: break;
            }
            throw Error(ErrorCode::UnknownOp, std::string("unknown IL operator ") + name);
          },
      },
      il.node());
}

}  // namespace detail

inline ILVal il_sem(const ILExpr& il, const ILContext& cx, Nat t0 = 0) {
  return detail::il_eval(il, cx, t0);
}

inline ILVal il_sem(const ILExpr& il, const ExtEnv& rho, const TEnv& delta, Nat t0, Nat t_now,
                    const Disc& d, const Party& p1, const Party& p2) {
  return detail::il_eval(il, ILContext{rho, delta, t_now, d, p1, p2}, t0);
}

/// Guard every payoff with "time < now => 0".
inline ILExpr cut_payoff(const ILExpr& il) {
  using namespace il_node;
  return std::visit(
      overloaded{
          [&](const Payoff& p) {
            return ILExpr::if_(ILExpr::binop(ILBinOp::LtN, ILExpr::tval(p.t), ILExpr::now()),
                               ILExpr::real(0.0), il);
          },
          [&](const If& i) {
            return ILExpr::if_(cut_payoff(*i.cond), cut_payoff(*i.then_branch),
                               cut_payoff(*i.else_branch));
          },
          [&](const LoopIf& l) {
            return ILExpr::loopif(cut_payoff(*l.cond), cut_payoff(*l.then_branch),
                                  cut_payoff(*l.else_branch), l.bound);
          },
          [&](const UnOp& u) { return ILExpr::unop(u.op, cut_payoff(*u.arg)); },
          [&](const BinOp& b) {
            return ILExpr::binop(b.op, cut_payoff(*b.left), cut_payoff(*b.right));
          },
          [&](const auto&) { return il; },
      },
      il.node());
}

/// One evaluation scenario for il_equiv_at.
struct ILCase {
  ExtEnv rho;
  TEnv delta;
  Disc disc;
  Party p1;
  Party p2;
};

/// Finite-sample check that il1 and il2 evaluate identically at (t0, t_now).
inline bool il_equiv_at(const ILExpr& a, const ILExpr& b, Nat t0, Nat t_now,
                        const std::vector<ILCase>& cases) {
  for (const auto& k : cases) {
    ILContext cx{k.rho, k.delta, t_now, k.disc, k.p1, k.p2};
    if (!(il_sem(a, cx, t0) == il_sem(b, cx, t0))) return false;
  }
  return true;
}

// --- canonical text -------------------------------------------------------------

namespace detail {

inline std::string print_template(const TemplateExpr& t) {
  return t.is_num() ? std::to_string(t.as_num()) : t.as_var().value;
}

inline std::string print_ilt(const ILTExpr& t) {
  using namespace ilt_node;
  return std::visit(overloaded{
                        [](const TE& e) { return print_template(e.t); },
                        [](const TPlus& p) {
                          std::string r = print_ilt(*p.right);
                          if (p.right->as<TPlus>()) r = "(" + r + ")";
                          return print_ilt(*p.left) + "+" + r;
                        },
                    },
                    t.node());
}

inline std::string print_iltz(const ILTExprZ& t) {
  using namespace iltz_node;
  return std::visit(overloaded{
                        [](const TEZ& e) { return print_ilt(e.t); },
                        [](const NumZ& n) { return "(" + std::to_string(n.value) + ")"; },
                        [](const TPlusZ& p) {
                          std::string r = print_iltz(*p.right);
                          if (p.right->as<TPlusZ>()) r = "(" + r + ")";
                          return print_iltz(*p.left) + "+" + r;
                        },
                    },
                    t.node());
}

inline int il_prec(ILBinOp op) {
  switch (op) {
    case ILBinOp::Or: return 1;
    case ILBinOp::And: return 2;
    case ILBinOp::Lt:
    case ILBinOp::Le: return 3;
    case ILBinOp::Add:
    case ILBinOp::Sub: return 4;
    case ILBinOp::Mult:
    case ILBinOp::Div: return 5;
    case ILBinOp::LtN: return 9;  // printed prefix
  }
  return 9;
}

inline const char* il_infix(ILBinOp op) {
  switch (op) {
    case ILBinOp::Or: return " || ";
    case ILBinOp::And: return " && ";
    case ILBinOp::Lt: return " < ";
    case ILBinOp::Le: return " <= ";
    case ILBinOp::Add: return " + ";
    case ILBinOp::Sub: return " - ";
    case ILBinOp::Mult: return " * ";
    case ILBinOp::Div: return " / ";
    case ILBinOp::LtN: return "";
  }
  return "";
}

inline std::string print_il(const ILExpr& il, int ctx);

inline std::string print_il_args(std::initializer_list<const ILExpr*> xs) {
  std::string s;
  for (auto* x : xs) {
    if (!s.empty()) s += ", ";
    s += print_il(*x, 0);
  }
  return s;
}

inline std::string print_il(const ILExpr& il, int ctx) {
  using namespace il_node;
  return std::visit(
      overloaded{
          [](const FloatLit& f) {
            std::string s = lex::format_real(f.value);
            return f.value < 0 || std::signbit(f.value) ? "(" + s + ")" : s;
          },
          [](const NatLit& n) { return "nat(" + std::to_string(n.value) + ")"; },
          [](const BoolLit& b) { return std::string(b.value ? "true" : "false"); },
          [](const TexprVal& t) { return "tval(" + print_ilt(t.t) + ")"; },
          [](const Now&) { return std::string("now"); },
          [](const Model& m) { return "model(" + m.label.name + ", " + print_iltz(m.t) + ")"; },
          [](const Payoff& p) {
            return "payoff(" + print_ilt(p.t) + ", " + p.from.value + ", " + p.to.value + ")";
          },
          [](const If& i) {
            return "if(" + print_il_args({&*i.cond, &*i.then_branch, &*i.else_branch}) + ")";
          },
          [](const LoopIf& l) {
            return "loopif(" + print_il_args({&*l.cond, &*l.then_branch, &*l.else_branch}) +
                   ", " + print_template(l.bound) + ")";
          },
          [](const UnOp& u) {
            return std::string(il_op_name(u.op)) + "(" + print_il(*u.arg, 0) + ")";
          },
          [&](const BinOp& b) {
            if (b.op == ILBinOp::LtN)
              return "ltn(" + print_il_args({&*b.left, &*b.right}) + ")";
            int p = il_prec(b.op);
            bool cmp = p == 3;
            std::string s = print_il(*b.left, cmp ? p + 1 : p) + il_infix(b.op) +
                            print_il(*b.right, p + 1);
            return p < ctx ? "(" + s + ")" : s;
          },
      },
      il.node());
}

}  // namespace detail

inline std::string print_ilt(const ILTExpr& t) { return detail::print_ilt(t); }
inline std::string print_iltz(const ILTExprZ& t) { return detail::print_iltz(t); }
inline std::string print_il(const ILExpr& il) { return detail::print_il(il, 0); }

namespace detail {

class ILParser {
 public:
  ILParser(std::string_view src, const std::map<std::string, Ty>& labels)
      : cur_(lex::tokenize(src)), labels_(labels) {}

  ILExpr parse_all() {
    ILExpr e = expr();
    if (!cur_.at_end()) cur_.fail("expected end of input");
    return e;
  }

 private:
  ILExpr expr() { return or_expr(); }

  ILExpr or_expr() {
    ILExpr l = and_expr();
    while (cur_.accept("||")) l = ILExpr::binop(ILBinOp::Or, l, and_expr());
    return l;
  }
  ILExpr and_expr() {
    ILExpr l = cmp_expr();
    while (cur_.accept("&&")) l = ILExpr::binop(ILBinOp::And, l, cmp_expr());
    return l;
  }
  ILExpr cmp_expr() {
    ILExpr l = add_expr();
    if (cur_.accept("<")) return ILExpr::binop(ILBinOp::Lt, l, add_expr());
    if (cur_.accept("<=")) return ILExpr::binop(ILBinOp::Le, l, add_expr());
    if (cur_.accept(">")) return ILExpr::binop(ILBinOp::Lt, add_expr(), l);
    if (cur_.accept(">=")) return ILExpr::binop(ILBinOp::Le, add_expr(), l);
    return l;
  }
  ILExpr add_expr() {
    ILExpr l = mul_expr();
    for (;;) {
      if (cur_.accept("+")) {
        l = ILExpr::binop(ILBinOp::Add, l, mul_expr());
      } else if (cur_.accept("-")) {
        l = ILExpr::binop(ILBinOp::Sub, l, mul_expr());
      } else {
        return l;
      }
    }
  }
  ILExpr mul_expr() {
    ILExpr l = atom();
    for (;;) {
      if (cur_.accept("*")) {
        l = ILExpr::binop(ILBinOp::Mult, l, atom());
      } else if (cur_.accept("/")) {
        l = ILExpr::binop(ILBinOp::Div, l, atom());
      } else {
        return l;
      }
    }
  }

  ILExpr atom() {
    const lex::Token& t = cur_.peek();
    if (t.kind == lex::Tok::Integer || t.kind == lex::Tok::Real) {
      return ILExpr::real(lex::number_value(cur_.next()));
    }
    if (cur_.is_punct("-")) {
      cur_.next();
      const lex::Token& n = cur_.peek();
      if (n.kind != lex::Tok::Integer && n.kind != lex::Tok::Real) cur_.fail("expected a number");
      return ILExpr::real(-lex::number_value(cur_.next()));
    }
    if (cur_.accept("(")) {
      ILExpr e = expr();
      cur_.expect(")");
      return e;
    }
    if (t.kind != lex::Tok::Ident) cur_.fail("expected an expression");
    std::string name = cur_.next().text;
    if (name == "true") return ILExpr::boolean(true);
    if (name == "false") return ILExpr::boolean(false);
    if (name == "now") return ILExpr::now();
    cur_.expect("(");
    ILExpr out = call(name);
    cur_.expect(")");
    return out;
  }

  ILExpr call(const std::string& name) {
    if (name == "nat") {
      if (cur_.peek().kind != lex::Tok::Integer) cur_.fail("expected a natural");
      return ILExpr::nat(std::stoull(cur_.next().text));
    }
    if (name == "tval") return ILExpr::tval(ilt());
    if (name == "model") {
      std::string l = cur_.expect_ident("label");
      cur_.expect(",");
      auto it = labels_.find(l);
      return ILExpr::model(Label{l, it == labels_.end() ? Ty::Real : it->second}, iltz());
    }
    if (name == "payoff") {
      ILTExpr t = ilt();
      cur_.expect(",");
      std::string a = cur_.expect_ident("party");
      cur_.expect(",");
      std::string b = cur_.expect_ident("party");
      return ILExpr::payoff(t, Party(a), Party(b));
    }
    if (name == "if") {
      ILExpr c = expr();
      cur_.expect(",");
      ILExpr a = expr();
      cur_.expect(",");
      ILExpr b = expr();
      return ILExpr::if_(c, a, b);
    }
    if (name == "loopif") {
      ILExpr c = expr();
      cur_.expect(",");
      ILExpr a = expr();
      cur_.expect(",");
      ILExpr b = expr();
      cur_.expect(",");
      return ILExpr::loopif(c, a, b, template_leaf());
    }
    if (name == "neg" || name == "not") {
      return ILExpr::unop(name == "neg" ? ILUnOp::Neg : ILUnOp::Not, expr());
    }
    static const std::map<std::string, ILBinOp> kPrefix = {
        {"add", ILBinOp::Add}, {"sub", ILBinOp::Sub}, {"mult", ILBinOp::Mult},
        {"div", ILBinOp::Div}, {"lt", ILBinOp::Lt},   {"le", ILBinOp::Le},
        {"and", ILBinOp::And}, {"or", ILBinOp::Or},   {"ltn", ILBinOp::LtN}};
    auto it = kPrefix.find(name);
    if (it == kPrefix.end()) {
      throw ParseError(ErrorCode::UnknownOperator, "unknown IL construct '" + name + "'",
                       cur_.peek().line, cur_.peek().column);
    }
    ILExpr a = expr();
    cur_.expect(",");
    return ILExpr::binop(it->second, a, expr());
  }

  TemplateExpr template_leaf() {
    const lex::Token& t = cur_.peek();
    if (t.kind == lex::Tok::Integer) return TemplateExpr::num(std::stoull(cur_.next().text));
    if (t.kind == lex::Tok::Ident) return TemplateExpr::var(TVar(cur_.next().text));
    cur_.fail("expected a template expression");
  }

  ILTExpr ilt_atom() {
    if (cur_.accept("(")) {
      ILTExpr t = ilt();
      cur_.expect(")");
      return t;
    }
    return ILTExpr::te(template_leaf());
  }
  ILTExpr ilt() {
    ILTExpr t = ilt_atom();
    while (cur_.accept("+")) t = ILTExpr::plus(t, ilt_atom());
    return t;
  }

  // Runs of plain template terms form one TEZ; "(i)" is an integer offset.
  ILTExprZ iltz_unit() {
    if (cur_.is_punct("(")) {
      bool numz = (cur_.peek(1).kind == lex::Tok::Integer && cur_.is_punct(")", 2)) ||
                  (cur_.is_punct("-", 1) && cur_.peek(2).kind == lex::Tok::Integer &&
                   cur_.is_punct(")", 3));
      cur_.next();
      if (numz) {
        bool neg = cur_.accept("-");
        Int v = static_cast<Int>(std::stoll(cur_.next().text));
        cur_.expect(")");
        return ILTExprZ::num(neg ? -v : v);
      }
      ILTExprZ t = iltz();
      cur_.expect(")");
      return t;
    }
    ILTExpr run = ILTExpr::te(template_leaf());
    while (cur_.is_punct("+") &&
           (cur_.peek(1).kind == lex::Tok::Integer || cur_.peek(1).kind == lex::Tok::Ident)) {
      cur_.next();
      run = ILTExpr::plus(run, ILTExpr::te(template_leaf()));
    }
    return ILTExprZ::tez(run);
  }
  ILTExprZ iltz() {
    ILTExprZ t = iltz_unit();
    while (cur_.accept("+")) t = ILTExprZ::plus(t, iltz_unit());
    return t;
  }

  lex::Cursor cur_;
  const std::map<std::string, Ty>& labels_;
};

}  // namespace detail

/// Parse the canonical text form. Bare numbers are real literals; `a > b`
/// and `a >= b` are read as `b < a` and `b <= a`. Labels not listed in
/// `labels` are Real.
inline ILExpr parse_il(std::string_view src, const std::map<std::string, Ty>& labels = {}) {
  return detail::ILParser(src, labels).parse_all();
}

}  // namespace contractc
