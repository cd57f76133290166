#pragma once

// Source emission for payoff expressions. One backend: a lazy functional
// module in which loopif is a higher-order helper.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "contractc/error.hpp"
#include "contractc/lexer.hpp"
#include "contractc/payoff_il.hpp"

namespace contractc {

enum class BackendKind { ReferenceFunctional };

struct Backend {
  BackendKind kind = BackendKind::ReferenceFunctional;
  std::string module_name = "Examples.PayoffFunction";
  bool emit_loopif_helper = true;
};

inline BackendKind backend_from_name(std::string_view name) {
  if (name == "functional" || name == "haskell" || name == "reference")
    return BackendKind::ReferenceFunctional;
  throw Error(ErrorCode::UnknownBackend, "unknown backend '" + std::string(name) + "'");
}

struct EmittedModule {
  std::string source;
  std::string entry_point;
  std::string file_name;
  bool helper_included = false;
};

/// LoopIf with a zero bound is an ordinary conditional.
inline ILExpr simplify_loopif0(const ILExpr& il) {
  using namespace il_node;
  return std::visit(
      overloaded{
          [&](const LoopIf& l) {
            ILExpr c = simplify_loopif0(*l.cond);
            ILExpr a = simplify_loopif0(*l.then_branch);
            ILExpr b = simplify_loopif0(*l.else_branch);
            if (l.bound.is_num() && l.bound.as_num() == 0) return ILExpr::if_(c, a, b);
            return ILExpr::loopif(c, a, b, l.bound);
          },
          [&](const If& i) {
            return ILExpr::if_(simplify_loopif0(*i.cond), simplify_loopif0(*i.then_branch),
                               simplify_loopif0(*i.else_branch));
          },
          [&](const UnOp& u) { return ILExpr::unop(u.op, simplify_loopif0(*u.arg)); },
          [&](const BinOp& b) {
            return ILExpr::binop(b.op, simplify_loopif0(*b.left), simplify_loopif0(*b.right));
          },
          [&](const auto&) { return il; },
      },
      il.node());
}

inline bool contains_loopif(const ILExpr& il) {
  using namespace il_node;
  return std::visit(overloaded{
                        [](const LoopIf&) { return true; },
                        [](const If& i) {
                          return contains_loopif(*i.cond) || contains_loopif(*i.then_branch) ||
                                 contains_loopif(*i.else_branch);
                        },
                        [](const UnOp& u) { return contains_loopif(*u.arg); },
                        [](const BinOp& b) {
                          return contains_loopif(*b.left) || contains_loopif(*b.right);
                        },
                        [](const auto&) { return false; },
                    },
                    il.node());
}

namespace detail {

inline constexpr std::string_view kLoopIfHelper =
    "loopif :: Int -> Int -> (Int -> Bool) -> (Int -> a) -> (Int -> a) -> a\n"
    "loopif n t0 b e1 e2 = case b t0 of\n"
    "  True -> e1 t0\n"
    "  False -> case n of\n"
    "    0 -> e2 t0\n"
    "    _ -> loopif (n-1) (t0+1) b e1 e2\n";

inline std::string fn_template(const TemplateExpr& t) {
  if (t.is_num()) return std::to_string(t.as_num());
  return "(tenv Map.! \"" + t.as_var().value + "\")";
}

inline std::string fn_ilt(const ILTExpr& t) {
  using namespace ilt_node;
  return std::visit(overloaded{
                        [](const TE& e) { return fn_template(e.t); },
                        [](const TPlus& p) {
                          return "(" + fn_ilt(*p.left) + " + " + fn_ilt(*p.right) + ")";
                        },
                    },
                    t.node());
}

inline std::string fn_iltz(const ILTExprZ& t) {
  using namespace iltz_node;
  return std::visit(overloaded{
                        [](const TEZ& e) { return fn_ilt(e.t); },
                        [](const NumZ& n) {
                          return n.value < 0 ? "(" + std::to_string(n.value) + ")"
                                             : std::to_string(n.value);
                        },
                        [](const TPlusZ& p) {
                          return "(" + fn_iltz(*p.left) + " + " + fn_iltz(*p.right) + ")";
                        },
                    },
                    t.node());
}

inline std::string fn_party(const Party& p) { return "\"" + p.value + "\""; }

inline std::string fn_expr(const ILExpr& il) {
  using namespace il_node;
  return std::visit(
      overloaded{
          [](const FloatLit& f) {
            std::string s = lex::format_real(f.value);
            return std::signbit(f.value) ? "(" + s + ")" : s;
          },
          [](const NatLit& n) { return std::to_string(n.value); },
          [](const BoolLit& b) { return std::string(b.value ? "True" : "False"); },
          [](const TexprVal& t) { return "(" + fn_ilt(t.t) + " + t0)"; },
          [](const Now&) { return std::string("t_now"); },
          [](const Model& m) {
            std::string lookup =
                "(ext Map.! (\"" + m.label.name + "\",(" + fn_iltz(m.t) + " + t0)))";
            return m.label.sort == Ty::Bool ? "(" + lookup + " /= 0)" : lookup;
          },
          [](const If& i) {
            return "(if " + fn_expr(*i.cond) + " then " + fn_expr(*i.then_branch) + " else " +
                   fn_expr(*i.else_branch) + ")";
          },
          [](const LoopIf& l) {
            return "(loopif " + fn_template(l.bound) + " t0 (\\t0 -> " + fn_expr(*l.cond) +
                   ") (\\t0 -> " + fn_expr(*l.then_branch) + ") (\\t0 -> " +
                   fn_expr(*l.else_branch) + "))";
          },
          [](const Payoff& p) {
            if (p.from == p.to) return std::string("0.0");
            std::string x = fn_party(p.from);
            std::string y = fn_party(p.to);
            return "(disc (" + fn_ilt(p.t) + " + t0) * (if (" + x + " == p1 && " + y +
                   " == p2) then 1 else if (" + x + " == p2 && " + y +
                   " == p1) then -1 else 0))";
          },
          [](const UnOp& u) {
            return std::string(u.op == ILUnOp::Neg ? "(negate " : "(not ") + fn_expr(*u.arg) +
                   ")";
          },
          [](const BinOp& b) {
            const char* op = "";
            switch (b.op) {
              case ILBinOp::Add: op = " + "; break;
              case ILBinOp::Sub: op = " - "; break;
              case ILBinOp::Mult: op = " * "; break;
              case ILBinOp::Div: op = " / "; break;
              case ILBinOp::Lt:
              case ILBinOp::LtN: op = " < "; break;
              case ILBinOp::Le: op = " <= "; break;
              case ILBinOp::And: op = " && "; break;
              case ILBinOp::Or: op = " || "; break;
            }
            return "(" + fn_expr(*b.left) + op + fn_expr(*b.right) + ")";
          },
      },
      il.node());
}

}  // namespace detail

inline EmittedModule emit(const ILExpr& il, const Backend& backend = {}) {
  if (backend.kind != BackendKind::ReferenceFunctional)
    throw Error(ErrorCode::UnknownBackend, "unsupported backend");
  EmittedModule out;
  out.entry_point = "payoff";
  auto dot = backend.module_name.rfind('.');
  out.file_name =
      (dot == std::string::npos ? backend.module_name : backend.module_name.substr(dot + 1)) +
      ".hs";
  out.helper_included = backend.emit_loopif_helper && contains_loopif(il);

  std::string s;
  s += "module " + backend.module_name + " where\n";
  s += "import qualified Data.Map as Map\n";
  s += "import BaseTypes\n";
  s += "import Examples.BasePayoff\n";
  if (out.helper_included) {
    s += "\n";
    s += detail::kLoopIfHelper;
  }
  s += "\n";
  s += "payoffInternal ext tenv t0 t_now p1 p2 =\n";
  s += "  " + detail::fn_expr(il) + "\n";
  s += "payoff ext tenv t_now p1 p2=payoffInternal ext tenv 0 t_now p1 p2\n";
  out.source = std::move(s);
  return out;
}

/// Structural checks on emitted text: balanced brackets and quotes, the
/// module header, and both entry definitions. Returns the problems found.
inline std::vector<std::string> lint(const EmittedModule& m) {
  std::vector<std::string> issues;
  const std::string& s = m.source;
  if (s.rfind("module ", 0) != 0) issues.push_back("missing module header");
  if (s.find("\npayoffInternal ext tenv t0 t_now p1 p2 =\n") == std::string::npos)
    issues.push_back("missing payoffInternal definition");
  if (s.find("\npayoff ext tenv t_now p1 p2=payoffInternal ext tenv 0 t_now p1 p2\n") ==
      std::string::npos)
    issues.push_back("missing payoff definition");
  int depth = 0;
  bool in_string = false;
  for (char c : s) {
    if (c == '"') in_string = !in_string;
    if (in_string) continue;
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) break;
  }
  if (in_string) issues.push_back("unterminated string literal");
  if (depth != 0) issues.push_back("unbalanced parentheses");
  if (m.helper_included && s.find("\nloopif n t0 b e1 e2 =") == std::string::npos)
    issues.push_back("helper flagged but not defined");
  return issues;
}

}  // namespace contractc
