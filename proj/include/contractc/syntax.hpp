#pragma once

// Concrete syntax of contract source files (.cl): a prelude of label, party
// and asset declarations followed by one contract term. See docs/grammar.md.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "contractc/ast.hpp"
#include "contractc/error.hpp"
#include "contractc/lexer.hpp"

namespace contractc {

inline constexpr const char* kDefaultAsset = "USD";

struct Program {
  std::map<std::string, Ty> labels;  // declared label sorts
  std::set<std::string> parties;     // empty: any party name accepted
  std::set<std::string> assets;      // empty: any asset name accepted
  Contr contract;
};

namespace detail {

inline std::optional<OpCode> op_from_name(std::string_view name) {
  for (OpCode op : kAllOpCodes)
    if (name == op_name(op)) return op;
  return std::nullopt;
}

inline std::size_t op_arity(OpCode op) {
  switch (op) {
    case OpCode::Not:
    case OpCode::Neg: return 1;
    case OpCode::Cond: return 3;
    default: return 2;
  }
}

class ContractParser {
 public:
  explicit ContractParser(std::string_view src) : cur_(lex::tokenize(src)) {}

  Program program() {
    Program p;
    parse_prelude(p);
    labels_ = &p.labels;
    parties_ = &p.parties;
    assets_ = &p.assets;
    p.contract = contract();
    if (!cur_.at_end()) cur_.fail("expected end of input");
    return p;
  }

 private:
  void parse_prelude(Program& p) {
    for (;;) {
      if (cur_.is_ident("label") && cur_.peek(1).kind == lex::Tok::Ident &&
          cur_.is_punct(":", 2)) {
        cur_.next();
        const lex::Token name_tok = cur_.peek();
        std::string name = cur_.expect_ident("label name");
        cur_.expect(":");
        const lex::Token sort_tok = cur_.peek();
        std::string sort = cur_.expect_ident("sort");
        Ty ty;
        if (sort == "Real") {
          ty = Ty::Real;
        } else if (sort == "Bool") {
          ty = Ty::Bool;
        } else {
          cur_.fail_at(sort_tok, ErrorCode::Parse, "unknown sort '" + sort + "'");
        }
        auto [it, fresh] = p.labels.emplace(name, ty);
        if (!fresh && it->second != ty) {
          cur_.fail_at(name_tok, ErrorCode::Parse, "label '" + name + "' declared at two sorts");
        }
        cur_.expect(";");
      } else if ((cur_.is_ident("party") || cur_.is_ident("asset")) &&
                 cur_.peek(1).kind == lex::Tok::Ident &&
                 (cur_.is_punct(",", 2) || cur_.is_punct(";", 2))) {
        auto& set = cur_.next().text == "party" ? p.parties : p.assets;
        do {
          set.insert(cur_.expect_ident());
        } while (cur_.accept(","));
        cur_.expect(";");
      } else {
        break;
      }
    }
  }

  TemplateExpr template_expr() {
    const lex::Token& t = cur_.peek();
    if (t.kind == lex::Tok::Integer) {
      cur_.next();
      return TemplateExpr::num(std::stoull(t.text));
    }
    if (t.kind == lex::Tok::Ident) {
      cur_.next();
      return TemplateExpr::var(TVar(t.text));
    }
    cur_.fail("expected a numeral or template variable");
  }

  Party party() {
    const lex::Token tok = cur_.peek();
    std::string name = cur_.expect_ident("party");
    if (!parties_->empty() && !parties_->count(name))
      cur_.fail_at(tok, ErrorCode::Parse, "undeclared party '" + name + "'");
    return Party(name);
  }

  Asset asset() {
    const lex::Token tok = cur_.peek();
    std::string name = cur_.expect_ident("asset");
    if (!assets_->empty() && !assets_->count(name))
      cur_.fail_at(tok, ErrorCode::Parse, "undeclared asset '" + name + "'");
    return Asset(name);
  }

  Contr contract() {
    const lex::Token tok = cur_.peek();
    if (cur_.accept("(")) {
      Contr c = contract();
      cur_.expect(")");
      return c;
    }
    if (tok.kind != lex::Tok::Ident) cur_.fail("expected a contract");
    const std::string& kw = tok.text;
    if (kw == "zero") {
      cur_.next();
      return Contr::zero();
    }
    if (kw == "let") {
      cur_.next();
      std::string x = cur_.expect_ident("variable");
      cur_.expect("=");
      Exp e = expression();
      if (!cur_.is_ident("in")) cur_.fail("expected 'in'");
      cur_.next();
      return Contr::let(Var(x), std::move(e), contract());
    }
    if (kw == "all") {
      cur_.next();
      cur_.expect("[");
      std::vector<Contr> cs;
      if (!cur_.is_punct("]")) {
        do {
          cs.push_back(contract());
        } while (cur_.accept(","));
      }
      cur_.expect("]");
      return Contr::all(std::move(cs));
    }
    if (kw != "transfer" && kw != "scale" && kw != "translate" && kw != "both" && kw != "if" &&
        kw != "ifWithin")
      cur_.fail_at(tok, ErrorCode::UnknownOperator, "unknown contract combinator '" + kw + "'");
    cur_.next();
    cur_.expect("(");
    Contr result;
    if (kw == "transfer") {
      Party p = party();
      cur_.expect(",");
      Party q = party();
      Asset a(kDefaultAsset);
      if (cur_.accept(",")) a = asset();
      result = Contr::transfer(std::move(p), std::move(q), std::move(a));
    } else if (kw == "scale") {
      Exp e = expression();
      cur_.expect(",");
      result = Contr::scale(std::move(e), contract());
    } else if (kw == "translate") {
      TemplateExpr t = template_expr();
      cur_.expect(",");
      result = Contr::translate(std::move(t), contract());
    } else if (kw == "both") {
      Contr a = contract();
      cur_.expect(",");
      result = Contr::both(std::move(a), contract());
    } else if (kw == "if" || kw == "ifWithin") {
      Exp cond = expression();
      cur_.expect(",");
      TemplateExpr t = TemplateExpr::num(0);
      if (kw == "ifWithin") {
        t = template_expr();
        cur_.expect(",");
      }
      Contr a = contract();
      cur_.expect(",");
      Contr b = contract();
      result = Contr::if_within(std::move(cond), std::move(t), std::move(a), std::move(b));
    }
    cur_.expect(")");
    return result;
  }

  // or < and < comparison < additive < multiplicative < unary
  Exp expression() { return or_exp(); }

  Exp or_exp() {
    Exp e = and_exp();
    while (cur_.accept("||")) e = Exp::op(OpCode::Or, {std::move(e), and_exp()});
    return e;
  }

  Exp and_exp() {
    Exp e = cmp_exp();
    while (cur_.accept("&&")) e = Exp::op(OpCode::And, {std::move(e), cmp_exp()});
    return e;
  }

  Exp cmp_exp() {
    Exp e = add_exp();
    static const std::pair<const char*, OpCode> kCmp[] = {
        {"<=", OpCode::Le}, {">=", OpCode::Ge}, {"==", OpCode::Eq},
        {"<", OpCode::Lt},  {">", OpCode::Gt}};
    for (auto [sym, op] : kCmp) {
      if (cur_.accept(sym)) return Exp::op(op, {std::move(e), add_exp()});
    }
    return e;
  }

  Exp add_exp() {
    Exp e = mul_exp();
    for (;;) {
      if (cur_.accept("+")) {
        e = Exp::op(OpCode::Add, {std::move(e), mul_exp()});
      } else if (cur_.accept("-")) {
        e = Exp::op(OpCode::Sub, {std::move(e), mul_exp()});
      } else {
        return e;
      }
    }
  }

  Exp mul_exp() {
    Exp e = unary_exp();
    for (;;) {
      if (cur_.accept("*")) {
        e = Exp::op(OpCode::Mult, {std::move(e), unary_exp()});
      } else if (cur_.accept("/")) {
        e = Exp::op(OpCode::Div, {std::move(e), unary_exp()});
      } else {
        return e;
      }
    }
  }

  Exp unary_exp() {
    if (cur_.is_punct("-")) {
      auto kind = cur_.peek(1).kind;
      if (kind == lex::Tok::Real || kind == lex::Tok::Integer) {
        cur_.next();
        return Exp::real(-lex::number_value(cur_.next()));
      }
      cur_.next();
      return Exp::op(OpCode::Neg, {unary_exp()});
    }
    if (cur_.accept("!")) return Exp::op(OpCode::Not, {unary_exp()});
    return atom();
  }

  Int integer() {
    bool neg = cur_.accept("-");
    const lex::Token& t = cur_.peek();
    if (t.kind != lex::Tok::Integer) cur_.fail("expected an integer");
    cur_.next();
    Int v = static_cast<Int>(std::stoll(t.text));
    return neg ? -v : v;
  }

  Exp atom() {
    const lex::Token tok = cur_.peek();
    if (tok.kind == lex::Tok::Real || tok.kind == lex::Tok::Integer) {
      cur_.next();
      return Exp::real(lex::number_value(tok));
    }
    if (cur_.accept("(")) {
      Exp e = expression();
      cur_.expect(")");
      return e;
    }
    if (tok.kind != lex::Tok::Ident) cur_.fail("expected an expression");
    const std::string& name = tok.text;
    if (name == "true" || name == "false") {
      cur_.next();
      return Exp::boolean(name == "true");
    }
    if (!cur_.is_punct("(", 1)) {
      cur_.next();
      return Exp::var(Var(name));
    }
    cur_.next();
    cur_.expect("(");
    if (name == "obs") {
      std::string l = cur_.expect_ident("label");
      cur_.expect(",");
      Int i = integer();
      cur_.expect(")");
      auto it = labels_->find(l);
      return Exp::obs(Label{l, it == labels_->end() ? Ty::Real : it->second}, i);
    }
    if (name == "acc") {
      std::string x = cur_.expect_ident("binder");
      cur_.expect("->");
      Exp body = expression();
      cur_.expect(",");
      const lex::Token& d = cur_.peek();
      if (d.kind != lex::Tok::Integer) cur_.fail("expected a step count");
      cur_.next();
      cur_.expect(",");
      Exp init = expression();
      cur_.expect(")");
      return Exp::acc(Var(x), std::move(body), std::stoull(d.text), std::move(init));
    }
    auto op = op_from_name(name);
    if (!op) cur_.fail_at(tok, ErrorCode::UnknownOperator, "unknown operator '" + name + "'");
    std::vector<Exp> args;
    if (!cur_.is_punct(")")) {
      do {
        args.push_back(expression());
      } while (cur_.accept(","));
    }
    cur_.expect(")");
    if (args.size() != op_arity(*op)) {
      cur_.fail_at(tok, ErrorCode::Parse,
                   std::string("operator '") + op_name(*op) + "' expects " +
                       std::to_string(op_arity(*op)) + " arguments");
    }
    return Exp::op(*op, std::move(args));
  }

  lex::Cursor cur_;
  const std::map<std::string, Ty>* labels_ = nullptr;
  const std::set<std::string>* parties_ = nullptr;
  const std::set<std::string>* assets_ = nullptr;
};

enum Prec { kOr = 1, kAnd = 2, kCmp = 3, kAdd = 4, kMul = 5, kAtom = 6 };

inline std::optional<std::pair<const char*, int>> infix(OpCode op) {
  switch (op) {
    case OpCode::Or: return std::pair{"||", kOr};
    case OpCode::And: return std::pair{"&&", kAnd};
    case OpCode::Lt: return std::pair{"<", kCmp};
    case OpCode::Le: return std::pair{"<=", kCmp};
    case OpCode::Eq: return std::pair{"==", kCmp};
    case OpCode::Ge: return std::pair{">=", kCmp};
    case OpCode::Gt: return std::pair{">", kCmp};
    case OpCode::Add: return std::pair{"+", kAdd};
    case OpCode::Sub: return std::pair{"-", kAdd};
    case OpCode::Mult: return std::pair{"*", kMul};
    case OpCode::Div: return std::pair{"/", kMul};
    default: return std::nullopt;
  }
}

inline std::string template_text(const TemplateExpr& t) {
  return t.is_num() ? std::to_string(t.as_num()) : t.as_var().value;
}

inline void print_exp(std::ostream& os, const Exp& e, int min_prec) {
  using namespace exp_node;
  std::visit(overloaded{
                 [&](const RLit& r) { os << lex::format_real(r.value); },
                 [&](const BLit& b) { os << (b.value ? "true" : "false"); },
                 [&](const VarE& v) { os << v.var.value; },
                 [&](const Obs& o) { os << "obs(" << o.label.name << ", " << o.index << ")"; },
                 [&](const Acc& a) {
                   os << "acc(" << a.binder.value << " -> ";
                   print_exp(os, *a.body, 0);
                   os << ", " << a.steps << ", ";
                   print_exp(os, *a.init, 0);
                   os << ")";
                 },
                 [&](const Op& o) {
                   auto fix = infix(o.op);
                   if (fix && o.args.size() == 2) {
                     auto [sym, prec] = *fix;
                     bool paren = prec < min_prec;
                     if (paren) os << "(";
                     // Comparisons do not chain; additive and multiplicative
                     // operators associate to the left.
                     int left = prec == kCmp ? prec + 1 : prec;
                     print_exp(os, o.args[0], left);
                     os << " " << sym << " ";
                     print_exp(os, o.args[1], prec + 1);
                     if (paren) os << ")";
                     return;
                   }
                   os << op_name(o.op) << "(";
                   for (std::size_t i = 0; i < o.args.size(); ++i) {
                     if (i) os << ", ";
                     print_exp(os, o.args[i], 0);
                   }
                   os << ")";
                 },
             },
             e.node());
}

inline void print_contr(std::ostream& os, const Contr& c) {
  using namespace contr_node;
  std::visit(overloaded{
                 [&](const Zero&) { os << "zero"; },
                 [&](const Transfer& t) {
                   os << "transfer(" << t.from.value << ", " << t.to.value << ", "
                      << t.asset.value << ")";
                 },
                 [&](const Let& l) {
                   os << "let " << l.var.value << " = ";
                   print_exp(os, l.exp, 0);
                   os << " in ";
                   print_contr(os, *l.body);
                 },
                 [&](const Scale& s) {
                   os << "scale(";
                   print_exp(os, s.factor, 0);
                   os << ", ";
                   print_contr(os, *s.body);
                   os << ")";
                 },
                 [&](const Translate& t) {
                   os << "translate(" << template_text(t.delay) << ", ";
                   print_contr(os, *t.body);
                   os << ")";
                 },
                 [&](const Both& b) {
                   os << "both(";
                   print_contr(os, *b.left);
                   os << ", ";
                   print_contr(os, *b.right);
                   os << ")";
                 },
                 [&](const IfWithin& i) {
                   bool plain = i.window.is_num() && i.window.as_num() == 0;
                   os << (plain ? "if(" : "ifWithin(");
                   print_exp(os, i.cond, 0);
                   if (!plain) os << ", " << template_text(i.window);
                   os << ", ";
                   print_contr(os, *i.then_branch);
                   os << ", ";
                   print_contr(os, *i.else_branch);
                   os << ")";
                 },
             },
             c.node());
}

}  // namespace detail

/// Parse a whole source file: prelude declarations followed by a contract.
/// Undeclared labels default to sort Real; a transfer without an asset uses
/// `USD`.
inline Program parse_program(std::string_view src) {
  return detail::ContractParser(src).program();
}

inline Contr parse_contract(std::string_view src) { return parse_program(src).contract; }

inline std::string print_exp(const Exp& e) {
  std::ostringstream os;
  detail::print_exp(os, e, 0);
  return os.str();
}

/// Canonical text of a contract. Labels of sort Bool are declared in a
/// prelude so that the text parses back to the same tree.
inline std::string print_contract(const Contr& c) {
  std::ostringstream os;
  std::set<std::string> bool_labels;
  for_each_label(c, [&](const Label& l) {
    if (l.sort == Ty::Bool) bool_labels.insert(l.name);
  });
  for (const auto& l : bool_labels) os << "label " << l << " : Bool;\n";
  detail::print_contr(os, c);
  return os.str();
}

}  // namespace contractc
