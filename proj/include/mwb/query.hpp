#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mwb/error.hpp"

namespace mwb {

enum class ExprKind : std::uint8_t {
  Null,
  Bool,
  Int,
  Real,
  String,
  Template,  // parts[i] text runs interleaved with args[i] splices
  List,
  Ident,
  Member,  // args[0].name
  Dollar,  // args[0].$name
  Index,   // args[0][args[1]]
  Call,    // args[0](args[1..])
  Lambda,  // params => args[0]
  Unary,
  Binary,
  Conditional,
};

enum class Op1 : std::uint8_t { Neg, Not };

enum class Op2 : std::uint8_t {
  Coalesce,
  Or,
  And,
  Eq,
  Ne,
  StrictEq,
  StrictNe,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
};

std::string_view to_string(Op2 op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Null;
  SourcePos pos;
  bool boolean = false;
  std::int64_t integer = 0;
  double real = 0;
  std::string name;  // string literal text, identifier, member or $ name
  Op1 op1 = Op1::Neg;
  Op2 op2 = Op2::Add;
  std::vector<ExprPtr> args;
  std::vector<std::string> params;
  std::vector<std::string> parts;
};

ExprPtr parse_expression(std::string_view source);

// Parses plain text with `${...}` splices as a template expression.
ExprPtr parse_template_text(std::string_view text);

// Predicate sources may use the constraint dialect
// `context <Class> inv: <body>`: `self` aliases `data`, `=`/`<>` compare,
// and/or/not connect. A context class other than DObject adds a class test.
struct Predicate {
  ExprPtr expr;
  std::string context_class;  // empty for plain expressions
};

Predicate parse_predicate(std::string_view source);

// Canonical source text; parse(print(e)) is structurally equal to e.
std::string print(const Expr& e);

// Structural equality ignoring source positions.
bool same_tree(const Expr& a, const Expr& b);

// --- action scripts ---

enum class StmtKind : std::uint8_t { Let, Assign, If, Expr };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

// Assignment targets: a local name, `data.$f.value|values`, `node.x|y|width|height`
// or `node.state.key`. `target` keeps the parsed left-hand side.
struct Stmt {
  StmtKind kind = StmtKind::Expr;
  SourcePos pos;
  std::string name;  // Let / local Assign
  ExprPtr target;    // Assign to a store location
  ExprPtr value;     // Let, Assign, Expr; condition for If
  std::vector<StmtPtr> then_branch;
  std::vector<StmtPtr> else_branch;
};

struct Script {
  std::vector<StmtPtr> body;
};

Script parse_script(std::string_view source);

}  // namespace mwb
