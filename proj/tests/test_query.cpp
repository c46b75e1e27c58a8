#include "doctest.h"
#include "support.hpp"

using namespace mwb;
using mwb::test::show_on;

namespace {

// Random syntax trees built directly, without going through the parser.
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : gen_(seed) {}

  ExprPtr any(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(0, 11)) {
      case 0: return leaf();
      case 1: {
        auto e = node(ExprKind::Member);
        e->args = {any(depth - 1)};
        e->name = ident();
        return e;
      }
      case 2: {
        auto e = node(ExprKind::Dollar);
        e->args = {any(depth - 1)};
        e->name = ident();
        return e;
      }
      case 3: {
        auto e = node(ExprKind::Index);
        e->args = {any(depth - 1), any(depth - 1)};
        return e;
      }
      case 4: {
        auto e = node(ExprKind::Call);
        e->args = {any(depth - 1)};
        for (int i = pick(0, 2); i > 0; --i) e->args.push_back(any(depth - 1));
        return e;
      }
      case 5: {
        auto e = node(ExprKind::Lambda);
        e->params = {ident()};
        if (pick(0, 1)) e->params.push_back(ident() + "2");
        e->args = {any(depth - 1)};
        return e;
      }
      case 6: {
        auto e = node(ExprKind::Unary);
        e->op1 = pick(0, 1) ? Op1::Neg : Op1::Not;
        e->args = {any(depth - 1)};
        return e;
      }
      case 7:
      case 8: {
        auto e = node(ExprKind::Binary);
        e->op2 = static_cast<Op2>(pick(0, static_cast<int>(Op2::Mod)));
        e->args = {any(depth - 1), any(depth - 1)};
        return e;
      }
      case 9: {
        auto e = node(ExprKind::Conditional);
        e->args = {any(depth - 1), any(depth - 1), any(depth - 1)};
        return e;
      }
      case 10: {
        auto e = node(ExprKind::List);
        for (int i = pick(0, 3); i > 0; --i) e->args.push_back(any(depth - 1));
        return e;
      }
      default: {
        auto e = node(ExprKind::Template);
        e->parts = {text()};
        for (int i = pick(0, 2); i > 0; --i) {
          e->args.push_back(any(depth - 1));
          e->parts.push_back(text());
        }
        return e;
      }
    }
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  static std::shared_ptr<Expr> node(ExprKind k) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    return e;
  }

  std::string ident() {
    static const char* names[] = {"data", "node", "x", "value", "attr", "items", "a1", "_tmp"};
    return names[pick(0, 7)];
  }

  std::string text() {
    static const char* runs[] = {"", "a", " = ", "it's", "back`tick", "x\\y", "{}", "$", "line\nbreak"};
    return runs[pick(0, 8)];
  }

  ExprPtr leaf() {
    switch (pick(0, 5)) {
      case 0: return node(ExprKind::Null);
      case 1: {
        auto e = node(ExprKind::Bool);
        e->boolean = pick(0, 1);
        return e;
      }
      case 2: {
        auto e = node(ExprKind::Int);
        e->integer = pick(0, 100000);
        return e;
      }
      case 3: {
        auto e = node(ExprKind::Real);
        e->real = pick(0, 4000) + 0.25 * pick(1, 3);
        return e;
      }
      case 4: {
        auto e = node(ExprKind::String);
        e->name = text();
        return e;
      }
      default: {
        auto e = node(ExprKind::Ident);
        e->name = ident();
        return e;
      }
    }
  }

  std::mt19937_64 gen_;
};

std::string show(const std::string& source) {
  State empty;
  EvalContext ctx;
  ctx.state = &empty;
  return format_value(empty, evaluate(source, ctx));
}

ErrorCode code_of(const std::string& source) {
  try {
    show(source);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error for " << source);
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("printing then parsing gives back the same tree") {
  TreeGen gen(2024);
  for (int i = 0; i < 2000; ++i) {
    ExprPtr e = gen.any(4);
    const std::string text = print(*e);
    ExprPtr back;
    try {
      back = parse_expression(text);
    } catch (const Error& err) {
      FAIL(text << "\n" << err.what());
    }
    REQUIRE_MESSAGE(same_tree(*e, *back), text);
    REQUIRE(print(*back) == text);
  }
}

TEST_CASE("operators") {
  CHECK(show("1 + 2 * 3") == "7");
  CHECK(show("(1 + 2) * 3") == "9");
  CHECK(show("7 / 2") == "3.5");
  CHECK(show("8 / 2") == "4");
  CHECK(show("7 % 3") == "1");
  CHECK(show("-7 % 3") == "-1");
  CHECK(show("'a' + 1") == "a1");
  CHECK(show("null ?? 5") == "5");
  CHECK(show("0 ?? 5") == "0");
  CHECK(show("0 || 'x'") == "x");
  CHECK(show("'' && 'x'") == "");
  CHECK(show("1 == 1.0") == "true");
  CHECK(show("1 != 2") == "true");
  CHECK(show("'abc' < 'abd'") == "true");
  CHECK(show("!null") == "true");
  CHECK(show("true ? 'y' : 'n'") == "y");
  CHECK(show("9223372036854775807 + 1") == "9.223372036854776e+18");
}

TEST_CASE("lists, lambdas and Math") {
  CHECK(show("[1, 2, 3].map(x => x * 2)") == "[ 2, 4, 6 ]");
  CHECK(show("[1, 2, 3].filter(x => x > 1).size") == "2");
  CHECK(show("['a', 'b'].length") == "2");
  CHECK(show("[1, 2][5]") == "null");
  CHECK(show("[[1], ['q']]") == "[ [ 1 ], [ 'q' ] ]");
  CHECK(show("Math.max(3, 9)") == "9");
  CHECK(show("Math.min(3, 2.5)") == "2.5");
  CHECK(show("Math.round(2.5)") == "3");
  CHECK(show("Math.round(-2.5)") == "-2");
  CHECK(show("Math.floor(-0.5)") == "-1");
  CHECK(show("Math.ceil(0.2)") == "1");
  CHECK(show("Math.abs(-4)") == "4");
  CHECK(show("`${1 + 1} items`") == "2 items");
  CHECK(show("`${null} ${false} ${[1, 2]}`") == "null false 1,2");
}

TEST_CASE("evaluation errors") {
  CHECK(code_of("1 / 0") == ErrorCode::InvalidArgument);
  CHECK(code_of("1 % 0") == ErrorCode::InvalidArgument);
  CHECK(code_of("'a' < 1") == ErrorCode::TypeMismatch);
  CHECK(code_of("null.x") == ErrorCode::NullAccess);
  CHECK(code_of("unknown") == ErrorCode::Navigation);
  CHECK(code_of("[1].nope") == ErrorCode::Navigation);
  CHECK(code_of("1 +") == ErrorCode::Syntax);
  try {
    parse_expression("a.b +\n  * 2");
    FAIL("parsed");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("2:3 ", 0) == 0);
  }
}

TEST_CASE("navigation over objects and their classes") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const State& st = wb.state();
  CHECK(show_on(st, f.user, "data.name") == "User");
  CHECK(show_on(st, f.user, "data.instanceof.name") == "Entity");
  CHECK(show_on(st, f.user, "data.instanceof.extends.map(c => c.name)") == "[ 'NamedElement' ]");
  CHECK(show_on(st, f.user, "data.instanceof.features.map(c => c.name)") == "[ 'name', 'ownedAttributes' ]");
  CHECK(show_on(st, f.user, "data.instanceof.instances.size") == "2");
  CHECK(show_on(st, f.user, "data.ownedAttributes.size") == "3");
  CHECK(show_on(st, f.user, "data.$ownedAttributes.values[0].parent.name") == "User");
  CHECK(show_on(st, f.has, "data.left.name + ' ' + data.name + ' ' + data.right.name") == "User has Role");
  CHECK(show_on(st, f.has, "data.$left.feature.upperBound") == "1");
  CHECK(show_on(st, f.model, "data.rootObjects.size") == "3");
  CHECK(show_on(st, f.model, "data.metamodel.classes.map(c => c.name)") ==
        "[ 'AttributeType', 'NamedElement', 'Entity', 'Attribute', 'Relation', 'Cardinality' ]");
  CHECK(show_on(st, f.user, "data.$nothing ?? 'none'") == "none");
  CHECK(show_on(st, f.user, "node.width") == "180");
}

TEST_CASE("predicates") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  auto holds = [&](ElementId id, const std::string& p) {
    return evaluate_predicate(p, EvalContext::for_element(wb.state(), id));
  };
  const std::string entity = "context DObject inv: self.instanceof.name = 'Entity'";
  CHECK(holds(f.user, entity));
  CHECK_FALSE(holds(f.has, entity));
  CHECK(holds(f.user, "context NamedElement inv: self.name <> 'x' and not (self.name = 'Role')"));
  CHECK_FALSE(holds(f.role, "context NamedElement inv: self.name <> 'x' and not (self.name = 'Role')"));
  CHECK_FALSE(holds(f.user, "context DModel inv: true"));
  CHECK(holds(f.model, "context DModel inv: true"));
  CHECK(holds(f.entity, "context DClass inv: self.name = 'Entity'"));
  CHECK_THROWS_AS(holds(f.user, "data.name"), Error);
}

TEST_CASE("scripts") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  EvalContext ctx = EvalContext::for_element(wb.state(), f.user);
  ScriptResult r = run_script(parse_script("let n = data.$ownedAttributes.values.size\nlet m = n * 2\nm + 1"), ctx,
                              nullptr);
  CHECK(format_value(wb.state(), r.last) == "7");
  try {
    run_script(parse_script("data.$name.value = 'X'"), ctx, nullptr);
    FAIL("wrote through a read-only script");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("read-only") != std::string::npos);
  }
  Outcome o = wb.apply([&](Draft& d) {
    run_script(parse_script("if (node.x > 100) { node.x = 100 } else node.x = 0\nnode.state.seen = true"),
               EvalContext::for_element(d.state(), f.user), &d);
  });
  CHECK(wb.state().find_node(f.user)->x == 100);
  CHECK(wb.state().find_node(f.user)->state.at("seen") == true);
}
