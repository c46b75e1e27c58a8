#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace mwb;
using mwb::test::val_of;

namespace {

// Independent evaluation of an expression tree straight from the store:
// binary nodes combine their operands, with the spatially left operand first
// for the positional operators.
double oracle(const State& st, ElementId id) {
  const DObject& o = st.get_as<DObject>(id);
  const std::string cls = st.get_as<DClass>(o.instance_of).name;
  if (cls == "Number") return val_of(st, id);
  ElementId l = std::get<ElementId>(value_of(st, id, "left")->values.at(0));
  ElementId r = std::get<ElementId>(value_of(st, id, "right")->values.at(0));
  double a = oracle(st, l);
  double b = oracle(st, r);
  if (cls == "Add") return a + b;
  if (cls == "Mult") return a * b;
  if (st.find_node(r)->x < st.find_node(l)->x) std::swap(a, b);
  return cls == "Sub" ? a - b : a / b;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("changing a leaf recomputes the path to the root in three steps") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  wb.set_tracing(true);
  Outcome o = wb.set_feature(f.e[0], "val", {Scalar(112.0)});
  REQUIRE(o.cascade.fired.size() == 3);
  CHECK(o.cascade.transactions.size() == 3);
  CHECK(o.cascade.fired[0].subject == f.e[1]);
  CHECK(o.cascade.fired[1].subject == f.e[3]);
  CHECK(o.cascade.fired[2].subject == f.e[4]);
  for (int i = 0; i < 3; ++i) CHECK(o.cascade.fired[i].depth == i);
  CHECK(val_of(wb.state(), f.e[4]) == 784);
  CHECK(val_of(wb.state(), f.e[4]) == oracle(wb.state(), f.e[4]));

  std::string trace;
  for (const std::string& line : wb.trace()) trace += line + "\n";
  CHECK(trace == read_file(std::string(MWB_GOLDEN_DIR) + "/cascade_trace.txt"));
}

TEST_CASE("rule transactions are not undo steps of their own") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  wb.set_feature(f.e[0], "val", {Scalar(112.0)});
  wb.undo();
  CHECK(val_of(wb.state(), f.e[0]) == 212);
  // Undo restores the leaf; the cascade of the undo brings the rest back.
  CHECK(val_of(wb.state(), f.e[4]) == 684);
  CHECK_FALSE(wb.store().can_undo());
}

TEST_CASE("random leaf edits and moves keep every node equal to the oracle") {
  auto gen = mwb::test::rng(7);
  for (int round = 0; round < 20; ++round) {
    Workbench wb;
    auto f = fixtures::load_expr(wb, round % 2 ? fixtures::Layout::Mirrored : fixtures::Layout::LeftmostThousand);
    std::uniform_int_distribution<int> pick(0, 6), value(-500, 500), pos(0, 60);
    for (int step = 0; step < 15; ++step) {
      ElementId e = f.e[pick(gen)];
      if (wb.state().get_as<DObject>(e).instance_of == f.number && step % 3) {
        wb.set_feature(e, "val", {Scalar(static_cast<double>(value(gen)))});
      } else {
        const NodeInfo& n = *wb.state().find_node(e);
        wb.simulate_drag(e, {{pos(gen) * 15.0, n.y}});
      }
      for (ElementId id : f.e) {
        REQUIRE(val_of(wb.state(), id) == doctest::Approx(oracle(wb.state(), id)));
      }
    }
  }
}

TEST_CASE("moving the minuend to the right flips the subtraction") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  auto out = wb.simulate_drag(f.e[5], {{700, 150}, {840, 150}});
  CHECK(val_of(wb.state(), f.e[4]) == -684);
  REQUIRE(out.events.size() == 5);
  CHECK(out.events[0].trigger == Trigger::OnDragStart);
  CHECK(out.events[1].trigger == Trigger::WhileDragging);
  CHECK(out.events[2].trigger == Trigger::WhileDragging);
  CHECK(out.events[3].trigger == Trigger::OnDragEnd);
  CHECK(out.events[4].trigger == Trigger::OnDataUpdate);
  wb.undo();
  CHECK(wb.state().find_node(f.e[5])->x == 90);
  CHECK(val_of(wb.state(), f.e[4]) == 684);
}

TEST_CASE("grid snapping") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  wb.set_control_parameter(f.model, f.syntax, "grid", true);

  SUBCASE("drop at (22, 38) lands on (15, 45)") {
    wb.simulate_drag(f.user, {{22, 38}});
    CHECK(wb.state().find_node(f.user)->x == 15);
    CHECK(wb.state().find_node(f.user)->y == 45);
  }
  SUBCASE("drag is one undo step") {
    wb.simulate_drag(f.user, {{100, 100}, {202, 301}});
    wb.undo();
    CHECK(wb.state().find_node(f.user)->x == 495);
    CHECK(wb.state().find_node(f.user)->y == 120);
  }
}

TEST_CASE("snap property over random drops") {
  auto gen = mwb::test::rng(15);
  std::uniform_real_distribution<double> coord(-2000.0, 4000.0);
  for (bool grid : {true, false}) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    wb.set_control_parameter(f.model, f.syntax, "grid", grid);
    for (int i = 0; i < 1000; ++i) {
      const double x = coord(gen), y = coord(gen);
      wb.simulate_drag(f.user, {{x, y}});
      const NodeInfo& n = *wb.state().find_node(f.user);
      if (grid) {
        REQUIRE(std::fmod(n.x, 15.0) == 0);
        REQUIRE(std::fmod(n.y, 15.0) == 0);
        REQUIRE(std::abs(n.x - x) <= 7.5);
        REQUIRE(std::abs(n.y - y) <= 7.5);
      } else {
        REQUIRE(n.x == x);
        REQUIRE(n.y == y);
      }
    }
  }
}

TEST_CASE("a self-feeding rule is stopped at the depth cap") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  wb.engine().set_depth_cap(10);
  Rule r;
  r.name = "Grow";
  r.condition = "data.className == 'Number'";
  r.action = "data.$val.value = data.$val.value + 1";
  wb.engine().register_rule(wb.store(), f.semantics, r);
  try {
    wb.set_feature(f.e[0], "val", {Scalar(1.0)});
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CascadeDivergence);
    CHECK(std::string(e.what()).find("e0") != std::string::npos);
  }
}

TEST_CASE("failing rule actions are reported and do not stop the cascade") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  Rule r;
  r.name = "Broken";
  r.condition = "data.className == 'Number'";
  r.action = "data.$nothing.value = 1";
  wb.engine().register_rule(wb.store(), f.semantics, r);
  Outcome o = wb.set_feature(f.e[0], "val", {Scalar(112.0)});
  CHECK_FALSE(o.cascade.errors.empty());
  CHECK(val_of(wb.state(), f.e[4]) == 784);
}

TEST_CASE("registering a rule checks its sources and name") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  Rule bad;
  bad.name = "Bad";
  bad.action = "data.$val.value = ";
  CHECK_THROWS_AS(wb.engine().register_rule(wb.store(), f.semantics, bad), Error);
  Rule dup;
  dup.name = "AddRule";
  dup.action = "let x = 1";
  CHECK_THROWS_AS(wb.engine().register_rule(wb.store(), f.semantics, dup), Error);
}

TEST_CASE("whileDragging rules see the proposed geometry") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  Rule clamp;
  clamp.name = "KeepRight";
  clamp.trigger = Trigger::WhileDragging;
  clamp.condition = "event.x < 300";
  clamp.action = "node.x = 300";
  wb.engine().register_rule(wb.store(), f.syntax, clamp);
  auto out = wb.simulate_drag(f.user, {{100, 50}, {400, 60}, {50, 70}});
  CHECK(out.cascade.fired.size() == 2);
  CHECK(wb.state().find_node(f.user)->x == 300);
  CHECK(wb.state().find_node(f.user)->y == 70);
}
