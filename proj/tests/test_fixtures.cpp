#include "doctest.h"
#include "support.hpp"

using namespace mwb;
using mwb::test::show_on;
using mwb::test::val_of;

TEST_CASE("console expressions on the ERD fixture") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const State& st = wb.state();
  CHECK(show_on(st, f.user, "data.$ownedAttributes.values.map(attr => attr.name)") ==
        "[ 'id', 'surname', 'firstname' ]");
  CHECK(show_on(st, f.user, "`${node.x} * ${node.y} = ${node.x * node.y}`") == "495 * 120 = 59400");
  CHECK(mwb::test::show_in_view(st, f.user, f.syntax, "view.applyTo") == "context DObject inv: self.instanceof.name = 'Entity'");
}

TEST_CASE("ERD fixture starts with one primary key marker on Role") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  auto markers = stored_markers(wb.state(), f.model);
  REQUIRE(markers.size() == 1);
  CHECK(markers[0].element == f.role);
  CHECK(markers[0].rule == "PrimaryKey");
  CHECK(markers[0].message == "Entity Role has no primary key");
}

TEST_CASE("expression tree values follow operand positions") {
  {
    Workbench wb;
    auto f = fixtures::load_expr(wb);
    CHECK(val_of(wb.state(), f.e[1]) == 214);
    CHECK(val_of(wb.state(), f.e[3]) == 316);
    CHECK(val_of(wb.state(), f.e[4]) == 684);
  }
  {
    Workbench wb;
    auto f = fixtures::load_expr(wb, fixtures::Layout::Mirrored);
    CHECK(val_of(wb.state(), f.e[4]) == -684);
  }
}

TEST_CASE("fixtures leave a consistent store") {
  Workbench a;
  fixtures::load_erd(a);
  CHECK(integrity_problems(a.state()).empty());
  Workbench b;
  fixtures::load_expr(b);
  CHECK(integrity_problems(b.state()).empty());
  CHECK_FALSE(b.store().can_undo());
}
