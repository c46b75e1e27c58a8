#include <filesystem>

#include "doctest.h"
#include "edit_script.hpp"
#include "support.hpp"

using namespace mwb;

TEST_CASE("replaying the log reproduces the canonical serialization") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    test::EditGenerator edits(f.model, seed);
    for (int step = 0; step < 40; ++step) {
      const int dice = edits.pick(0, 9);
      try {
        if (dice == 0) {
          wb.undo();
        } else if (dice == 1) {
          wb.redo();
        } else {
          wb.apply(edits.next(wb.state()));
        }
      } catch (const Error&) {
      }
    }
    Store replayed = Store::replay(wb.store().log());
    REQUIRE(replayed.canonical() == wb.store().canonical());
    REQUIRE(integrity_problems(wb.state()).empty());
  }
}

TEST_CASE("undo walks back through every state and redo forward again") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    test::EditGenerator edits(f.model, seed);
    std::vector<State> states{wb.state()};
    while (states.size() < 25) {
      try {
        Outcome o = wb.apply(edits.next(wb.state()));
        if (!o.commit.empty) states.push_back(wb.state());
      } catch (const Error&) {
      }
    }
    for (std::size_t i = states.size() - 1; i > 0; --i) {
      wb.undo();
      REQUIRE(wb.state().same_content(states[i - 1]));
    }
    CHECK_FALSE(wb.store().can_undo());
    for (std::size_t i = 1; i < states.size(); ++i) {
      wb.redo();
      REQUIRE(wb.state().same_content(states[i]));
    }
  }
}

TEST_CASE("a failing edit leaves the store untouched") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const std::string before = wb.store().canonical();
  CHECK_THROWS_AS(wb.apply([&](Draft& d) {
    set_feature(d, f.user, "name", {Scalar("Changed")});
    set_feature(d, f.user, "nothing", {Scalar("x")});
  }),
                  Error);
  CHECK(wb.store().canonical() == before);
  CHECK_THROWS_AS(wb.mutate_feature(f.has, "left", FeatureEdit{EditKind::Insert, {Scalar(f.role)}, std::nullopt}),
                  Error);
  CHECK_THROWS_AS(wb.set_feature(f.user_attributes[0], "type", {Scalar("Colour")}), Error);
  CHECK_THROWS_AS(wb.set_feature(f.user_attributes[0], "isPK", {Scalar("yes")}), Error);
  CHECK(wb.store().canonical() == before);
}

TEST_CASE("save and load round trip") {
  Workbench wb;
  fixtures::load_expr(wb);
  auto dir = std::filesystem::temp_directory_path() / "mwb-store-test";
  std::filesystem::create_directories(dir);
  auto file = dir / "expr.json";
  wb.store().save(file);
  Store loaded = Store::load(file);
  CHECK(loaded.canonical() == wb.store().canonical());
  CHECK(loaded.state() == wb.state());
  std::filesystem::remove_all(dir);
}

TEST_CASE("foreign ops commit all or nothing") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  std::vector<Op> rename = wb.store().prepare([&](Draft& d) { set_feature(d, f.user, "name", {Scalar("Person")}); });
  std::vector<Op> move = wb.store().prepare([&](Draft& d) { set_position(d, f.role, 10, 10); });
  wb.apply([&](Draft& d) { set_feature(d, f.user, "name", {Scalar("Account")}); });
  const std::string before = wb.store().canonical();
  std::vector<Op> both = move;
  both.insert(both.end(), rename.begin(), rename.end());
  try {
    wb.apply_ops("remote", both);
    FAIL("stale op accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Rejected);
  }
  CHECK(wb.store().canonical() == before);
  wb.apply_ops("remote", move);
  CHECK(wb.state().find_node(f.role)->x == 10);
}

TEST_CASE("object creation and containment bookkeeping") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  ElementId a;
  wb.apply([&](Draft& d) {
    a = add_object(d, f.model, "Attribute", {{"name", "email"}, {"type", "String"}});
    mutate_feature(d, f.role, "ownedAttributes", FeatureEdit{EditKind::Insert, {Scalar(a)}, 0});
  });
  CHECK(wb.state().get_as<DObject>(a).container->parent == f.role);
  CHECK(mwb::test::show_on(wb.state(), f.role, "data.$ownedAttributes.values.map(x => x.name)") ==
        "[ 'email', 'id', 'name', 'description' ]");
  wb.delete_element(f.role);
  CHECK_FALSE(wb.state().find(a));
  CHECK(integrity_problems(wb.state()).empty());
  // Abstract classes cannot be instantiated.
  CHECK_THROWS_AS(wb.apply([&](Draft& d) { add_object(d, f.model, "NamedElement"); }), Error);
}
