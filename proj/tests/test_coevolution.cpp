#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace mwb;

namespace {

// Brute-force sweep over every element of the store.
std::size_t values_of_feature(const State& st, ElementId feature) {
  std::size_t n = 0;
  for (const auto& [id, e] : st.elements) {
    if (auto* v = std::get_if<DValue>(&e)) n += v->feature == feature;
  }
  return n;
}

// Every object holds exactly one value per feature of its class.
bool conforms(const State& st) {
  for (const auto& [id, e] : st.elements) {
    auto* o = std::get_if<DObject>(&e);
    if (!o) continue;
    FeatureSet fs = class_features(st, o->instance_of);
    std::set<ElementId> expected(fs.attributes.begin(), fs.attributes.end());
    expected.insert(fs.references.begin(), fs.references.end());
    std::set<ElementId> held;
    for (const auto& [f, v] : o->features) {
      const DValue* dv = st.find_as<DValue>(v);
      if (!dv || dv->owner != id || dv->feature != f) return false;
      held.insert(f);
    }
    if (held != expected) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("removing an attribute deletes its values everywhere and undo restores them") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const State before = wb.state();
  const std::size_t count = values_of_feature(before, f.type);
  CHECK(count == 6);
  wb.co_evolve(meta_edit::RemoveFeature{f.type});
  CHECK(values_of_feature(wb.state(), f.type) == 0);
  CHECK(wb.state().elements.size() == before.elements.size() - count - 1);
  CHECK(conforms(wb.state()));
  wb.undo();
  CHECK(values_of_feature(wb.state(), f.type) == count);
  CHECK(wb.state().same_content(before));
}

TEST_CASE("inherited attribute removal reaches instances of every subclass") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const std::size_t count = values_of_feature(wb.state(), f.name);
  CHECK(count == 9);
  wb.co_evolve(meta_edit::RemoveFeature{f.name});
  CHECK(values_of_feature(wb.state(), f.name) == 0);
  CHECK(conforms(wb.state()));
}

TEST_CASE("adding a feature gives every instance its default") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  ElementId nullable;
  wb.co_evolve(meta_edit::AddAttribute{f.attribute, "nullable", AttributeType::of(PrimitiveKind::Boolean), 0, 1,
                                       Scalar(true)},
               &nullable);
  CHECK(values_of_feature(wb.state(), nullable) == 6);
  CHECK(mwb::test::show_on(wb.state(), f.user, "data.$ownedAttributes.values.map(a => a.nullable)") ==
        "[ true, true, true ]");
  CHECK(conforms(wb.state()));
}

TEST_CASE("renaming a feature keeps values and rewrites queries") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  wb.co_evolve(meta_edit::RenameFeature{f.owned_attributes, "columns"});
  CHECK(mwb::test::show_on(wb.state(), f.user, "data.$columns.values.map(a => a.name)") ==
        "[ 'id', 'surname', 'firstname' ]");
  const View* v = wb.state().viewpoints.at(f.syntax).find_view(f.entity_view);
  CHECK(v->templ.children[1].children[0].prop_or("items", "") == "data.$columns.values");
  // The rule still sees the keys after the rename.
  CHECK(stored_markers(wb.state(), f.model).size() == 1);
}

TEST_CASE("random metamodel edits keep models conforming and undo to the start") {
  auto gen = mwb::test::rng(99);
  for (int round = 0; round < 10; ++round) {
    Workbench wb;
    auto f = fixtures::load_erd(wb);
    const State start = wb.state();
    std::vector<ElementId> classes{f.entity, f.attribute, f.relation, f.named_element};
    int applied = 0;
    for (int step = 0; step < 12; ++step) {
      std::uniform_int_distribution<int> kind(0, 4), cls(0, 3);
      ElementId c = classes[cls(gen)];
      try {
        switch (kind(gen)) {
          case 0:
            wb.co_evolve(meta_edit::AddAttribute{c, "a" + std::to_string(step), AttributeType::of(PrimitiveKind::Integer),
                                                 0, 1, Scalar(std::int64_t{step})});
            break;
          case 1: {
            const DClass& dc = wb.state().get_as<DClass>(c);
            if (dc.attributes.empty()) continue;
            wb.co_evolve(meta_edit::RemoveFeature{dc.attributes.back()});
            break;
          }
          case 2:
            wb.co_evolve(meta_edit::AddReference{c, "r" + std::to_string(step), f.entity, 0, kUnbounded, false});
            break;
          case 3: {
            const DClass& dc = wb.state().get_as<DClass>(c);
            if (dc.references.empty()) continue;
            wb.co_evolve(meta_edit::RemoveFeature{dc.references.back()});
            break;
          }
          default:
            wb.co_evolve(meta_edit::RenameClass{c, wb.state().get_as<DClass>(c).name + "X"});
            break;
        }
        ++applied;
      } catch (const Error&) {
        continue;
      }
      REQUIRE(conforms(wb.state()));
      REQUIRE(integrity_problems(wb.state()).empty());
    }
    for (int i = 0; i < applied; ++i) wb.undo();
    CHECK_FALSE(wb.store().can_undo());
    CHECK(wb.state().same_content(start));
  }
}
