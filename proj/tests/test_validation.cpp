#include "doctest.h"
#include "support.hpp"

using namespace mwb;

namespace {

std::vector<Marker> errors_on(const State& st, ElementId model, ElementId element) {
  std::vector<Marker> out;
  for (const Marker& m : stored_markers(st, model)) {
    if (m.element == element && m.severity == Severity::Error) out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("primary key rule") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  REQUIRE(errors_on(wb.state(), f.model, f.role).size() == 1);
  CHECK(errors_on(wb.state(), f.model, f.user).empty());

  SUBCASE("marking a key clears the marker on the next update") {
    Outcome o = wb.set_feature(f.role_attributes[0], "isPK", {Scalar(true)});
    CHECK(o.revalidated);
    CHECK(errors_on(wb.state(), f.model, f.role).empty());
    CHECK(stored_markers(wb.state(), f.model).empty());
    wb.undo();
    CHECK(errors_on(wb.state(), f.model, f.role).size() == 1);
  }
  SUBCASE("deleting the only key attribute raises a marker") {
    wb.delete_element(f.user_attributes[0]);
    CHECK(errors_on(wb.state(), f.model, f.user).size() == 1);
    CHECK(errors_on(wb.state(), f.model, f.role).size() == 1);
    wb.undo();
    CHECK(errors_on(wb.state(), f.model, f.user).empty());
  }
  SUBCASE("removing the key feature from the metamodel marks every entity") {
    wb.co_evolve(meta_edit::RemoveFeature{f.is_pk});
    CHECK(errors_on(wb.state(), f.model, f.user).size() == 1);
    CHECK(errors_on(wb.state(), f.model, f.role).size() == 1);
    wb.undo();
    CHECK(errors_on(wb.state(), f.model, f.user).empty());
    CHECK(errors_on(wb.state(), f.model, f.role).size() == 1);
  }
  SUBCASE("re-adding the key feature with default true clears all markers") {
    wb.co_evolve(meta_edit::RemoveFeature{f.is_pk});
    wb.co_evolve(meta_edit::AddAttribute{f.attribute, "isPK", AttributeType::of(PrimitiveKind::Boolean), 0, 1,
                                         Scalar(true)});
    CHECK(stored_markers(wb.state(), f.model).empty());
  }
}

TEST_CASE("markers are stored in node state and survive a save") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const NodeInfo& n = *wb.state().find_node(f.role);
  REQUIRE(n.state.count(kMarkerKey));
  const auto& stored = n.state.at(kMarkerKey);
  REQUIRE(stored.size() == 1);
  CHECK(stored[0]["rule"] == "PrimaryKey");
  CHECK(stored[0]["severity"] == "error");
  Store copy = Store::from_document(wb.store().document());
  CHECK(stored_markers(copy.state(), f.model) == stored_markers(wb.state(), f.model));
}

TEST_CASE("structural checks") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  SUBCASE("a dangling mandatory reference") {
    wb.delete_element(f.user);
    bool found = false;
    for (const Marker& m : stored_markers(wb.state(), f.model)) {
      if (m.element == f.has && m.message.find("left") != std::string::npos) found = true;
    }
    CHECK(found);
  }
  SUBCASE("serial and parallel sweeps agree") {
    CHECK(compute_markers(wb.state(), f.model, ExecPolicy::Serial) ==
          compute_markers(wb.state(), f.model, ExecPolicy::Parallel));
  }
}

TEST_CASE("marker report names elements by path") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  auto report = marker_report(wb.state(), stored_markers(wb.state(), f.model));
  REQUIRE(report.size() == 1);
  CHECK(report[0]["element"] == "/ERDModel/Entity:Role");
  CHECK(report[0]["message"] == "Entity Role has no primary key");
}

TEST_CASE("validation rules with script errors yield warnings") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  ValidationRule r;
  r.name = "Broken";
  r.applies_to = "context DObject inv: self.instanceof.name = 'Relation'";
  r.check = "let err = data.$nothing.value.size";
  register_validation_rule(wb.store(), f.validation, r);
  auto markers = validate_model(wb.store(), f.model);
  int warnings = 0;
  for (const Marker& m : markers) warnings += m.severity == Severity::Warning && m.element == f.has;
  CHECK(warnings == 1);
}
