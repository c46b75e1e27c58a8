#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace mwb;

namespace {

// Sections the zoom guards of the expression model view select for a level.
std::vector<std::string> predicted_sections(int level) {
  std::vector<std::string> out;
  if (level == 0) out.push_back("overview");
  if (level == 1) out.push_back("mid-detail");
  if (level >= 2) out.push_back("full-detail");
  return out;
}

std::vector<const RenderNode*> views_of(const RenderTree& t, const std::string& view) {
  std::vector<const RenderNode*> out;
  for (const RenderNode* n : t.all("view")) {
    if (n->view == view) out.push_back(n);
  }
  return out;
}

int count_kind(const RenderNode& n, const std::string& kind) {
  int c = n.kind == kind;
  for (const RenderNode& ch : n.children) c += count_kind(ch, kind);
  return c;
}

bool has_text(const RenderNode& n, const std::string& text) {
  if (n.kind == "text" && n.text == text) return true;
  for (const RenderNode& ch : n.children) {
    if (has_text(ch, text)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("semantic zoom selects the sections of the current level") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  RenderTree initial = render(wb.state(), f.model, f.syntax);
  CHECK(initial.level == 3);
  CHECK(guarded_sections(initial) == predicted_sections(3));
  for (int level = 0; level <= 3; ++level) {
    wb.set_control_parameter(f.model, f.syntax, "level", Value(level));
    RenderTree t = render(wb.state(), f.model, f.syntax);
    CHECK(t.level == level);
    CHECK(guarded_sections(t) == predicted_sections(level));
    RenderTree forced = render(wb.state(), f.model, f.syntax, {{"level", Value(3 - level)}});
    CHECK(guarded_sections(forced) == predicted_sections(3 - level));
  }
}

TEST_CASE("zoom slider rejects values outside its bounds") {
  Workbench wb;
  auto f = fixtures::load_expr(wb);
  for (Value v : {Value(-1), Value(4), Value(1.5)}) {
    try {
      wb.set_control_parameter(f.model, f.syntax, "level", v);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutOfRange);
    }
  }
  CHECK_THROWS_AS(wb.set_control_parameter(f.model, f.syntax, "level", Value("2")), Error);
  CHECK_THROWS_AS(wb.set_control_parameter(f.model, f.syntax, "zoom", Value(1)), Error);
}

TEST_CASE("ERD rendering") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  RenderTree t = render(wb.state(), f.model, f.syntax);
  auto entities = views_of(t, "Entity");
  REQUIRE(entities.size() == 2);
  CHECK(entities[0]->element == f.user);
  REQUIRE(entities[0]->frame);
  CHECK(entities[0]->frame->x == 495);
  CHECK(entities[0]->frame->y == 120);
  CHECK(views_of(t, "Attribute").size() == 6);
  CHECK(has_text(*entities[0], "(PK)"));
  CHECK_FALSE(has_text(*entities[1], "(PK)"));
  CHECK(count_kind(*entities[0], "badge") == 0);
  CHECK(count_kind(*entities[1], "badge") == 1);
  CHECK(t.all("edge").size() == 2);
  CHECK(t.all("selector").size() == 6);
  // The model itself falls back to the default viewpoint.
  CHECK(views_of(t, "ModelView").size() == 1);
}

TEST_CASE("input and selector affordances write back to the model") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  RenderTree t = render(wb.state(), f.model, f.syntax);
  const RenderNode* name_input = nullptr;
  for (const RenderNode* n : t.all("input")) {
    if (n->affordance.object == f.user) name_input = n;
  }
  REQUIRE(name_input);
  CHECK(name_input->text == "User");
  wb.apply_projectional_edit(name_input->affordance, "Person");
  CHECK(mwb::test::show_on(wb.state(), f.user, "data.name") == "Person");

  const RenderNode* type_selector = nullptr;
  for (const RenderNode* n : t.all("selector")) {
    if (n->affordance.object == f.user_attributes[1]) type_selector = n;
  }
  REQUIRE(type_selector);
  CHECK(type_selector->affordance.options == std::vector<std::string>{"Integer", "String", "Boolean", "Date"});
  wb.apply_projectional_edit(type_selector->affordance, "Date");
  CHECK(mwb::test::show_on(wb.state(), f.user_attributes[1], "data.type") == "Date");
  CHECK_THROWS_AS(wb.apply_projectional_edit(type_selector->affordance, "Colour"), Error);
}

TEST_CASE("svg output") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  const std::string before = wb.store().canonical();
  std::string plain = render_to_svg(render(wb.state(), f.model, f.syntax));
  CHECK(plain.find("<pattern id=\"grid\"") == std::string::npos);
  std::string grid = render_to_svg(render(wb.state(), f.model, f.syntax, {{"grid", Value(true)}}));
  CHECK(grid.find("<pattern id=\"grid\" width=\"15\" height=\"15\"") != std::string::npos);
  CHECK(grid == render_to_svg(render(wb.state(), f.model, f.syntax, {{"grid", Value(true)}})));
  CHECK(wb.store().canonical() == before);
  CHECK(plain.find("translate(495 120)") != std::string::npos);
}

TEST_CASE("template errors become badges") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  wb.apply([&](Draft& d) {
    Viewpoint vp = d.state().viewpoints.at(f.syntax);
    for (View& v : vp.views) {
      if (v.name == "Attribute") v.templ.children.push_back([] {
          TemplateNode t;
          t.kind = TemplateKind::Text;
          t.props["text"] = "${data.$missing.value.size}";
          return t;
        }());
    }
    put_viewpoint(d, std::move(vp));
  });
  RenderTree t = render(wb.state(), f.model, f.syntax);
  CHECK(views_of(t, "Attribute").size() == 6);
  CHECK(t.all("badge").size() >= 6);
}
