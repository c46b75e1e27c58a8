#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mwb/console.hpp"
#include "mwb/reflect.hpp"

using namespace mwb;

namespace {

struct Session {
  std::ostringstream out, err;
  Console console{out, err};

  int operator()(const std::string& line) { return console.execute(line); }
  std::string take() {
    std::string s = out.str();
    out.str("");
    return s;
  }
};

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mwb_console_" + name);
}

}  // namespace

TEST_CASE("console answers the ERD expressions") {
  Session s;
  REQUIRE(s("fixtures load erd") == kOk);
  REQUIRE(s("select User") == kOk);
  s.take();
  REQUIRE(s("eval data.$ownedAttributes.values.map(attr => attr.name)") == kOk);
  CHECK(s.take() == "[ 'id', 'surname', 'firstname' ]\n");
  REQUIRE(s("eval `${node.x} * ${node.y} = ${node.x * node.y}`") == kOk);
  CHECK(s.take() == "495 * 120 = 59400\n");
  REQUIRE(s("eval view.applyTo") == kOk);
  CHECK(s.take() == "context DObject inv: self.instanceof.name = 'Entity'\n");
}

TEST_CASE("console edits propagate through the expression rules") {
  Session s;
  REQUIRE(s("fixtures load expr") == kOk);
  REQUIRE(s("set e0.val 112") == kOk);
  REQUIRE(s("select e4") == kOk);
  s.take();
  REQUIRE(s("eval data.$val.value") == kOk);
  CHECK(s.take() == "784\n");
  REQUIRE(s("undo") == kOk);
  s.take();
  REQUIRE(s("eval data.$val.value") == kOk);
  CHECK(s.take() == "684\n");
}

TEST_CASE("eval never changes the project") {
  const char* queries[] = {
      "data.$name.value",
      "data.instanceof.name",
      "data.ownedAttributes.size",
      "node.x * node.y",
      "data.parent.name",
      "data.$val.value + 1",
      "data.$left.values[0].name",
      "view.applyTo",
      "node.width / 0",
      "data.$name.value = 'renamed'",
      "data.instanceof.features.map(f => f.name)",
      "`${data.id}`",
  };
  for (const char* fixture : {"erd", "expr"}) {
    Session s;
    REQUIRE(s(std::string("fixtures load ") + fixture) == kOk);
    Workbench& wb = s.console.workbench();
    const std::string before = wb.store().canonical();
    const auto log_size = wb.store().log().size();
    std::vector<ElementId> objects;
    for (const auto& [id, e] : wb.state().elements) {
      if (std::holds_alternative<DObject>(e)) objects.push_back(id);
    }
    for (ElementId id : objects) {
      REQUIRE(s("select " + id.str()) == kOk);
      for (const char* q : queries) s(std::string("eval ") + q);
    }
    CHECK(wb.store().canonical() == before);
    CHECK(wb.store().log().size() == log_size);
  }
}

TEST_CASE("console scripts are deterministic") {
  const std::string script =
      "# expression walk\n"
      "fixtures load expr\n"
      "trace on\n"
      "set e0.val 112\n"
      "\n"
      "drag e5 503 307\n"
      "set e6.val 2\n"
      "undo\n"
      "redo\n"
      "select e4\n"
      "eval data.$val.value\n"
      "render --level 2\n"
      "validate\n";
  std::string outputs[2], documents[2];
  for (int i = 0; i < 2; ++i) {
    Session s;
    std::istringstream in(script);
    REQUIRE(s.console.run(in) == kOk);
    outputs[i] = s.take();
    documents[i] = s.console.workbench().store().canonical();
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(documents[0] == documents[1]);
  CHECK(outputs[0].find("trace 0 onDataUpdate /Expr/Add:e1 AddRule $val 214→114") != std::string::npos);
}

TEST_CASE("console save and load round trip") {
  const auto file = temp_file("roundtrip.mwb.json");
  Session a;
  REQUIRE(a("fixtures load erd") == kOk);
  REQUIRE(a("drag Role 900 200") == kOk);
  REQUIRE(a("save " + file.string()) == kOk);
  Session b;
  REQUIRE(b("load " + file.string()) == kOk);
  CHECK(b.console.workbench().store().canonical() == a.console.workbench().store().canonical());
  std::filesystem::remove(file);
}

TEST_CASE("console validation exit codes and report") {
  const auto report = temp_file("report.json");
  Session s;
  REQUIRE(s("fixtures load erd") == kOk);
  s.take();
  CHECK(s("validate") == kOk);
  CHECK(s.take() == "error /ERDModel/Entity:Role PrimaryKey: Entity Role has no primary key\n1 error(s), 0 warning(s)\n");
  CHECK(s("validate --strict --report " + report.string()) == kValidationFailed);
  std::ifstream in(report);
  auto j = nlohmann::json::parse(in);
  CHECK(j.dump().find("Role has no primary key") != std::string::npos);
  std::filesystem::remove(report);

  REQUIRE(s("set Role.ownedAttributes []") == kOk);
  CHECK(s("validate --strict") == kValidationFailed);
  REQUIRE(s("undo") == kOk);
  REQUIRE(s("set /ERDModel/Attribute:id.isPK true") != kOk);  // two attributes named id
}

TEST_CASE("console command errors") {
  Session s;
  CHECK(s("frobnicate") == kCommandError);
  CHECK(s.err.str().find("unknown command") != std::string::npos);
  CHECK(s("eval") == kCommandError);
  CHECK(s("fixtures load erd") == kOk);
  CHECK(s("select nothing-here") == kCommandError);
  CHECK(s("select id") == kCommandError);
  CHECK(s.err.str().find("matches") != std::string::npos);
  CHECK(s("drag User x 3") == kCommandError);
  CHECK(s("render --level") == kCommandError);
  CHECK(s("set User.nosuch 3") == kCommandError);

  std::istringstream in("select User\nbogus\nselect Role\n");
  Session t;
  REQUIRE(t("fixtures load erd") == kOk);
  CHECK(t.console.run(in) == kCommandError);
  REQUIRE(t.console.selected());
  CHECK(element_path(t.console.workbench().state(), *t.console.selected()) == "/ERDModel/Entity:User");
}
