#include <atomic>

#include "doctest.h"
#include "support.hpp"

using namespace mwb;

namespace {

// ERD model with `n` extra entities of three attributes each.
fixtures::Erd big_erd(Workbench& wb, int n) {
  auto f = fixtures::load_erd(wb);
  wb.store().transact(
      "fixture",
      [&](Draft& d) {
        for (int i = 0; i < n; ++i) {
          nlohmann::json attrs = nlohmann::json::array();
          for (int k = 0; k < 3; ++k) {
            attrs.push_back({{"name", "a" + std::to_string(k)}, {"type", "Integer"}, {"isPK", (i + k) % 4 == 0}});
          }
          ElementId e = add_object(d, f.model, "Entity", {{"name", "E" + std::to_string(i)}, {"ownedAttributes", attrs}});
          set_layout(d, e, (i % 40) * 200.0, (i / 40) * 160.0, 180, 150);
        }
      },
      false);
  return f;
}

}  // namespace

TEST_CASE("for_each_index visits every index once and reports the first failure") {
  std::vector<std::atomic<int>> hits(5000);
  for_each_index(hits.size(), [&](std::size_t i) { hits[i]++; }, ExecPolicy::Parallel);
  for (auto& h : hits) REQUIRE(h.load() == 1);
  try {
    for_each_index(
        1000,
        [](std::size_t i) {
          if (i % 300 == 7) fail(ErrorCode::InvalidArgument, "at " + std::to_string(i));
        },
        ExecPolicy::Parallel);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("at 7") != std::string::npos);
  }
}

TEST_CASE("serial and parallel query execution agree") {
  Workbench wb;
  auto f = big_erd(wb, 400);
  const State& st = wb.state();
  for (const char* q : {"data.name", "data.className == 'Attribute' && data.isPK", "node.x * node.y",
                        "data.$ownedAttributes.values.filter(a => a.$isPK.value).size",
                        "`${data.className}:${data.id}`"}) {
    const bool entities_only = std::string_view(q).find("$ownedAttributes") != std::string_view::npos;
    auto cls = entities_only ? std::optional<std::string_view>("Entity") : std::nullopt;
    auto serial = execute_query(st, q, f.model, ExecPolicy::Serial, cls);
    auto parallel = execute_query(st, q, f.model, ExecPolicy::Parallel, cls);
    REQUIRE_FALSE(serial.empty());
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) REQUIRE(values_equal(serial[i], parallel[i]));
  }
  CHECK(execute_query(st, "true", f.model, ExecPolicy::Parallel, "Entity").size() == 402);
  CHECK(compute_markers(st, f.model, ExecPolicy::Serial) == compute_markers(st, f.model, ExecPolicy::Parallel));
}

TEST_CASE("query errors name the failing object") {
  Workbench wb;
  auto f = fixtures::load_erd(wb);
  try {
    execute_query(wb.state(), "data.left.name", f.model, ExecPolicy::Parallel);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("(at " + f.user.str() + ")") != std::string::npos);
  }
}
