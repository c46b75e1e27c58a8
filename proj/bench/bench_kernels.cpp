#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "mwb/fixtures.hpp"
#include "mwb/kernels.hpp"
#include "mwb/validation.hpp"

using namespace mwb;

namespace {

// ERD project with `n` extra entities of four attributes; a quarter lack a key.
struct Project {
  Workbench wb;
  fixtures::Erd f;

  explicit Project(int n) {
    f = fixtures::load_erd(wb);
    wb.store().transact(
        "bench",
        [&](Draft& d) {
          for (int i = 0; i < n; ++i) {
            nlohmann::json attrs = nlohmann::json::array();
            for (int k = 0; k < 4; ++k) {
              attrs.push_back({{"name", "a" + std::to_string(k)}, {"type", "Integer"}, {"isPK", k == 0 && i % 4 != 0}});
            }
            add_object(d, f.model, "Entity", {{"name", "E" + std::to_string(i)}, {"ownedAttributes", attrs}});
          }
        },
        false);
  }
};

Project& project(int n) {
  static std::map<int, std::unique_ptr<Project>> cache;
  auto& p = cache[n];
  if (!p) p = std::make_unique<Project>(n);
  return *p;
}

void query(benchmark::State& bs, ExecPolicy policy) {
  Project& p = project(static_cast<int>(bs.range(0)));
  for (auto _ : bs) {
    auto r = execute_query(p.wb.state(), "data.$ownedAttributes.values.filter(a => a.$isPK.value).size == 0",
                           p.f.model, policy, "Entity");
    benchmark::DoNotOptimize(r);
  }
  bs.SetItemsProcessed(bs.iterations() * bs.range(0));
}

void markers(benchmark::State& bs, ExecPolicy policy) {
  Project& p = project(static_cast<int>(bs.range(0)));
  for (auto _ : bs) {
    auto r = compute_markers(p.wb.state(), p.f.model, policy);
    benchmark::DoNotOptimize(r);
  }
  bs.SetItemsProcessed(bs.iterations() * bs.range(0));
}

void BM_QuerySerial(benchmark::State& s) { query(s, ExecPolicy::Serial); }
void BM_QueryParallel(benchmark::State& s) { query(s, ExecPolicy::Parallel); }
void BM_MarkersSerial(benchmark::State& s) { markers(s, ExecPolicy::Serial); }
void BM_MarkersParallel(benchmark::State& s) { markers(s, ExecPolicy::Parallel); }

}  // namespace

BENCHMARK(BM_QuerySerial)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QueryParallel)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MarkersSerial)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MarkersParallel)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
