#include <benchmark/benchmark.h>

#include "therasim/batch.hpp"

#ifndef THERASIM_DATA_DIR
#define THERASIM_DATA_DIR "data"
#endif

namespace {

using namespace therasim;

struct Fixture {
  BehaviorCatalog catalog = BehaviorCatalog::load(std::string(THERASIM_DATA_DIR) + "/default_catalog.json");
  InstantiationTable table = InstantiationTable::load(std::string(THERASIM_DATA_DIR) + "/default_table.json");
  SessionConfig config = load_session_config(std::string(THERASIM_DATA_DIR) + "/configs/high_severity.json");
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto& f = fixture();
  const auto seeds = seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(f.config, f.catalog, f.table, seeds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto& f = fixture();
  const auto seeds = seed_range(1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(f.config, f.catalog, f.table, seeds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_BatchSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
