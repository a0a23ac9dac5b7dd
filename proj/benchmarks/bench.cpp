#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "kairos/experiment.hpp"

namespace kairos {
namespace {

UpdateMagnitudes random_magnitudes(std::mt19937_64& rng, int steps, int actions) {
  std::uniform_real_distribution<double> d(0.0, 2.0);
  std::vector<double> v(static_cast<std::size_t>(steps * actions));
  for (double& x : v) x = d(rng);
  return UpdateMagnitudes(steps, actions, std::move(v));
}

void BM_DecideHorizon(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto u = random_magnitudes(rng, 10, static_cast<int>(state.range(0)));
  const auto cfg = HorizonPolicyConfig::confidence(100.0, 1);  // never trips: full scan
  for (auto _ : state) benchmark::DoNotOptimize(decide_horizon(cfg, u));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecideHorizon)->Arg(50)->Arg(200);

void BM_Plan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> us(0, 9'000'000);
  TaskDirectory dir;
  std::vector<PendingRequest> pending;
  for (int i = 0; i < n; ++i) {
    TaskState st;
    st.task_id = "t" + std::to_string(i);
    st.control_hz = 30;
    st.waits.total = Duration{us(rng)};
    st.timelines.push_back({0, {at_us(0), at_us(1)}, {at_us(1), at_us(1 + us(rng) / 5)}, 1});
    PendingRequest r;
    r.task_id = st.task_id;
    r.round_id = 1;
    r.arrived_at = r.issued_at = r.obs_captured_at = at_us(us(rng));
    r.skipped = static_cast<int>(rng() % 7);
    pending.push_back(r);
    dir.emplace(st.task_id, std::move(st));
  }
  const EngineProfile edge(Tier::edge, {{1, Duration{200'000}}, {8, Duration{420'000}}}, 8, 8);
  const EngineProfile cloud(Tier::cloud, {{1, Duration{100'000}}, {8, Duration{210'000}}}, 8, 8);
  PlacementContext ctx;
  ctx.edge = {&edge, 8, Duration{0}};
  ctx.cloud = {&cloud, 8, Duration{0}};
  SchedulerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(plan(pending, dir, ctx, at_us(10'000'000), cfg));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Plan)->Arg(10)->Arg(100)->Arg(1000);

void BM_SimulateFleet(benchmark::State& state) {
  SyntheticSpec spec;
  spec.task_count = 100;
  const auto traces = synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 10));
  SimConfig cfg;
  cfg.edge = EngineProfile(
      Tier::edge, {{1, Duration{200'000}}, {2, Duration{230'000}}, {4, Duration{290'000}}, {8, Duration{420'000}}}, 8, 8);
  cfg.scheduler.stale_threshold = Duration{200'000};
  std::size_t events = 0;
  for (auto _ : state) {
    const SimResult r = run_fleet(traces, static_cast<int>(state.range(0)), cfg);
    events = r.events.size();
  }
  state.counters["events"] = static_cast<double>(events);
}
BENCHMARK(BM_SimulateFleet)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TraceParse(benchmark::State& state) {
  SyntheticSpec spec;
  spec.task_count = 20;
  std::ostringstream out;
  write_traces(synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 10)), out);
  const std::string text = out.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(read_traces(in));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_TraceParse)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace kairos

BENCHMARK_MAIN();
