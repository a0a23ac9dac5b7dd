#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "kairos/experiment.hpp"

namespace kairos {
namespace {

TEST(NearestRank, Examples) {
  std::vector<std::int64_t> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = 100 - i;
  EXPECT_EQ(nearest_rank(v, 25), 25);
  EXPECT_EQ(nearest_rank(v, 90), 90);
  EXPECT_EQ(nearest_rank(v, 95), 95);
  EXPECT_EQ(nearest_rank(v, 100), 100);
  EXPECT_EQ(nearest_rank(v, 0.5), 1);
  EXPECT_EQ(nearest_rank({5, 1, 3}, 25), 1);
  EXPECT_EQ(nearest_rank({5, 1, 3}, 50), 3);
  EXPECT_EQ(nearest_rank({7}, 95), 7);
  EXPECT_THROW(nearest_rank({}, 50), std::invalid_argument);
  EXPECT_THROW(nearest_rank({1}, 0), std::invalid_argument);
  EXPECT_THROW(nearest_rank({1}, 100.5), std::invalid_argument);
}

TEST(NearestRank, MatchesDefinition) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 2000; ++iter) {
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    std::vector<std::int64_t> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = std::uniform_int_distribution<std::int64_t>(0, 20)(rng);
    const int p = std::uniform_int_distribution<int>(1, 100)(rng);
    // Smallest sample value with at least p% of the sample at or below it,
    // in exact integer arithmetic.
    std::int64_t expected = INT64_MAX;
    for (std::int64_t c : v) {
      const auto at_or_below = std::count_if(v.begin(), v.end(), [&](std::int64_t x) { return x <= c; });
      if (100 * at_or_below >= static_cast<std::int64_t>(p) * n) expected = std::min(expected, c);
    }
    ASSERT_EQ(nearest_rank(v, p), expected);
  }
}

TaskOutcome outcome(const std::string& id, std::int64_t latency, int offloaded, int rounds) {
  TaskOutcome o;
  o.task_id = id;
  o.latency = Duration{latency};
  o.wait_total = Duration{latency / 10};
  o.offloaded_rounds = offloaded;
  o.total_rounds = rounds;
  return o;
}

TEST(Summary, Aggregates) {
  const std::vector<TaskOutcome> tasks{outcome("a", 100, 0, 4), outcome("b", 300, 2, 4), outcome("c", 200, 1, 2),
                                       outcome("d", 400, 0, 10)};
  const LatencySummary s = summarize(tasks);
  EXPECT_EQ(s.tasks, 4u);
  EXPECT_DOUBLE_EQ(s.avg_us, 250.0);
  EXPECT_EQ(s.p25_us, 100);
  EXPECT_EQ(s.p90_us, 400);
  EXPECT_EQ(s.p95_us, 400);
  EXPECT_DOUBLE_EQ(s.offload_fraction, 3.0 / 20.0);
  EXPECT_EQ(s.wait_total_us, 10 + 30 + 20 + 40);
  EXPECT_EQ(summarize({}).tasks, 0u);
}

TEST(Experiment, LoadLabels) {
  CellSpec c;
  c.rate_per_sec = 0.5;
  EXPECT_EQ(c.load_label(), "rate=0.5");
  c.mode = LoadMode::fleet;
  c.fleet = 10;
  EXPECT_EQ(c.load_label(), "fleet=10");
}

std::vector<TaskTrace> family(int n) {
  SyntheticSpec s;
  s.task_count = n;
  return synthesize_family(s, HorizonPolicyConfig::confidence(0.4, 10));
}

SimConfig edge_config() {
  SimConfig cfg;
  cfg.edge = EngineProfile(Tier::edge, {{1, Duration{200'000}}, {4, Duration{290'000}}}, 4, 4);
  return cfg;
}

TEST(Experiment, CellsRunInParallelAndKeepOrder) {
  const auto traces = family(20);
  std::vector<CellSpec> cells;
  for (auto p : {SchedulingPolicy::kairos, SchedulingPolicy::fifo, SchedulingPolicy::las}) {
    cells.push_back({p, LoadMode::rate, 2.0, 1, 4});
    cells.push_back({p, LoadMode::fleet, 1.0, 5, 4});
  }
  const auto serial = run_cells(traces, cells, edge_config(), 1);
  const auto parallel = run_cells(traces, cells, edge_config(), 4);
  ASSERT_EQ(parallel.size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(parallel[i].cell.scheduler, cells[i].scheduler);
    EXPECT_EQ(parallel[i].config.scheduler.policy, cells[i].scheduler);
    EXPECT_EQ(parallel[i].events, serial[i].events);
    EXPECT_LE(parallel[i].summary.p25_us, parallel[i].summary.p95_us);
    EXPECT_GE(parallel[i].summary.offload_fraction, 0.0);
    EXPECT_LE(parallel[i].summary.offload_fraction, 1.0);
  }
  std::ostringstream a, b;
  write_results_csv(serial, a);
  write_results_csv(parallel, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, FailuresPropagate) {
  const auto traces = family(5);
  SimConfig cfg = edge_config();
  cfg.edge = EngineProfile(Tier::edge, {{1, Duration{200'000}}}, 1, 0);
  const std::vector<CellSpec> cells{{SchedulingPolicy::kairos, LoadMode::rate, 1.0, 1, 1}};
  EXPECT_THROW(run_cells(traces, cells, cfg, 2), SimulationError);
}

TEST(Experiment, ResultsCsv) {
  ExperimentResult r;
  r.cell = {SchedulingPolicy::fifo, LoadMode::fleet, 1.0, 3, 1};
  r.tasks = {outcome("t1", 1000, 1, 3)};
  const std::vector<ExperimentResult> rs{r};
  std::ostringstream out;
  write_results_csv(rs, out, "2026-01-01T00:00:00Z");
  EXPECT_EQ(out.str(),
            "# generated_at 2026-01-01T00:00:00Z\n"
            "task_id,scheduler,rate_or_fleet,latency_us,wait_us,offloaded_rounds,total_rounds\n"
            "t1,fifo,fleet=3,1000,100,1,3\n");
  const std::string js = summary_json(rs);
  EXPECT_NE(js.find("\"percentile_method\": \"nearest-rank\""), std::string::npos);
  EXPECT_NE(js.find("\"load\": \"fleet=3\""), std::string::npos);
}

TEST(Pareto, StaticRowsIncreaseAndSuccessPassesThrough) {
  const auto traces = family(30);
  const std::vector<int> hs{10, 20, 30};
  const std::vector<double> ts{0.1, 0.2, 0.4, 0.8, 1.6};
  const auto rows = pareto_rows(traces, hs, ts, 5);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_DOUBLE_EQ(rows[0].mean_horizon, 10.0);
  EXPECT_DOUBLE_EQ(rows[1].mean_horizon, 20.0);
  EXPECT_DOUBLE_EQ(rows[2].mean_horizon, 30.0);
  for (std::size_t i = 4; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].policy, "confidence");
    EXPECT_LE(rows[i - 1].mean_horizon, rows[i].mean_horizon);
  }
  EXPECT_LT(rows[3].mean_horizon, rows[7].mean_horizon);
  const double success = static_cast<double>(std::count_if(traces.begin(), traces.end(),
                                                           [](const TaskTrace& t) { return t.success; })) /
                         30.0;
  for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.success_fraction, success);
  std::ostringstream out;
  write_pareto_csv(rows, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "policy,parameter,mean_horizon,success_fraction");
  EXPECT_NE(out.str().find("static,20,20.000000,"), std::string::npos);
}

TEST(Pareto, MissingMagnitudesNameTheTrace) {
  auto traces = family(3);
  traces[1].rounds[2].update_magnitudes.reset();
  const std::vector<int> hs{10};
  try {
    pareto_rows(traces, hs, {}, 5);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(traces[1].task_id), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("round 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace kairos
