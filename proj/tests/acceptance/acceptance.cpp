// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <numeric>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "kairos/cli.hpp"
#include "kairos/experiment.hpp"
#include "kairos/wait_accounting.hpp"
#include "support/oracles.hpp"
#include "support/sync_oracle.hpp"

namespace fs = std::filesystem;
using namespace kairos;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

const EngineProfile& calibrated_edge() {
  static const EngineProfile p(
      Tier::edge, {{1, Duration{200'000}}, {2, Duration{230'000}}, {4, Duration{290'000}}, {8, Duration{420'000}}}, 8, 8);
  return p;
}

SimConfig calibrated_config() {
  SimConfig cfg;
  cfg.edge = calibrated_edge();
  cfg.scheduler.stale_threshold = calibrated_edge().batch_latency(1);
  return cfg;
}

// ---------------------------------------------------------------------------

Verdict horizon_exactness() {
  Verdict v;
  std::vector<std::vector<double>> bump = {{2, 3, 1, 4, 2, 5}, {1, 1, 1, 2, 2, 1}, {0, 0, 0, 0, 0, 0}};
  for (std::size_t n = 0; n < 6; ++n) {
    const double mean = (bump[0][n] + bump[1][n]) / 2.0;
    bump[2][n] = n == 4 ? 1.5 * mean : mean;
  }
  v.require(decide_horizon(HorizonPolicyConfig::confidence(0.4, 1), oracle::to_magnitudes(bump)) == 4,
            "fifth-action bump at t=0.4 gives H=4");
  const auto u = oracle::to_magnitudes({{1, 1, 1}, {1, 1, 1}, {1.3, 1.5, 1.1}});
  v.require(decide_horizon(HorizonPolicyConfig::confidence(0.4, 1), u) == 1, "3x3 case at t=0.4 gives H=1");
  v.require(decide_horizon(HorizonPolicyConfig::confidence(0.6, 1), u) == 3, "3x3 case at t=0.6 gives H=3");

  std::mt19937_64 rng(20240601);
  const std::vector<double> ts{0.0, 0.05, 0.1, 0.2, 0.4, 0.6, 1.0, 1.5, 3.0};
  int oracle_miss = 0, mono_miss = 0, scale_miss = 0;
  constexpr int kMatrices = 10'000;
  for (int i = 0; i < kMatrices; ++i) {
    const auto m = oracle::random_matrix(rng);
    const auto um = oracle::to_magnitudes(m);
    const int n = um.actions();
    const int h_min = std::uniform_int_distribution<int>(1, n)(rng);
    const double scale = std::ldexp(1.0, std::uniform_int_distribution<int>(-20, 20)(rng));
    std::vector<double> scaled = um.values();
    for (double& x : scaled) x *= scale;
    const UpdateMagnitudes us(um.steps(), n, scaled);
    int prev = 0;
    for (double t : ts) {
      const int h = decide_horizon(HorizonPolicyConfig::confidence(t, h_min), um);
      if (h != oracle::horizon(m, t, h_min)) ++oracle_miss;
      if (h < prev || h < std::min(h_min, n) || h > n) ++mono_miss;
      if (decide_horizon(HorizonPolicyConfig::confidence(t, h_min), us) != h) ++scale_miss;
      prev = h;
    }
  }
  v.require(oracle_miss == 0, fmt("%d oracle mismatches", oracle_miss));
  v.require(mono_miss == 0, fmt("%d monotonicity/bounds violations", mono_miss));
  v.require(scale_miss == 0, fmt("%d scale-invariance violations", scale_miss));
  v.note(fmt("%d random matrices x %zu thresholds", kMatrices, ts.size()));
  return v;
}

// ---------------------------------------------------------------------------

struct Quad {
  std::int64_t g0, g1, e0, e1;          // round j
  std::int64_t ng0, ng1, ne0, ne1;      // round j+1
  std::int64_t expected;                 // hand-computed W, us
  const char* what;
};

Verdict wait_exactness() {
  Verdict v;
  constexpr std::int64_t ms = 1000;
  // clang-format off
  const std::vector<Quad> quads = {
    {0, 500*ms, 500*ms, 800*ms,        600*ms, 1100*ms, 1100*ms, 1400*ms,   100*ms, "gen-dominated small gap"},
    {0, 500*ms, 500*ms, 800*ms,        1000*ms, 1500*ms, 1500*ms, 1800*ms,  500*ms, "gen-dominated 500 ms gap"},
    {0, 500*ms, 500*ms, 800*ms,        400*ms, 900*ms, 900*ms, 1200*ms,     0,      "gen-dominated overlap clamps"},
    {0, 1000*ms, 1000*ms, 1100*ms,     1000*ms, 2000*ms, 2000*ms, 2100*ms,  0,      "gen-dominated back to back"},
    {100*ms, 400*ms, 400*ms, 500*ms,   900*ms, 1200*ms, 1200*ms, 1300*ms,   500*ms, "gen-dominated offset start"},
    {0, 500*ms, 500*ms, 800*ms,        700*ms, 1200*ms, 5000*ms, 5300*ms,   200*ms, "gen-dominated ignores late exec"},
    {0, 300*ms, 300*ms, 600*ms,        350*ms, 650*ms, 700*ms, 1000*ms,     50*ms,  "tie takes generation branch"},
    {0, 300*ms, 300*ms, 600*ms,        200*ms, 500*ms, 650*ms, 950*ms,      0,      "tie, negative generation gap"},
    {0, 300*ms, 300*ms, 600*ms,        900*ms, 1200*ms, 1200*ms, 1500*ms,   600*ms, "tie, both gaps positive"},
    {0, 300001, 300001, 600001,        350000, 650000, 700000, 1000000,     49999,  "gen-dominated by one tick"},
    {0, 200*ms, 200*ms, 1200*ms,       1000*ms, 1200*ms, 1200*ms, 2200*ms,  0,      "exec-dominated perfect overlap"},
    {0, 200*ms, 200*ms, 1200*ms,       1100*ms, 1300*ms, 1300*ms, 2300*ms,  100*ms, "exec-dominated 100 ms stall"},
    {0, 200*ms, 200*ms, 1200*ms,       1500*ms, 1700*ms, 1700*ms, 2700*ms,  500*ms, "exec-dominated 500 ms stall"},
    {0, 100*ms, 100*ms, 1700*ms,       1500*ms, 1600*ms, 1700*ms, 2000*ms,  0,      "exec-dominated early delivery"},
    {0, 100*ms, 100*ms, 1700*ms,       1800*ms, 1900*ms, 1900*ms, 2200*ms,  200*ms, "exec-dominated late request"},
    {0, 300000, 300000, 600001,        350000, 650000, 700000, 1000000,     99999,  "exec-dominated by one tick"},
    {0, 200*ms, 300*ms, 1300*ms,       1250*ms, 1450*ms, 1450*ms, 1550*ms,  150*ms, "exec-dominated after delivery gap"},
    {0, 200*ms, 200*ms, 1200*ms,       200*ms, 400*ms, 1200*ms, 1300*ms,    0,      "exec-dominated ignores early generation"},
    {0, 150*ms, 150*ms, 1150*ms,       983333, 1133333, 1150*ms, 2150*ms,   0,      "just-in-time async round"},
    {0, 150*ms, 150*ms, 250*ms,        300*ms, 450*ms, 450*ms, 550*ms,      150*ms, "queued behind one batch"},
    {0, 0, 0, 100*ms,                  100*ms, 100*ms, 300*ms, 400*ms,      200*ms, "zero-length generation"},
    {0, 100*ms, 100*ms, 100*ms,        250*ms, 350*ms, 350*ms, 350*ms,      150*ms, "zero-length execution"},
  };
  // clang-format on
  int misses = 0;
  std::int64_t expected_total = 0;
  for (const Quad& q : quads) {
    const RoundTimeline cur{0, {at_us(q.g0), at_us(q.g1)}, {at_us(q.e0), at_us(q.e1)}, 1};
    const RoundTimeline next{1, {at_us(q.ng0), at_us(q.ng1)}, {at_us(q.ne0), at_us(q.ne1)}, 1};
    const std::int64_t lib = round_wait(cur, next).count();
    const std::int64_t orc = oracle::round_wait_us(q.g0, q.g1, q.e0, q.e1, q.ng0, q.ne0);
    if (lib != q.expected || orc != q.expected) {
      ++misses;
      v.require(false, fmt("%s: library %lld oracle %lld hand %lld", q.what, static_cast<long long>(lib),
                           static_cast<long long>(orc), static_cast<long long>(q.expected)));
    }
    expected_total += q.expected;
  }
  v.require(misses == 0, fmt("%d of %zu fixtures", misses, quads.size()));

  // Ledger arithmetic: a task whose rounds are exactly the fixtures' pairs.
  WaitLedger ledger;
  for (const Quad& q : quads) {
    const RoundTimeline a{0, {at_us(q.g0), at_us(q.g1)}, {at_us(q.e0), at_us(q.e1)}, 1};
    const RoundTimeline b{1, {at_us(q.ng0), at_us(q.ng1)}, {at_us(q.ne0), at_us(q.ne1)}, 1};
    const WaitLedger l = ledger_from({a, b});
    ledger.waits.push_back(l.total);
    ledger.total += l.total;
  }
  v.require(ledger.total.count() == expected_total, "ledger total equals the sum of hand-computed waits");

  v.require(wait_ratio(WaitLedger{{}, Duration{500'000}}, at_us(0), at_us(2'000'000)) == 0.25, "500 ms over 2 s is 0.25");
  v.require(wait_ratio(WaitLedger{{}, Duration{1}}, at_us(7), at_us(11)) == 0.25, "1 us over 4 us is 0.25");
  v.require(wait_ratio(WaitLedger{{}, Duration{0}}, at_us(0), at_us(1)) == 0.0, "zero wait is 0");
  v.require(wait_ratio(WaitLedger{{}, Duration{3}}, at_us(0), at_us(2)) == 1.0, "wait above lifetime clamps to 1");
  v.require(wait_ratio(WaitLedger{{}, Duration{1}}, at_us(0), at_us(3)) == 1.0 / 3.0, "1/3 is exact in double");

  // Record-by-record ledger: 100 + 300 + 200 ms.
  TaskState t;
  t.task_id = "ledger";
  record_round(t, {0, {at_us(0), at_us(500'000)}, {at_us(500'000), at_us(600'000)}, 3});
  record_round(t, {1, {at_us(600'000), at_us(1'100'000)}, {at_us(1'100'000), at_us(1'200'000)}, 3});
  record_round(t, {2, {at_us(1'400'000), at_us(1'500'000)}, {at_us(1'500'000), at_us(2'500'000)}, 30});
  record_round(t, {3, {at_us(2'600'000), at_us(2'700'000)}, {at_us(2'700'000), at_us(2'800'000)}, 3});
  v.require(t.waits.total == Duration{100'000 + 300'000 + 200'000},
            fmt("record_round ledger %lld us", static_cast<long long>(t.waits.total.count())));
  v.note(fmt("%zu interval quadruples", quads.size()));
  return v;
}

// ---------------------------------------------------------------------------

Verdict scheduling_oracle() {
  Verdict v;
  // Execution time per round, in half units of one generation.
  const std::vector<oracle::SyncTask> tasks = {{{6, 2, 1}}, {{3, 2}}, {{8, 2, 2}}, {{8, 3, 1}}};
  const auto all = oracle::enumerate_schedules(tasks);
  const auto wait_of = [&](SchedulingPolicy p) { return all.at(oracle::planner_schedule(tasks, p)); };
  const std::int64_t k = wait_of(SchedulingPolicy::kairos);
  const std::int64_t f = wait_of(SchedulingPolicy::fifo);
  const std::int64_t l = wait_of(SchedulingPolicy::las);
  std::int64_t best = INT64_MAX, worst = 0;
  for (const auto& [order, w] : all) {
    best = std::min(best, w);
    worst = std::max(worst, w);
  }
  v.require(k < f, "kairos wait below fifo");
  v.require(k < l, "kairos wait below las");
  v.note(fmt("%zu schedules enumerated; total wait kairos %.1f, fifo %.1f, las %.1f units (best %.1f, worst %.1f)",
             all.size(), k / 2.0, f / 2.0, l / 2.0, best / 2.0, worst / 2.0));
  return v;
}

// ---------------------------------------------------------------------------

// Direct planning loop: each round a stream of fresh high-wait-ratio requests
// with the longest execution estimate arrives and now and then a low-wait-ratio
// request with the shortest estimate joins. Three loads: total arrivals equal to
// the capacity (the adversary yields its slot in rounds a victim joins), an
// adversary stream at capacity with victims on top, and a stream one above
// capacity. Estimates span the 10..50 action
// horizons at 30 Hz. A request's bound is A*B plus the pending count in the
// round it joined.
Verdict starvation_freedom() {
  Verdict v;
  const Duration emin = exec_duration(10, 30), emax = exec_duration(50, 30);
  const EngineProfile edge(Tier::edge, {{1, Duration{200'000}}, {8, Duration{400'000}}}, 8, 8);
  for (auto [B, A] : std::vector<std::pair<int, int>>{{10, 5}, {5, 3}, {2, 1}}) {
   for (const int load : {0, 1, 2}) {
    static const char* const kLoadName[] = {"at-capacity", "stream-at-capacity", "overload"};
    std::mt19937_64 rng(static_cast<std::uint64_t>(B * 100 + A + load));
    long worst_excess = LONG_MIN;
    int worst_deferral = 0;
    std::size_t worst_pending = 0;
    for (int scenario = 0; scenario < 200; ++scenario) {
      SchedulerConfig cfg;
      cfg.buckets = B;
      cfg.aging = A;
      const int cap = std::uniform_int_distribution<int>(1, 3)(rng);
      const int stream = cap + (load == 2 ? 1 : 0);
      const int victim_every = std::uniform_int_distribution<int>(2, 9)(rng);
      TaskDirectory dir;
      struct Entry {
        PendingRequest req;
        std::size_t pending_at_join;
      };
      std::vector<Entry> pending;
      int next_id = 0;
      for (int round = 0; round < 150; ++round) {
        const TimePoint now = at_us(10'000'000 + round * 100'000);
        const std::size_t before = pending.size();
        auto add = [&](double wr, Duration exec) {
          TaskState st;
          st.task_id = "t" + std::to_string(next_id++);
          st.control_hz = 30;
          st.waits.total = Duration{static_cast<std::int64_t>(wr * 10'000'000)};
          st.timelines.push_back(RoundTimeline{0, {at_us(0), at_us(1)}, {at_us(1), at_us(1) + exec}, 1});
          PendingRequest r;
          r.task_id = st.task_id;
          r.round_id = 1;
          r.issued_at = r.arrived_at = r.obs_captured_at = now;
          dir.emplace(st.task_id, std::move(st));
          pending.push_back({r, 0});
        };
        const bool victim = round % victim_every == 0;
        const int adversaries = stream - (victim && load == 0 ? 1 : 0);
        for (int i = 0; i < adversaries; ++i) add(std::uniform_real_distribution<double>(0.9, 1.0)(rng), emax);
        if (victim) add(std::uniform_real_distribution<double>(0.0, 0.1)(rng), emin);
        for (std::size_t i = before; i < pending.size(); ++i) pending[i].pending_at_join = pending.size();

        std::vector<PendingRequest> reqs;
        std::map<std::string, std::size_t> joined;
        for (const Entry& e : pending) {
          reqs.push_back(e.req);
          joined[e.req.task_id] = e.pending_at_join;
        }
        PlacementContext ctx;
        ctx.edge = TierPlacement{&edge, cap, Duration{0}};
        const DispatchPlan dp = plan(reqs, dir, ctx, now, cfg);
        for (const PlannedRequest& p : dp.edge) {
          const auto it = std::find_if(pending.begin(), pending.end(),
                                       [&](const Entry& e) { return e.req.task_id == p.request.task_id; });
          const long excess = static_cast<long>(it->req.skipped) - static_cast<long>(A * B + it->pending_at_join);
          if (excess > worst_excess) {
            worst_excess = excess;
            worst_deferral = it->req.skipped;
            worst_pending = it->pending_at_join;
          }
        }
        std::vector<Entry> rest;
        for (const PendingRequest& d : dp.deferred) rest.push_back({d, joined.at(d.task_id)});
        pending = std::move(rest);
      }
      // Requests still waiting have been deferred at least this often.
      for (const Entry& e : pending) {
        const long excess = static_cast<long>(e.req.skipped) - static_cast<long>(A * B + e.pending_at_join);
        if (excess > worst_excess) {
          worst_excess = excess;
          worst_deferral = e.req.skipped;
          worst_pending = e.pending_at_join;
        }
      }
    }
    const std::string line = fmt("(B=%d,A=%d) %s worst %d deferrals vs bound %zu", B, A,
                                 kLoadName[load], worst_deferral,
                                 static_cast<std::size_t>(A * B) + worst_pending);
    if (worst_excess <= 0) {
      v.note(line);
    } else {
      v.require(false, line);
    }
   }
  }
  return v;
}

// ---------------------------------------------------------------------------

// Client-side replay of one trace against an engine that always answers after
// `gen`: the timeline the synthesizer assumes.
Duration isolated_latency(const TaskTrace& t, Duration gen) {
  TimePoint deliver = TimePoint{} + gen;
  TimePoint prev_end{};
  for (std::size_t r = 0; r < t.rounds.size(); ++r) {
    const TimePoint start = r == 0 ? deliver : std::max(deliver, prev_end);
    const TimePoint end = start + exec_duration(t.rounds[r].horizon, t.control_hz);
    if (r + 1 < t.rounds.size())
      deliver = start + exec_duration(t.rounds[r + 1].trigger_action_index, t.control_hz) + gen;
    prev_end = end;
  }
  return prev_end - TimePoint{};
}

Verdict contention_free() {
  Verdict v;
  SyntheticSpec spec;
  spec.task_count = 100;
  const auto traces = synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 10));
  const Duration gen{150'000};
  SimConfig cfg;
  cfg.edge = EngineProfile(Tier::edge, {{1, gen}, {100, gen}}, 100, 100, 100);
  cfg.edge_link = NetworkModel::ideal();
  const auto arrivals = poisson_arrivals(4.0, 100, 7);
  const SimResult res = run(traces, arrivals, cfg);
  int off = 0;
  std::int64_t worst = 0;
  std::size_t rounds = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto n = static_cast<std::int64_t>(traces[i].rounds.size());
    rounds += traces[i].rounds.size();
    const std::int64_t diff = std::llabs((res.outcomes[i].latency - isolated_latency(traces[i], gen)).count());
    worst = std::max(worst, diff);
    if (diff > n || res.outcomes[i].wait_total.count() > n) ++off;
  }
  v.require(off == 0, fmt("%d tasks outside one tick per round", off));
  v.note(fmt("100 tasks, %zu rounds, worst latency deviation %lld us", rounds, static_cast<long long>(worst)));
  return v;
}

// ---------------------------------------------------------------------------

Verdict trend_reproduction() {
  Verdict v;
  constexpr int kSeeds = 20;
  struct Point {
    LoadMode mode;
    double rate;
    int fleet;
  };
  const std::vector<Point> rate_points{{LoadMode::rate, 0.5, 1}, {LoadMode::rate, 1, 1}, {LoadMode::rate, 2, 1},
                                       {LoadMode::rate, 4, 1}};
  const std::vector<Point> fleet_points{{LoadMode::fleet, 1, 10}, {LoadMode::fleet, 1, 50}, {LoadMode::fleet, 1, 100}};
  std::vector<Point> points = rate_points;
  points.insert(points.end(), fleet_points.begin(), fleet_points.end());

  // avg[point][policy][seed]
  std::vector<std::array<std::vector<double>, 3>> avg(points.size());
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticSpec spec;
    spec.task_count = 100;
    spec.seed = static_cast<std::uint64_t>(seed);
    const auto dynamic = synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 10));
    const auto task_static = synthesize_family(spec, PerTaskStaticHorizon{});
    std::vector<CellSpec> kairos_cells, baseline_cells;
    for (const Point& p : points) {
      kairos_cells.push_back({SchedulingPolicy::kairos, p.mode, p.rate, p.fleet, static_cast<std::uint64_t>(seed)});
      baseline_cells.push_back({SchedulingPolicy::fifo, p.mode, p.rate, p.fleet, static_cast<std::uint64_t>(seed)});
      baseline_cells.push_back({SchedulingPolicy::las, p.mode, p.rate, p.fleet, static_cast<std::uint64_t>(seed)});
    }
    const auto k = run_cells(dynamic, kairos_cells, calibrated_config(), jobs());
    const auto b = run_cells(task_static, baseline_cells, calibrated_config(), jobs());
    for (std::size_t i = 0; i < points.size(); ++i) {
      avg[i][0].push_back(k[i].summary.avg_us);
      avg[i][1].push_back(b[2 * i].summary.avg_us);
      avg[i][2].push_back(b[2 * i + 1].summary.avg_us);
    }
  }
  auto mean = [](const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); };
  auto label = [](const Point& p) { return p.mode == LoadMode::rate ? fmt("rate=%g", p.rate) : fmt("fleet=%d", p.fleet); };
  std::vector<std::array<double, 2>> gap(points.size());
  std::string table;
  for (std::size_t i = 0; i < points.size(); ++i) {
    int ok = 0;
    for (int s = 0; s < kSeeds; ++s) {
      const auto si = static_cast<std::size_t>(s);
      if (avg[i][0][si] <= avg[i][1][si] && avg[i][0][si] <= avg[i][2][si]) ++ok;
    }
    v.require(ok * 100 >= 95 * kSeeds, fmt("%s ordering on %d/%d seeds", label(points[i]).c_str(), ok, kSeeds));
    const double k = mean(avg[i][0]);
    gap[i] = {(mean(avg[i][1]) - k) / mean(avg[i][1]), (mean(avg[i][2]) - k) / mean(avg[i][2])};
    table += fmt("%s%s %d/%d gap fifo %.1f%% las %.1f%%", table.empty() ? "" : ", ", label(points[i]).c_str(), ok,
                 kSeeds, 100 * gap[i][0], 100 * gap[i][1]);
  }
  const std::size_t r_lo = 0, r_hi = rate_points.size() - 1;
  const std::size_t f_lo = rate_points.size(), f_hi = points.size() - 1;
  for (int b = 0; b < 2; ++b) {
    const char* name = b == 0 ? "fifo" : "las";
    v.require(gap[r_hi][static_cast<std::size_t>(b)] > gap[r_lo][static_cast<std::size_t>(b)],
              fmt("gap to %s widens from lowest to highest rate", name));
    v.require(gap[f_hi][static_cast<std::size_t>(b)] > gap[f_lo][static_cast<std::size_t>(b)],
              fmt("gap to %s widens from fleet 10 to fleet 100", name));
  }
  v.note(table);
  return v;
}

// ---------------------------------------------------------------------------

Verdict hybrid_placement() {
  Verdict v;
  SyntheticSpec spec;
  spec.task_count = 100;
  const auto traces = synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 10));
  const EngineProfile fast_cloud(Tier::cloud, {{1, Duration{20'000}}, {8, Duration{40'000}}}, 8, 8, 4);

  // One robot at a time: the edge is idle whenever a request is planned.
  SimConfig idle = calibrated_config();
  idle.cloud = fast_cloud;
  const auto lone = run_cell(std::span(traces).first(20), {SchedulingPolicy::kairos, LoadMode::fleet, 1, 1, 1}, idle);
  v.require(lone.summary.offload_fraction == 0.0, fmt("idle edge offload %.3f", lone.summary.offload_fraction));

  const CellSpec busy{SchedulingPolicy::kairos, LoadMode::fleet, 1, 100, 1};
  const auto saturated = run_cell(traces, busy, idle);
  v.require(saturated.summary.offload_fraction > 0.0, "saturated edge with a fast cloud offloads");
  const auto edge_only = run_cell(traces, busy, calibrated_config());
  v.require(edge_only.summary.offload_fraction == 0.0, "cloud disabled gives offload 0");
  v.note(fmt("saturated offload %.3f", saturated.summary.offload_fraction));

  // Cloud with half the edge's compute latency behind a 100 ms WAN.
  const EngineProfile cloud(
      Tier::cloud, {{1, Duration{100'000}}, {2, Duration{115'000}}, {4, Duration{145'000}}, {8, Duration{210'000}}}, 8, 8);
  SimConfig edge_cfg = calibrated_config();
  SimConfig cloud_cfg = calibrated_config();
  cloud_cfg.edge.reset();
  cloud_cfg.cloud = cloud;
  SimConfig hybrid_cfg = calibrated_config();
  hybrid_cfg.cloud = cloud;
  for (const CellSpec& c : {CellSpec{SchedulingPolicy::kairos, LoadMode::rate, 0.5, 1, 1},
                            CellSpec{SchedulingPolicy::kairos, LoadMode::rate, 2, 1, 1},
                            CellSpec{SchedulingPolicy::kairos, LoadMode::fleet, 1, 50, 1}}) {
    double e = 0, cl = 0, h = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CellSpec cell = c;
      cell.seed = seed;
      SyntheticSpec s = spec;
      s.seed = seed;
      const auto fam = synthesize_family(s, HorizonPolicyConfig::confidence(0.4, 10));
      e += run_cell(fam, cell, edge_cfg).summary.avg_us / 5;
      cl += run_cell(fam, cell, cloud_cfg).summary.avg_us / 5;
      h += run_cell(fam, cell, hybrid_cfg).summary.avg_us / 5;
    }
    const std::string what = fmt("%s edge %.2fs cloud %.2fs hybrid %.2fs", c.load_label().c_str(), e / 1e6, cl / 1e6, h / 1e6);
    if (h <= e && h <= cl) {
      v.note(what);
    } else {
      v.require(false, what);
    }
  }
  return v;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const fs::path dir = fs::temp_directory_path() / ("kairos_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  std::ostringstream out, err;
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "kairos");
    return run_cli(args, out, err);
  };
  if (cli({"gen-traces", "--tasks", "40", "--out", (dir / "traces").string()}) != 0) {
    v.require(false, "gen-traces: " + err.str());
    return v;
  }
  std::random_device rd;
  std::mt19937_64 rng(rd());
  const std::vector<std::string> schedulers{"kairos", "fifo", "las"};
  for (int c = 0; c < 3; ++c) {
    const std::string sched = schedulers[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
    const bool fleet = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    const std::string load = fleet ? std::to_string(std::uniform_int_distribution<int>(1, 40)(rng))
                                   : fmt("%g", std::uniform_int_distribution<int>(1, 40)(rng) / 10.0);
    const std::string seed = std::to_string(std::uniform_int_distribution<int>(1, 1'000'000)(rng));
    const std::string cell = sched + (fleet ? " fleet=" : " rate=") + load + " seed=" + seed;
    std::vector<std::string> files;
    for (const char* run : {"a", "b"}) {
      const int rc = cli({"run", "--traces", (dir / "traces").string(), "--scheduler", sched, fleet ? "--fleet" : "--rate",
                          load, "--seed", seed, "--events", "--no-timestamp", "--out", (dir / cell / run).string()});
      v.require(rc == 0, cell + ": " + err.str());
    }
    for (const auto& entry : fs::directory_iterator(dir / cell / "a")) {
      const fs::path other = dir / cell / "b" / entry.path().filename();
      v.require(slurp(entry.path()) == slurp(other), cell + ": " + entry.path().filename().string() + " differs");
      files.push_back(entry.path().filename().string());
    }
    v.require(files.size() == 3, cell + ": expected results.csv, summary.json and one event log");
    v.note(cell);
  }
  fs::remove_all(dir);
  return v;
}

// ---------------------------------------------------------------------------

Verdict trace_roundtrip() {
  Verdict v;
  SyntheticSpec spec;
  spec.task_count = 500;
  spec.seed = 31;
  auto traces = synthesize_family(spec, HorizonPolicyConfig::confidence(0.4, 5));
  spec.action_dim = 7;
  spec.seed = 32;
  for (auto& t : synthesize_family(spec, PerTaskStaticHorizon{})) {
    t.task_id += "-traj";
    traces.push_back(std::move(t));
  }
  const fs::path dir = fs::temp_directory_path() / ("kairos_acceptance_traces_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path file = dir / "traces.jsonl";
  store_traces(traces, file);
  v.require(load_traces(file) == traces, "store then load is the identity on 1000 traces");

  // Hand corruptions of line 18 of the stored file.
  std::vector<std::string> lines;
  {
    std::ifstream in(file);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  constexpr std::size_t kLine = 17;
  const std::string victim_id = traces[kLine].task_id;
  using nlohmann::json;
  struct Corruption {
    const char* what;
    std::function<void(json&)> edit;
    int round;
    const char* message;
  };
  const std::vector<Corruption> corruptions = {
      {"trigger at previous horizon",
       [](json& j) { j["rounds"][2]["trigger_action_index"] = j["rounds"][1]["horizon"]; }, 2,
       "outside previous horizon"},
      {"negative trigger", [](json& j) { j["rounds"][1]["trigger_action_index"] = -1; }, 1,
       "outside previous horizon"},
      {"round 0 trigger", [](json& j) { j["rounds"][0]["trigger_action_index"] = 1; }, 0,
       "round 0 trigger_action_index"},
      {"horizon 0", [](json& j) { j["rounds"][1]["horizon"] = 0; }, 1, "horizon must lie in [1, chunk_size]"},
      {"horizon above chunk", [](json& j) { j["rounds"][1]["horizon"] = j["rounds"][1]["chunk_size"].get<int>() + 1; },
       1, "horizon must lie in [1, chunk_size]"},
      {"round id gap", [](json& j) { j["rounds"][2]["round_id"] = 3; }, 3, "contiguous"},
      {"no rounds", [](json& j) { j["rounds"] = json::array(); }, -1, "no rounds"},
      {"magnitudes width",
       [](json& j) {
         for (auto& row : j["rounds"][1]["update_magnitudes"]) row.erase(row.size() - 1);
       },
       1, "update_magnitudes width"},
      {"ragged magnitudes", [](json& j) { j["rounds"][1]["update_magnitudes"][0].erase(0); }, 1, "ragged"},
      {"negative magnitude", [](json& j) { j["rounds"][0]["update_magnitudes"][0][0] = -0.5; }, 0, "non-negative"},
      {"zero control rate", [](json& j) { j["control_hz"] = 0; }, -1, "control_hz"},
      {"negative payload", [](json& j) { j["obs_payload_bytes"] = -1; }, -1, "payload"},
  };
  int rejected = 0;
  auto expect_rejection = [&](const std::string& what, const std::string& line, int round, const std::string& message,
                              const std::string& task) {
    std::vector<std::string> copy = lines;
    copy[kLine] = line;
    {
      std::ofstream f(file, std::ios::trunc);
      for (const auto& l : copy) f << l << '\n';
    }
    try {
      load_traces(file);
      v.require(false, what + " accepted");
    } catch (const TraceError& e) {
      const std::string msg = e.what();
      const bool ok = e.line() == kLine + 1 && e.round_id() == round && e.task_id() == task &&
                      msg.find(message) != std::string::npos && msg.find("line 18") != std::string::npos;
      v.require(ok, what + ": " + msg);
      if (ok) ++rejected;
    }
  };
  for (const Corruption& c : corruptions) {
    json j = json::parse(lines[kLine]);
    c.edit(j);
    expect_rejection(c.what, j.dump(), c.round, c.message, victim_id);
  }
  expect_rejection("truncated record", lines[kLine].substr(0, lines[kLine].size() / 2), -1, "malformed trace record", "");
  expect_rejection("not an object", "[1, 2, 3]", -1, "malformed trace record", "");
  expect_rejection("missing field", R"({"task_id": "x", "control_hz": 30})", -1, "malformed trace record", "");
  v.note(fmt("1000 traces round-tripped; %d corruptions rejected with line, task and round", rejected));
  fs::remove_all(dir);
  return v;
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_s;  // 0: no runtime bound
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "horizon policy exactness", 10, horizon_exactness},
      {"AC2", "wait accounting exactness", 0, wait_exactness},
      {"AC3", "scheduling example oracle", 5, scheduling_oracle},
      {"AC4", "starvation freedom", 30, starvation_freedom},
      {"AC5", "contention-free equivalence", 0, contention_free},
      {"AC6", "qualitative trend reproduction", 600, trend_reproduction},
      {"AC7", "hybrid placement sanity", 0, hybrid_placement},
      {"AC8", "determinism", 0, determinism},
      {"AC9", "trace round-trip and validation", 0, trace_roundtrip},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0) v.require(secs < c.limit_s, fmt("runtime %.1fs over %.0fs", secs, c.limit_s));
    if (!v.pass) ++failed;
    std::printf("%s %s %s (%.2fs): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
