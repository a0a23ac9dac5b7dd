#include "kairos/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace kairos {

std::string CellSpec::load_label() const {
  char buf[64];
  if (mode == LoadMode::fleet) {
    std::snprintf(buf, sizeof buf, "fleet=%d", fleet);
  } else {
    std::snprintf(buf, sizeof buf, "rate=%g", rate_per_sec);
  }
  return buf;
}

std::int64_t nearest_rank(std::vector<std::int64_t> values, double p) {
  if (values.empty()) throw std::invalid_argument("nearest_rank: empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("nearest_rank: p must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // The 1e-9 keeps exact ranks such as 25% of 100 from rounding up.
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

LatencySummary summarize(std::span<const TaskOutcome> tasks) {
  LatencySummary s;
  s.tasks = tasks.size();
  if (tasks.empty()) return s;
  std::vector<std::int64_t> lat;
  std::int64_t rounds = 0;
  std::int64_t offloaded = 0;
  long double sum = 0;
  for (const TaskOutcome& t : tasks) {
    lat.push_back(t.latency.count());
    sum += t.latency.count();
    rounds += t.total_rounds;
    offloaded += t.offloaded_rounds;
    s.wait_total_us += t.wait_total.count();
    s.stall_total_us += t.stall_total.count();
  }
  s.avg_us = static_cast<double>(sum / static_cast<long double>(tasks.size()));
  s.p25_us = nearest_rank(lat, 25);
  s.p90_us = nearest_rank(lat, 90);
  s.p95_us = nearest_rank(lat, 95);
  s.offload_fraction = rounds == 0 ? 0.0 : static_cast<double>(offloaded) / static_cast<double>(rounds);
  return s;
}

ExperimentResult run_cell(std::span<const TaskTrace> traces, const CellSpec& cell, SimConfig cfg) {
  cfg.scheduler.policy = cell.scheduler;
  cfg.seed = cell.seed;
  SimResult sim;
  if (cell.mode == LoadMode::fleet) {
    sim = run_fleet(traces, cell.fleet, cfg);
  } else {
    const auto arrivals = poisson_arrivals(cell.rate_per_sec, static_cast<int>(traces.size()), cell.seed);
    sim = run(traces, arrivals, cfg);
  }
  ExperimentResult r;
  r.cell = cell;
  r.config = std::move(cfg);
  r.summary = summarize(sim.outcomes);
  r.tasks = std::move(sim.outcomes);
  r.events = std::move(sim.events);
  return r;
}

std::vector<ExperimentResult> run_cells(std::span<const TaskTrace> traces, std::span<const CellSpec> cells,
                                        const SimConfig& cfg, int jobs) {
  std::vector<std::optional<ExperimentResult>> slots(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        slots[i] = run_cell(traces, cells[i], cfg);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(n, cells.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<ExperimentResult> out;
  out.reserve(cells.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void write_results_csv(std::span<const ExperimentResult> results, std::ostream& out,
                       const std::optional<std::string>& timestamp) {
  if (timestamp) out << "# generated_at " << *timestamp << '\n';
  out << "task_id,scheduler,rate_or_fleet,latency_us,wait_us,offloaded_rounds,total_rounds\n";
  for (const ExperimentResult& r : results) {
    const std::string sched(to_string(r.cell.scheduler));
    const std::string load = r.cell.load_label();
    for (const TaskOutcome& t : r.tasks) {
      out << t.task_id << ',' << sched << ',' << load << ',' << t.latency.count() << ',' << t.wait_total.count()
          << ',' << t.offloaded_rounds << ',' << t.total_rounds << '\n';
    }
  }
}

std::string summary_json(std::span<const ExperimentResult> results) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const ExperimentResult& r : results) {
    const LatencySummary& s = r.summary;
    cells.push_back({{"scheduler", to_string(r.cell.scheduler)},
                     {"load", r.cell.load_label()},
                     {"seed", r.cell.seed},
                     {"tasks", s.tasks},
                     {"avg_us", s.avg_us},
                     {"p25_us", s.p25_us},
                     {"p90_us", s.p90_us},
                     {"p95_us", s.p95_us},
                     {"offload_fraction", s.offload_fraction},
                     {"wait_total_us", s.wait_total_us},
                     {"stall_total_us", s.stall_total_us},
                     {"buckets", r.config.scheduler.buckets},
                     {"aging", r.config.scheduler.aging},
                     {"edge", r.config.edge.has_value()},
                     {"cloud", r.config.cloud.has_value()}});
  }
  nlohmann::ordered_json j;
  j["percentile_method"] = "nearest-rank";
  j["cells"] = std::move(cells);
  return j.dump(2);
}

namespace {

double mean_horizon(std::span<const TaskTrace> traces, const HorizonPolicyConfig& policy) {
  std::int64_t sum = 0;
  std::int64_t n = 0;
  for (const TaskTrace& t : traces) {
    for (const RoundRecord& r : t.rounds) {
      sum += decide_horizon(policy, *r.update_magnitudes);
      ++n;
    }
  }
  return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n);
}

}  // namespace

std::vector<ParetoRow> pareto_rows(std::span<const TaskTrace> traces, std::span<const int> static_horizons,
                                   std::span<const double> thresholds, int min_horizon) {
  if (traces.empty()) throw std::invalid_argument("pareto: no traces");
  for (const TaskTrace& t : traces) {
    for (const RoundRecord& r : t.rounds) {
      if (!r.update_magnitudes)
        throw std::invalid_argument("pareto: trace " + t.task_id + " round " + std::to_string(r.round_id) +
                                    " has no update magnitudes");
    }
  }
  const auto successes = std::count_if(traces.begin(), traces.end(), [](const TaskTrace& t) { return t.success; });
  const double success = static_cast<double>(successes) / static_cast<double>(traces.size());

  std::vector<ParetoRow> rows;
  for (int h : static_horizons)
    rows.push_back({"static", static_cast<double>(h), mean_horizon(traces, HorizonPolicyConfig::fixed(h)), success});
  for (double t : thresholds)
    rows.push_back(
        {"confidence", t, mean_horizon(traces, HorizonPolicyConfig::confidence(t, min_horizon)), success});
  return rows;
}

void write_pareto_csv(std::span<const ParetoRow> rows, std::ostream& out) {
  out << "policy,parameter,mean_horizon,success_fraction\n";
  char buf[160];
  for (const ParetoRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%.6f,%.6f\n", r.policy.c_str(), r.parameter, r.mean_horizon,
                  r.success_fraction);
    out << buf;
  }
}

}  // namespace kairos
