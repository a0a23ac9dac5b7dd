#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kairos/scheduler.hpp"
#include "kairos/simulator.hpp"
#include "kairos/workload.hpp"

namespace kairos {

enum class LoadMode { rate, fleet };

/// One point of a sweep.
struct CellSpec {
  SchedulingPolicy scheduler = SchedulingPolicy::kairos;
  LoadMode mode = LoadMode::rate;
  double rate_per_sec = 1.0;  // Poisson task arrivals, rate mode
  int fleet = 1;              // concurrent robots, fleet mode
  std::uint64_t seed = 1;

  /// "rate=<r>" or "fleet=<n>"; the CSV rate_or_fleet column.
  std::string load_label() const;
};

struct LatencySummary {
  std::size_t tasks = 0;
  double avg_us = 0.0;
  std::int64_t p25_us = 0;
  std::int64_t p90_us = 0;
  std::int64_t p95_us = 0;
  double offload_fraction = 0.0;  // offloaded rounds / all rounds
  std::int64_t wait_total_us = 0;
  std::int64_t stall_total_us = 0;
};

struct ExperimentResult {
  CellSpec cell;
  SimConfig config;
  std::vector<TaskOutcome> tasks;
  LatencySummary summary;
  std::vector<Event> events;
};

/// Smallest value with at least p% of the sample at or below it.
/// Throws std::invalid_argument on an empty sample or p outside (0, 100].
std::int64_t nearest_rank(std::vector<std::int64_t> values, double p);

LatencySummary summarize(std::span<const TaskOutcome> tasks);

/// Runs one cell. `cfg.scheduler.policy` and `cfg.seed` are overridden by the
/// cell; rate-mode arrivals are drawn from the cell seed.
ExperimentResult run_cell(std::span<const TaskTrace> traces, const CellSpec& cell, SimConfig cfg);

/// Runs independent cells on up to `jobs` threads; results keep cell order.
std::vector<ExperimentResult> run_cells(std::span<const TaskTrace> traces, std::span<const CellSpec> cells,
                                        const SimConfig& cfg, int jobs);

/// Header plus one row per task per result. A "# generated_at" line comes
/// first when `timestamp` is set.
void write_results_csv(std::span<const ExperimentResult> results, std::ostream& out,
                       const std::optional<std::string>& timestamp = std::nullopt);

/// {"cells": [{scheduler, load, seed, tasks, avg_us, p25_us, p90_us, p95_us,
/// offload_fraction, ...}]}
std::string summary_json(std::span<const ExperimentResult> results);

struct ParetoRow {
  std::string policy;  // "static" or "confidence"
  double parameter = 0.0;
  double mean_horizon = 0.0;
  double success_fraction = 0.0;

  friend bool operator==(const ParetoRow&, const ParetoRow&) = default;
};

/// One row per static horizon, then one per threshold, re-deciding every
/// recorded round's horizon from its update magnitudes. Throws
/// std::invalid_argument naming the first trace whose round lacks magnitudes.
std::vector<ParetoRow> pareto_rows(std::span<const TaskTrace> traces, std::span<const int> static_horizons,
                                   std::span<const double> thresholds, int min_horizon);

void write_pareto_csv(std::span<const ParetoRow> rows, std::ostream& out);

}  // namespace kairos
