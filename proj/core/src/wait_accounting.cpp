#include "kairos/wait_accounting.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kairos {

namespace {

void check_timeline(const RoundTimeline& r) {
  if (!r.generation.well_formed() || !r.execution.well_formed()) {
    throw std::invalid_argument("round " + std::to_string(r.round_id) + ": malformed interval");
  }
  if (r.execution.start < r.generation.end) {
    throw std::invalid_argument("round " + std::to_string(r.round_id) +
                                ": execution starts before generation ends");
  }
}

}  // namespace

Duration round_wait(const Interval& gen, const Interval& exec, const Interval& next_gen,
                    const Interval& next_exec) {
  if (!gen.well_formed() || !exec.well_formed() || !next_gen.well_formed() ||
      !next_exec.well_formed()) {
    throw std::invalid_argument("round_wait: malformed interval");
  }
  if (next_gen.start < gen.start || next_exec.start < exec.start) {
    throw std::invalid_argument("round_wait: intervals out of round order");
  }
  const Duration gap = gen.length() >= exec.length() ? next_gen.start - gen.end
                                                     : next_exec.start - exec.end;
  return std::max(gap, Duration{0});
}

Duration round_wait(const RoundTimeline& current, const RoundTimeline& next) {
  if (next.round_id != current.round_id + 1) {
    throw std::invalid_argument("round_wait: rounds " + std::to_string(current.round_id) + " and " +
                                std::to_string(next.round_id) + " are not consecutive");
  }
  return round_wait(current.generation, current.execution, next.generation, next.execution);
}

double wait_ratio(const WaitLedger& ledger, TimePoint t_start, TimePoint now) {
  if (now <= t_start) throw std::invalid_argument("wait_ratio: now must be after t_start");
  const double ratio = static_cast<double>(ledger.total.count()) /
                       static_cast<double>((now - t_start).count());
  return std::clamp(ratio, 0.0, 1.0);
}

void record_round(TaskState& task, const RoundTimeline& round) {
  const int expected = task.timelines.empty() ? 0 : task.timelines.back().round_id + 1;
  if (round.round_id != expected) {
    throw std::invalid_argument("task " + task.task_id + ": expected round " +
                                std::to_string(expected) + ", got " +
                                std::to_string(round.round_id));
  }
  check_timeline(round);
  if (!task.timelines.empty()) {
    const Duration w = round_wait(task.timelines.back(), round);
    task.waits.waits.push_back(w);
    task.waits.total += w;
  }
  task.timelines.push_back(round);
}

WaitLedger ledger_from(const std::vector<RoundTimeline>& timelines) {
  WaitLedger ledger;
  for (std::size_t j = 0; j + 1 < timelines.size(); ++j) {
    const Duration w = round_wait(timelines[j], timelines[j + 1]);
    ledger.waits.push_back(w);
    ledger.total += w;
  }
  return ledger;
}

}  // namespace kairos
