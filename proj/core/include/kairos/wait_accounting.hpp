#pragma once

#include "kairos/task.hpp"

namespace kairos {

/// Wait between round j and round j+1, measured on round j's dominant side.
/// Generation-dominated rounds (|G_j| >= |E_j|) measure the gap from G_j's end
/// to G_{j+1}'s start; execution-dominated rounds measure from E_j's end to
/// E_{j+1}'s start. Negative gaps count as zero.
/// Throws std::invalid_argument on malformed intervals or when the next round
/// starts before the current one.
Duration round_wait(const Interval& gen, const Interval& exec, const Interval& next_gen,
                    const Interval& next_exec);

Duration round_wait(const RoundTimeline& current, const RoundTimeline& next);

/// Eq. (total wait) / (lifetime), clamped to [0, 1].
/// Throws std::invalid_argument unless now > t_start.
double wait_ratio(const WaitLedger& ledger, TimePoint t_start, TimePoint now);

/// Appends a completed round to the task's history and extends its wait
/// ledger by the wait between the previous round and this one.
/// Throws std::invalid_argument if the round id does not follow the last one
/// or the timeline violates its interval invariants.
void record_round(TaskState& task, const RoundTimeline& round);

/// Rebuilds a ledger from a full timeline history.
WaitLedger ledger_from(const std::vector<RoundTimeline>& timelines);

}  // namespace kairos
