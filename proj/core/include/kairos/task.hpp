#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kairos/time.hpp"

namespace kairos {

// Half-open [start, end).
struct Interval {
  TimePoint start{};
  TimePoint end{};

  Duration length() const { return end - start; }
  bool well_formed() const { return start <= end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// N actions produced by one inference call, of which the first `horizon`
/// are executed at `control_hz`.
struct ActionChunk {
  int chunk_size = 0;
  int control_hz = 0;
  int horizon = 0;

  /// Throws std::invalid_argument unless 1 <= horizon <= chunk_size and
  /// control_hz > 0.
  void validate() const;
  Duration execution_time() const { return exec_duration(horizon, control_hz); }
};

struct RoundTimeline {
  int round_id = 0;
  Interval generation;
  Interval execution;
  int horizon_used = 0;

  friend bool operator==(const RoundTimeline&, const RoundTimeline&) = default;
};

/// Per-round waits W_j between consecutive rounds j and j+1, with their sum
/// cached. Only wait_accounting appends to it.
struct WaitLedger {
  std::vector<Duration> waits;
  Duration total{0};

  friend bool operator==(const WaitLedger&, const WaitLedger&) = default;
};

/// Server-side record of one task.
struct TaskState {
  std::string task_id;
  int control_hz = 0;
  TimePoint t_start{};
  std::vector<RoundTimeline> timelines;
  // Consecutive planning rounds in which this task's request was not selected.
  int skipped = 0;
  Duration accumulated_generation{0};
  WaitLedger waits;
};

/// What the client piggybacks on a generation request about the chunk it is
/// currently executing.
struct LastExecInfo {
  TimePoint exec_start{};
  int remaining_actions = 0;

  friend bool operator==(const LastExecInfo&, const LastExecInfo&) = default;
};

struct PendingRequest {
  std::string task_id;
  int round_id = 0;
  TimePoint issued_at{};        // client send time
  TimePoint arrived_at{};       // server receive time; FIFO order key
  TimePoint obs_captured_at{};
  std::optional<LastExecInfo> last_exec;  // absent for round 0
  std::int64_t payload_bytes = 0;
  std::int64_t response_bytes = 0;
  int skipped = 0;

  friend bool operator==(const PendingRequest&, const PendingRequest&) = default;
};

/// End of the execution interval the client is in, recovered from the issue
/// time and the count of actions still to play.
TimePoint exec_end_from_piggyback(TimePoint issued_at, int remaining_actions, int control_hz);

/// Same, reading the piggyback carried by `req`. Throws std::invalid_argument
/// if the request carries none (round 0) or a negative remaining count.
TimePoint exec_end_from_piggyback(const PendingRequest& req, int control_hz);

}  // namespace kairos
