#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kairos/platform.hpp"
#include "kairos/scheduler.hpp"
#include "kairos/task.hpp"
#include "kairos/workload.hpp"

namespace kairos {

// Declaration order is the tiebreak order of events sharing a timestamp.
enum class EventKind {
  task_arrival,
  request_issued,
  plan_invoked,
  batch_started,
  batch_completed,
  chunk_delivered,
  exec_started,
  exec_completed,
  stall_started,
  stall_ended,
  task_completed,
};

std::string_view to_string(EventKind kind);

struct Event {
  TimePoint at{};
  EventKind kind = EventKind::task_arrival;
  std::string task_id;            // empty for plan_invoked
  int round_id = -1;              // -1 when not tied to a round
  std::int64_t batch_id = -1;     // batch_started / batch_completed only
  std::optional<Tier> tier;       // batch and delivery events only

  friend bool operator==(const Event&, const Event&) = default;
};

enum class PlanningMode {
  event_driven,    // on request arrival with an idle engine, and on batch completion
  fixed_interval,  // every planning_interval while requests are pending
};

struct SimConfig {
  SchedulerConfig scheduler;
  std::optional<EngineProfile> edge;
  std::optional<EngineProfile> cloud;
  NetworkModel edge_link = NetworkModel::ideal();  // robot <-> edge server
  NetworkModel cloud_link = NetworkModel::wan();   // edge server <-> cloud
  PlanningMode planning = PlanningMode::event_driven;
  Duration planning_interval{10'000};
  // Carried for provenance; the event loop itself draws no randomness.
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an invalid sub-config, a profile on the
  /// wrong tier, no tier at all, or a non-positive planning interval.
  void validate() const;
};

struct TaskOutcome {
  std::string task_id;
  TimePoint arrival{};
  TimePoint completion{};  // end of the last executed action
  Duration latency{0};
  Duration wait_total{0};  // server-side wait ledger
  Duration stall_total{0};
  std::int64_t executed_actions = 0;
  int total_rounds = 0;
  int offloaded_rounds = 0;
  int max_deferrals = 0;  // most planning rounds any one request was passed over
  bool success = false;
};

struct SimResult {
  std::vector<Event> events;       // sorted, see sort_events
  std::vector<TaskState> tasks;    // server view, input order
  std::vector<TaskOutcome> outcomes;  // input order
  std::int64_t plan_rounds = 0;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replays trace i starting at arrivals[i]. Throws std::invalid_argument on
/// mismatched sizes or duplicate task ids, TraceError on an invalid trace and
/// SimulationError on livelock.
SimResult run(std::span<const TaskTrace> traces, std::span<const TimePoint> arrivals,
              const SimConfig& cfg);

/// Offline mode: `slots` robots run the traces back-to-back in input order,
/// all starting at time 0.
SimResult run_fleet(std::span<const TaskTrace> traces, int slots, const SimConfig& cfg);

/// Stable sort by (at, kind, task, round, batch).
void sort_events(std::vector<Event>& events);

std::string event_to_json_line(const Event& event);
void write_event_log(std::span<const Event> events, std::ostream& out);

}  // namespace kairos
