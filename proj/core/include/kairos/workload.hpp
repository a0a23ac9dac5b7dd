#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kairos/horizon.hpp"
#include "kairos/time.hpp"

namespace kairos {

/// H x D executed action vectors of one round.
using ActionTrajectory = std::vector<std::vector<double>>;

struct RoundRecord {
  int round_id = 0;
  // Index into the previous round's executed prefix at which this round's
  // request is issued. Index 0 is the first executed action. Always 0 for
  // round 0, which is issued when the task arrives.
  int trigger_action_index = 0;
  int horizon = 0;
  int chunk_size = 0;
  std::optional<UpdateMagnitudes> update_magnitudes;
  std::optional<ActionTrajectory> action_trajectory;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

/// Recorded observation-inference-execution history of one task run in
/// isolation; the unit of replay.
struct TaskTrace {
  std::string task_id;
  int control_hz = 0;
  std::int64_t obs_payload_bytes = 0;
  std::int64_t action_payload_bytes = 0;
  bool success = false;
  std::vector<RoundRecord> rounds;

  std::int64_t total_actions() const;
  friend bool operator==(const TaskTrace&, const TaskTrace&) = default;
};

/// Malformed or invariant-violating trace input. `line` is 1-based and 0 when
/// not reading from a file; `round_id` is -1 for task-level problems.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::string message, std::size_t line, std::string task_id, int round_id);

  std::size_t line() const { return line_; }
  const std::string& task_id() const { return task_id_; }
  int round_id() const { return round_id_; }

 private:
  std::size_t line_;
  std::string task_id_;
  int round_id_;
};

/// Throws TraceError naming the task and round of the first violation.
void validate_trace(const TaskTrace& trace);

// JSON Lines: one TaskTrace per line, durations in integer microseconds,
// matrices as nested arrays. Blank lines are ignored.
std::string trace_to_json_line(const TaskTrace& trace);
std::vector<TaskTrace> read_traces(std::istream& in);
void write_traces(std::span<const TaskTrace> traces, std::ostream& out);
std::vector<TaskTrace> load_traces(const std::filesystem::path& path);
void store_traces(std::span<const TaskTrace> traces, const std::filesystem::path& path);
/// Every *.jsonl file in `dir`, in file-name order.
std::vector<TaskTrace> load_trace_dir(const std::filesystem::path& dir);

/// Cumulative sums of exponential(rate) gaps, strictly increasing, seeded.
/// Throws std::invalid_argument unless rate > 0 and count >= 0.
std::vector<TimePoint> poisson_arrivals(double rate_per_sec, int count, std::uint64_t seed);

/// Parameters of the synthetic trace generator. Update magnitudes follow a
/// per-action geometric decay over steps; the final step is replaced by a
/// ratio to the earlier mean that marks the action converged (< 1),
/// borderline (between 1 and 1 + design_threshold) or uncertain (bump range).
struct SyntheticSpec {
  int task_count = 100;
  std::uint64_t seed = 1;
  int chunk_size = 50;
  int diffusion_steps = 10;
  int control_hz = 30;
  int action_dim = 0;  // 0: no action trajectories
  std::int64_t action_budget_min = 300;
  std::int64_t action_budget_max = 900;
  // Range of each task's best static horizon. Every round's converged prefix
  // is at least this long.
  int task_horizon_min = 10;
  int task_horizon_max = 50;
  double decay_min = 0.55;
  double decay_max = 0.85;
  double noise = 0.1;
  double design_threshold = 0.4;
  double borderline_fraction = 0.1;
  double bump_min = 1.5;
  double bump_max = 3.0;
  double uncertain_tail_fraction = 0.5;
  double success_rate = 0.9;
  std::int64_t obs_payload_bytes = 300'000;
  std::int64_t action_payload_bytes = 2'800;
  // Isolated request-to-delivery latency the trigger indices are derived from.
  Duration gen_latency{200'000};

  /// Throws std::invalid_argument on inconsistent parameters, including a
  /// generation latency at or beyond a full chunk's playback time.
  void validate() const;
};

SyntheticSpec parse_synthetic_spec(std::string_view json_text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
std::string synthetic_spec_to_json(const SyntheticSpec& spec);

/// Per-task draws shared by every horizon policy, so that families generated
/// under different policies describe the same tasks.
struct TaskProfile {
  std::string task_id;
  std::uint64_t seed = 0;
  std::int64_t action_budget = 0;
  int best_static_horizon = 0;
  bool success = false;
};

TaskProfile draw_task_profile(const SyntheticSpec& spec, int task_index);
TaskProfile draw_task_profile(const SyntheticSpec& spec, std::string task_id, std::uint64_t seed);

/// Update magnitudes of one round; depends only on (spec, profile, round_id).
UpdateMagnitudes synthesize_round_magnitudes(const SyntheticSpec& spec, const TaskProfile& profile,
                                             int round_id);

/// Issue index for the next round: the successor chunk is delivered just as
/// the current prefix runs out, given an isolated generation latency. Clamped
/// to [0, horizon - 1].
int trigger_index_for(int horizon, Duration gen_latency, int control_hz);

TaskTrace synthesize_trace(const SyntheticSpec& spec, const TaskProfile& profile,
                           const HorizonPolicyConfig& policy);
TaskTrace synthesize_trace(const SyntheticSpec& spec, const HorizonPolicyConfig& policy,
                           Duration gen_latency, std::uint64_t seed);

/// Each task keeps its own best static horizon for every round.
struct PerTaskStaticHorizon {};
using FamilyPolicy = std::variant<HorizonPolicyConfig, PerTaskStaticHorizon>;

std::vector<TaskTrace> synthesize_family(const SyntheticSpec& spec, const FamilyPolicy& policy);

/// Cosine similarity; two zero vectors are identical (1), one zero vector is
/// dissimilar to anything else (0). Throws on mismatched dimensions.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Largest L such that candidate action i matches reference action i with
/// cosine similarity >= threshold for every i < L.
/// Throws std::invalid_argument unless threshold is in (0, 1].
int round_optimal_horizon(const ActionTrajectory& reference, const ActionTrajectory& candidate,
                          double sim_threshold);

}  // namespace kairos
