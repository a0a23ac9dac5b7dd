#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kairos/platform.hpp"
#include "kairos/task.hpp"

namespace kairos {

enum class SchedulingPolicy { kairos, fifo, las };

std::string_view to_string(SchedulingPolicy policy);
/// Throws std::invalid_argument on an unknown name.
SchedulingPolicy parse_policy(std::string_view name);

struct SchedulerConfig {
  int buckets = 10;  // B
  int aging = 5;     // A: skipped rounds per one-bucket promotion
  SchedulingPolicy policy = SchedulingPolicy::kairos;
  // Planned requests whose observation is older than this are re-fetched.
  Duration stale_threshold{150'000};
  // Execution estimate for a task that has not completed a round yet.
  Duration cold_start_estimate{166'667};

  /// Throws std::invalid_argument unless buckets >= 1 and aging >= 1.
  void validate() const;
};

using TaskDirectory = std::unordered_map<std::string, TaskState>;

/// One tier as seen by a single planning round.
struct TierPlacement {
  const EngineProfile* profile = nullptr;  // null when the tier is not deployed
  int capacity = 0;                        // requests this round may send to the tier
  Duration busy_for{0};                    // until an engine frees up; 0 when one is idle
};

struct PlacementContext {
  TierPlacement edge;
  TierPlacement cloud;
  NetworkModel cloud_link = NetworkModel::wan();
};

struct PlannedRequest {
  PendingRequest request;
  bool refetch = false;  // observation is stale and must be fetched again
};

struct DispatchPlan {
  std::vector<PlannedRequest> edge;
  std::vector<PlannedRequest> cloud;
  std::vector<PendingRequest> deferred;
};

/// floor(wr * B) capped at B-1, then promoted floor(skipped / A) buckets once
/// skipped >= A.
int assign_bucket(double wait_ratio, int skipped, const SchedulerConfig& cfg);

/// Duration of the task's most recent execution phase, or `cold_start` when
/// it has none yet.
Duration estimate_exec_latency(const TaskState& task, Duration cold_start);

struct EstimatedRequest {
  PendingRequest request;
  Duration exec_estimate{0};  // |E_last| before aging
};

/// Sorts by |E_last| * (1 + skipped) descending; ties by arrival, then task id.
std::vector<PendingRequest> order_within_bucket(std::vector<EstimatedRequest> requests);

/// Phases 1 and 2: the global priority order S under cfg.policy.
/// Throws std::invalid_argument if a request names a task not in `tasks`.
std::vector<PendingRequest> priority_order(std::span<const PendingRequest> pending,
                                           const TaskDirectory& tasks, TimePoint now,
                                           const SchedulerConfig& cfg);

/// Phase 3 and bookkeeping: edge-first placement of an ordered list, cloud
/// offload when the estimated cloud round trip beats the estimated edge delay,
/// stale-observation marking, and skip counters.
DispatchPlan place(std::vector<PendingRequest> ordered, const PlacementContext& ctx, TimePoint now,
                   const SchedulerConfig& cfg);

/// Full planning round under cfg.policy.
DispatchPlan plan(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                  const PlacementContext& ctx, TimePoint now, const SchedulerConfig& cfg);

/// Arrival-order baseline; placement identical to plan().
DispatchPlan plan_fifo(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                       const PlacementContext& ctx, TimePoint now, SchedulerConfig cfg);

/// Least-accumulated-generation baseline; placement identical to plan().
DispatchPlan plan_las(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                      const PlacementContext& ctx, TimePoint now, SchedulerConfig cfg);

/// Estimated time until `ahead` queued requests and then this one complete on
/// the edge (busy_for + drain of full batches + own batch). Infinite when the
/// edge is not deployed.
Duration estimate_edge_delay(const TierPlacement& edge, int ahead, int own_batch);

/// Estimated completion of one request offloaded to the cloud as part of a
/// batch of `own_batch`.
Duration estimate_cloud_latency(const TierPlacement& cloud, const NetworkModel& link,
                                const PendingRequest& req, int own_batch);

inline constexpr Duration kUnreachable{std::numeric_limits<Duration::rep>::max()};

}  // namespace kairos
