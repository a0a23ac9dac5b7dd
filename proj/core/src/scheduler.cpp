#include "kairos/scheduler.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "kairos/wait_accounting.hpp"

namespace kairos {

std::string_view to_string(SchedulingPolicy policy) {
  switch (policy) {
    case SchedulingPolicy::kairos: return "kairos";
    case SchedulingPolicy::fifo: return "fifo";
    case SchedulingPolicy::las: return "las";
  }
  return "unknown";
}

SchedulingPolicy parse_policy(std::string_view name) {
  if (name == "kairos") return SchedulingPolicy::kairos;
  if (name == "fifo") return SchedulingPolicy::fifo;
  if (name == "las") return SchedulingPolicy::las;
  throw std::invalid_argument("unknown scheduler '" + std::string(name) + "'");
}

void SchedulerConfig::validate() const {
  if (buckets < 1) throw std::invalid_argument("scheduler: bucket count must be >= 1");
  if (aging < 1) throw std::invalid_argument("scheduler: aging interval must be >= 1");
  if (stale_threshold < Duration{0} || cold_start_estimate < Duration{0}) {
    throw std::invalid_argument("scheduler: durations must be non-negative");
  }
}

int assign_bucket(double wait_ratio, int skipped, const SchedulerConfig& cfg) {
  const int top = cfg.buckets - 1;
  int bucket = std::min(top, static_cast<int>(wait_ratio * cfg.buckets));
  if (skipped >= cfg.aging) bucket = std::min(top, bucket + skipped / cfg.aging);
  return bucket;
}

Duration estimate_exec_latency(const TaskState& task, Duration cold_start) {
  if (task.timelines.empty()) return cold_start;
  return task.timelines.back().execution.length();
}

namespace {

// Arrival then task id; the shared tail of every ordering.
bool arrives_before(const PendingRequest& a, const PendingRequest& b) {
  return std::tie(a.arrived_at, a.task_id, a.round_id) < std::tie(b.arrived_at, b.task_id, b.round_id);
}

Duration aged(Duration estimate, int skipped) { return estimate * (1 + static_cast<std::int64_t>(skipped)); }

const TaskState& lookup(const TaskDirectory& tasks, const PendingRequest& req) {
  const auto it = tasks.find(req.task_id);
  if (it == tasks.end()) throw std::invalid_argument("pending request for unknown task " + req.task_id);
  return it->second;
}

double current_wait_ratio(const TaskState& task, TimePoint now) {
  // A task planned at its own first instant has no lifetime yet.
  if (now <= task.t_start) return 0.0;
  return wait_ratio(task.waits, task.t_start, now);
}

std::vector<PendingRequest> kairos_order(std::span<const PendingRequest> pending,
                                         const TaskDirectory& tasks, TimePoint now,
                                         const SchedulerConfig& cfg) {
  std::vector<std::vector<EstimatedRequest>> buckets(static_cast<std::size_t>(cfg.buckets));
  for (const auto& req : pending) {
    const TaskState& task = lookup(tasks, req);
    const int b = assign_bucket(current_wait_ratio(task, now), req.skipped, cfg);
    buckets[static_cast<std::size_t>(b)].push_back({req, estimate_exec_latency(task, cfg.cold_start_estimate)});
  }
  std::vector<PendingRequest> ordered;
  ordered.reserve(pending.size());
  for (auto b = buckets.rbegin(); b != buckets.rend(); ++b) {
    for (auto& req : order_within_bucket(std::move(*b))) ordered.push_back(std::move(req));
  }
  return ordered;
}

}  // namespace

std::vector<PendingRequest> order_within_bucket(std::vector<EstimatedRequest> requests) {
  std::sort(requests.begin(), requests.end(), [](const EstimatedRequest& a, const EstimatedRequest& b) {
    const Duration ea = aged(a.exec_estimate, a.request.skipped);
    const Duration eb = aged(b.exec_estimate, b.request.skipped);
    if (ea != eb) return ea > eb;
    return arrives_before(a.request, b.request);
  });
  std::vector<PendingRequest> out;
  out.reserve(requests.size());
  for (auto& r : requests) out.push_back(std::move(r.request));
  return out;
}

std::vector<PendingRequest> priority_order(std::span<const PendingRequest> pending,
                                           const TaskDirectory& tasks, TimePoint now,
                                           const SchedulerConfig& cfg) {
  cfg.validate();
  switch (cfg.policy) {
    case SchedulingPolicy::kairos:
      return kairos_order(pending, tasks, now, cfg);
    case SchedulingPolicy::fifo: {
      for (const auto& req : pending) lookup(tasks, req);
      std::vector<PendingRequest> ordered(pending.begin(), pending.end());
      std::sort(ordered.begin(), ordered.end(), arrives_before);
      return ordered;
    }
    case SchedulingPolicy::las: {
      std::vector<std::pair<Duration, PendingRequest>> keyed;
      keyed.reserve(pending.size());
      for (const auto& req : pending) keyed.emplace_back(lookup(tasks, req).accumulated_generation, req);
      std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return arrives_before(a.second, b.second);
      });
      std::vector<PendingRequest> ordered;
      ordered.reserve(keyed.size());
      for (auto& [_, req] : keyed) ordered.push_back(std::move(req));
      return ordered;
    }
  }
  throw std::invalid_argument("unknown scheduling policy");
}

Duration estimate_edge_delay(const TierPlacement& edge, int ahead, int own_batch) {
  if (edge.profile == nullptr) return kUnreachable;
  const int mb = edge.profile->max_batch();
  const std::int64_t full_batches = (ahead + mb - 1) / mb;
  return edge.busy_for + full_batches * edge.profile->batch_latency(mb) +
         edge.profile->batch_latency(std::clamp(own_batch, 1, mb));
}

Duration estimate_cloud_latency(const TierPlacement& cloud, const NetworkModel& link,
                                const PendingRequest& req, int own_batch) {
  if (cloud.profile == nullptr) return kUnreachable;
  const Duration compute = cloud.profile->batch_latency(std::clamp(own_batch, 1, cloud.profile->max_batch()));
  return cloud.busy_for + cloud_round_trip(link, req.payload_bytes, req.response_bytes, compute);
}

DispatchPlan place(std::vector<PendingRequest> ordered, const PlacementContext& ctx, TimePoint now,
                   const SchedulerConfig& cfg) {
  DispatchPlan out;
  const std::size_t edge_slots =
      ctx.edge.profile ? static_cast<std::size_t>(std::max(ctx.edge.capacity, 0)) : 0;
  const std::size_t cloud_slots =
      ctx.cloud.profile ? static_cast<std::size_t>(std::max(ctx.cloud.capacity, 0)) : 0;
  const std::size_t n_edge = std::min(edge_slots, ordered.size());

  auto planned = [&](PendingRequest req) {
    req.skipped = 0;
    const bool stale = now - req.obs_captured_at > cfg.stale_threshold;
    return PlannedRequest{std::move(req), stale};
  };

  for (std::size_t i = 0; i < n_edge; ++i) out.edge.push_back(planned(std::move(ordered[i])));

  const int own_edge_batch = static_cast<int>(n_edge);
  int ahead = static_cast<int>(n_edge);
  for (std::size_t i = n_edge; i < ordered.size(); ++i) {
    PendingRequest& req = ordered[i];
    if (out.cloud.size() < cloud_slots) {
      const Duration cloud = estimate_cloud_latency(ctx.cloud, ctx.cloud_link, req,
                                                    static_cast<int>(out.cloud.size()) + 1);
      const Duration edge = estimate_edge_delay(ctx.edge, ahead, own_edge_batch);
      if (cloud < edge) {
        out.cloud.push_back(planned(std::move(req)));
        continue;
      }
    }
    req.skipped += 1;
    out.deferred.push_back(std::move(req));
    ++ahead;
  }
  return out;
}

DispatchPlan plan(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                  const PlacementContext& ctx, TimePoint now, const SchedulerConfig& cfg) {
  return place(priority_order(pending, tasks, now, cfg), ctx, now, cfg);
}

DispatchPlan plan_fifo(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                       const PlacementContext& ctx, TimePoint now, SchedulerConfig cfg) {
  cfg.policy = SchedulingPolicy::fifo;
  return plan(pending, tasks, ctx, now, cfg);
}

DispatchPlan plan_las(std::span<const PendingRequest> pending, const TaskDirectory& tasks,
                      const PlacementContext& ctx, TimePoint now, SchedulerConfig cfg) {
  cfg.policy = SchedulingPolicy::las;
  return plan(pending, tasks, ctx, now, cfg);
}

}  // namespace kairos
