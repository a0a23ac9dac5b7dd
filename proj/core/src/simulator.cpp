#include "kairos/simulator.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <tuple>
#include <unordered_set>

#include "json.hpp"
#include "kairos/wait_accounting.hpp"

namespace kairos {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::task_arrival: return "task_arrival";
    case EventKind::request_issued: return "request_issued";
    case EventKind::plan_invoked: return "plan_invoked";
    case EventKind::batch_started: return "batch_started";
    case EventKind::batch_completed: return "batch_completed";
    case EventKind::chunk_delivered: return "chunk_delivered";
    case EventKind::exec_started: return "exec_started";
    case EventKind::exec_completed: return "exec_completed";
    case EventKind::stall_started: return "stall_started";
    case EventKind::stall_ended: return "stall_ended";
    case EventKind::task_completed: return "task_completed";
  }
  return "unknown";
}

void SimConfig::validate() const {
  scheduler.validate();
  if (!edge && !cloud) throw std::invalid_argument("sim config: no serving tier configured");
  if (edge && edge->tier() != Tier::edge) throw std::invalid_argument("sim config: edge profile is not an edge tier");
  if (cloud && cloud->tier() != Tier::cloud) throw std::invalid_argument("sim config: cloud profile is not a cloud tier");
  edge_link.validate();
  cloud_link.validate();
  if (planning_interval <= Duration{0}) throw std::invalid_argument("sim config: planning_interval must be > 0");
}

void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.at, a.kind, a.task_id, a.round_id, a.batch_id) <
           std::tie(b.at, b.kind, b.task_id, b.round_id, b.batch_id);
  });
}

std::string event_to_json_line(const Event& e) {
  nlohmann::ordered_json j;
  j["at_us"] = us_of(e.at);
  j["kind"] = to_string(e.kind);
  if (!e.task_id.empty()) j["task"] = e.task_id;
  if (e.round_id >= 0) j["round"] = e.round_id;
  if (e.batch_id >= 0) j["batch"] = e.batch_id;
  if (e.tier) j["tier"] = to_string(*e.tier);
  return j.dump();
}

void write_event_log(std::span<const Event> events, std::ostream& out) {
  for (const Event& e : events) out << event_to_json_line(e) << '\n';
}

namespace {

// Internal queue kinds; the order settles same-instant processing. Plan runs
// last so that it sees every arrival and completion of its instant.
enum class Step { task_arrival, request_arrival, batch_complete, chunk_delivered, exec_trigger, exec_complete, plan };

struct QueueItem {
  TimePoint at;
  Step step;
  std::uint64_t seq;
  std::size_t task = 0;
  int round = 0;
  std::size_t batch = 0;
};

struct Later {
  bool operator()(const QueueItem& a, const QueueItem& b) const {
    return std::tie(a.at, a.step, a.seq) > std::tie(b.at, b.step, b.seq);
  }
};

struct RoundRuntime {
  PendingRequest request;
  Interval generation;
  TimePoint delivered{};
  Interval execution;
  std::optional<Tier> tier;
};

struct TaskRuntime {
  const TaskTrace* trace = nullptr;
  TimePoint arrival{};
  int slot = -1;
  bool done = false;
  std::vector<RoundRuntime> rounds;
  Duration stall{0};
  int max_deferrals = 0;
};

struct Batch {
  Tier tier;
  std::int64_t id;
  Duration compute;
};

struct Pool {
  const EngineProfile* profile = nullptr;
  std::vector<TimePoint> free_at;

  int idle(TimePoint now) const {
    return static_cast<int>(std::count_if(free_at.begin(), free_at.end(), [&](TimePoint t) { return t <= now; }));
  }
};

class Simulator {
 public:
  Simulator(std::span<const TaskTrace> traces, const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    std::unordered_set<std::string> ids;
    tasks_.resize(traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
      validate_trace(traces[i]);
      if (!ids.insert(traces[i].task_id).second)
        throw std::invalid_argument("duplicate task id " + traces[i].task_id);
      tasks_[i].trace = &traces[i];
      tasks_[i].rounds.resize(traces[i].rounds.size());
      index_.emplace(traces[i].task_id, i);
    }
    if (cfg_.edge) edge_ = Pool{&*cfg_.edge, std::vector<TimePoint>(static_cast<std::size_t>(cfg_.edge->instances()))};
    if (cfg_.cloud)
      cloud_ = Pool{&*cfg_.cloud, std::vector<TimePoint>(static_cast<std::size_t>(cfg_.cloud->instances()))};
  }

  void arrive(std::size_t task, TimePoint at, int slot = -1) {
    tasks_[task].arrival = at;
    tasks_[task].slot = slot;
    push(at, Step::task_arrival, task);
  }

  void set_backlog(std::size_t next) { next_unstarted_ = next; }

  SimResult run() {
    while (!queue_.empty()) {
      const QueueItem item = queue_.top();
      queue_.pop();
      switch (item.step) {
        case Step::task_arrival: on_task_arrival(item.task, item.at); break;
        case Step::request_arrival: on_request_arrival(item.task, item.round, item.at); break;
        case Step::batch_complete: on_batch_complete(item.task, item.round, item.batch, item.at); break;
        case Step::chunk_delivered: on_chunk_delivered(item.task, item.round, item.at); break;
        case Step::exec_trigger: on_exec_trigger(item.task, item.round, item.at); break;
        case Step::exec_complete: on_exec_complete(item.task, item.round, item.at); break;
        case Step::plan: on_plan(item.at); break;
      }
    }
    if (completed_ != tasks_.size())
      throw SimulationError("livelock: " + std::to_string(tasks_.size() - completed_) +
                            " tasks unfinished with no pending events");
    return finish();
  }

 private:
  void push(TimePoint at, Step step, std::size_t task = 0, int round = 0, std::size_t batch = 0) {
    queue_.push(QueueItem{at, step, seq_++, task, round, batch});
  }

  void log(TimePoint at, EventKind kind, std::size_t task, int round = -1, std::int64_t batch = -1,
           std::optional<Tier> tier = std::nullopt) {
    events_.push_back(Event{at, kind, tasks_[task].trace->task_id, round, batch, tier});
  }

  TaskState& state(std::size_t task) { return directory_.at(tasks_[task].trace->task_id); }

  void on_task_arrival(std::size_t task, TimePoint now) {
    const TaskTrace& tr = *tasks_[task].trace;
    log(now, EventKind::task_arrival, task);
    TaskState st;
    st.task_id = tr.task_id;
    st.control_hz = tr.control_hz;
    st.t_start = now;
    directory_.emplace(tr.task_id, std::move(st));
    issue(task, 0, now, std::nullopt);
  }

  void issue(std::size_t task, int round, TimePoint now, std::optional<LastExecInfo> last_exec) {
    const TaskTrace& tr = *tasks_[task].trace;
    log(now, EventKind::request_issued, task, round);
    PendingRequest& req = tasks_[task].rounds[static_cast<std::size_t>(round)].request;
    req.task_id = tr.task_id;
    req.round_id = round;
    req.issued_at = now;
    req.arrived_at = now + transfer_time(cfg_.edge_link, tr.obs_payload_bytes, Direction::up);
    req.obs_captured_at = now;
    req.last_exec = last_exec;
    req.payload_bytes = tr.obs_payload_bytes;
    req.response_bytes = tr.action_payload_bytes;
    req.skipped = 0;
    push(req.arrived_at, Step::request_arrival, task, round);
  }

  void on_request_arrival(std::size_t task, int round, TimePoint now) {
    TaskRuntime& rt = tasks_[task];
    const PendingRequest& req = rt.rounds[static_cast<std::size_t>(round)].request;
    if (round > 0) {
      // The previous round's execution interval is known only through the
      // piggyback on this request.
      const RoundRuntime& prev = rt.rounds[static_cast<std::size_t>(round - 1)];
      RoundTimeline tl;
      tl.round_id = round - 1;
      tl.generation = prev.generation;
      tl.execution = Interval{req.last_exec->exec_start, exec_end_from_piggyback(req, rt.trace->control_hz)};
      tl.horizon_used = rt.trace->rounds[static_cast<std::size_t>(round - 1)].horizon;
      record_round(state(task), tl);
    }
    pending_.push_back(req);
    if (cfg_.planning == PlanningMode::event_driven) {
      if (edge_.idle(now) > 0 || cloud_.idle(now) > 0) request_plan(now);
    } else if (!plan_at_) {
      const std::int64_t step = cfg_.planning_interval.count();
      const std::int64_t t = us_of(now);
      request_plan(at_us((t + step - 1) / step * step));
    }
  }

  void request_plan(TimePoint at) {
    if (plan_at_ && *plan_at_ <= at) return;
    plan_at_ = at;
    push(at, Step::plan);
  }

  TierPlacement placement(const Pool& pool, TimePoint now) const {
    TierPlacement p;
    if (pool.profile == nullptr) return p;
    p.profile = pool.profile;
    const int idle = pool.idle(now);
    p.capacity = std::min(pool.profile->capacity(), idle * pool.profile->max_batch());
    if (idle == 0) p.busy_for = *std::min_element(pool.free_at.begin(), pool.free_at.end()) - now;
    return p;
  }

  void on_plan(TimePoint now) {
    if (plan_at_ != now) return;  // superseded by an earlier plan
    plan_at_.reset();
    if (pending_.empty()) return;

    PlacementContext ctx;
    ctx.edge = placement(edge_, now);
    ctx.cloud = placement(cloud_, now);
    ctx.cloud_link = cfg_.cloud_link;
    if (ctx.edge.capacity == 0 && ctx.cloud.capacity == 0) {
      if (cfg_.planning == PlanningMode::fixed_interval) {
        if (in_flight_ == 0) throw SimulationError("livelock: no tier can accept requests");
        request_plan(now + cfg_.planning_interval);
      }
      return;
    }

    events_.push_back(Event{now, EventKind::plan_invoked, {}, -1, -1, std::nullopt});
    ++plan_rounds_;
    DispatchPlan dp = plan(pending_, directory_, ctx, now, cfg_.scheduler);

    for (const PendingRequest& req : dp.deferred) {
      const std::size_t task = index_.at(req.task_id);
      tasks_[task].rounds[static_cast<std::size_t>(req.round_id)].request.skipped = req.skipped;
      tasks_[task].max_deferrals = std::max(tasks_[task].max_deferrals, req.skipped);
      state(task).skipped = req.skipped;
    }
    const bool dispatched = !dp.edge.empty() || !dp.cloud.empty();
    dispatch(edge_, Tier::edge, dp.edge, now);
    dispatch(cloud_, Tier::cloud, dp.cloud, now);
    pending_ = std::move(dp.deferred);

    if (!dispatched && in_flight_ == 0) throw SimulationError("livelock: planning dispatched nothing with no batch in flight");
    if (cfg_.planning == PlanningMode::fixed_interval && !pending_.empty()) request_plan(now + cfg_.planning_interval);
  }

  void dispatch(Pool& pool, Tier tier, std::vector<PlannedRequest>& planned, TimePoint now) {
    if (planned.empty()) return;
    const int mb = pool.profile->max_batch();
    std::size_t instance = 0;
    for (std::size_t begin = 0; begin < planned.size(); begin += static_cast<std::size_t>(mb)) {
      const std::size_t end = std::min(planned.size(), begin + static_cast<std::size_t>(mb));
      while (pool.free_at[instance] > now) ++instance;  // capacity guarantees an idle one

      // A refetch delays only its own request; the engine stays busy until
      // the last member finishes.
      const Duration compute = pool.profile->batch_latency(static_cast<int>(end - begin));
      const Batch batch{tier, next_batch_id_++, compute};
      TimePoint busy_until = now;
      for (std::size_t k = begin; k < end; ++k) {
        const PendingRequest& req = planned[k].request;
        const std::size_t task = index_.at(req.task_id);
        RoundRuntime& rr = tasks_[task].rounds[static_cast<std::size_t>(req.round_id)];
        TimePoint start = now;
        if (planned[k].refetch) {
          start += cfg_.edge_link.base_latency + transfer_time(cfg_.edge_link, req.payload_bytes, Direction::up);
          rr.request.obs_captured_at = start;
        }
        if (tier == Tier::cloud) start += transfer_time(cfg_.cloud_link, req.payload_bytes, Direction::up);
        rr.generation = Interval{start, start + compute};
        rr.tier = tier;
        Duration back = transfer_time(cfg_.edge_link, req.response_bytes, Direction::down);
        if (tier == Tier::cloud) back += transfer_time(cfg_.cloud_link, req.response_bytes, Direction::down);
        rr.delivered = rr.generation.end + back;
        busy_until = std::max(busy_until, rr.generation.end);
        state(task).skipped = 0;
        log(start, EventKind::batch_started, task, req.round_id, batch.id, tier);
        ++in_flight_;
        push(rr.generation.end, Step::batch_complete, task, req.round_id, batches_.size());
      }
      pool.free_at[instance] = busy_until;
      batches_.push_back(batch);
    }
  }

  void on_batch_complete(std::size_t task, int round, std::size_t b, TimePoint now) {
    const Batch& batch = batches_[b];
    --in_flight_;
    log(now, EventKind::batch_completed, task, round, batch.id, batch.tier);
    state(task).accumulated_generation += batch.compute;
    push(tasks_[task].rounds[static_cast<std::size_t>(round)].delivered, Step::chunk_delivered, task, round);
    if (!pending_.empty() && cfg_.planning == PlanningMode::event_driven) request_plan(now);
  }

  void on_chunk_delivered(std::size_t task, int round, TimePoint now) {
    TaskRuntime& rt = tasks_[task];
    const TaskTrace& tr = *rt.trace;
    RoundRuntime& rr = rt.rounds[static_cast<std::size_t>(round)];
    log(now, EventKind::chunk_delivered, task, round, -1, rr.tier);

    TimePoint start = now;
    if (round > 0) {
      const TimePoint prev_end = rt.rounds[static_cast<std::size_t>(round - 1)].execution.end;
      if (prev_end < now) {
        log(prev_end, EventKind::stall_started, task, round);
        log(now, EventKind::stall_ended, task, round);
        rt.stall += now - prev_end;
      }
      start = std::max(now, prev_end);
    }
    const int h = tr.rounds[static_cast<std::size_t>(round)].horizon;
    rr.execution = Interval{start, start + exec_duration(h, tr.control_hz)};
    log(start, EventKind::exec_started, task, round);

    if (static_cast<std::size_t>(round + 1) < tr.rounds.size()) {
      const int trigger = tr.rounds[static_cast<std::size_t>(round + 1)].trigger_action_index;
      // Counted back from the end so that the piggybacked remaining count
      // reproduces the end exactly.
      push(rr.execution.end - exec_duration(h - trigger, tr.control_hz), Step::exec_trigger, task, round + 1);
    }
    push(rr.execution.end, Step::exec_complete, task, round);
  }

  void on_exec_trigger(std::size_t task, int round, TimePoint now) {
    const TaskRuntime& rt = tasks_[task];
    const TaskTrace& tr = *rt.trace;
    const auto prev = static_cast<std::size_t>(round - 1);
    const LastExecInfo info{rt.rounds[prev].execution.start,
                            tr.rounds[prev].horizon - tr.rounds[static_cast<std::size_t>(round)].trigger_action_index};
    issue(task, round, now, info);
  }

  void on_exec_complete(std::size_t task, int round, TimePoint now) {
    TaskRuntime& rt = tasks_[task];
    const TaskTrace& tr = *rt.trace;
    log(now, EventKind::exec_completed, task, round);
    if (static_cast<std::size_t>(round + 1) != tr.rounds.size()) return;

    // Final report: no successor request carries the last round's piggyback.
    const RoundRuntime& rr = rt.rounds.back();
    record_round(state(task), RoundTimeline{round, rr.generation, rr.execution, tr.rounds.back().horizon});
    log(now, EventKind::task_completed, task);
    rt.done = true;
    ++completed_;
    if (rt.slot >= 0 && next_unstarted_ < tasks_.size()) arrive(next_unstarted_++, now, rt.slot);
  }

  SimResult finish() {
    SimResult out;
    sort_events(events_);
    out.events = std::move(events_);
    out.plan_rounds = plan_rounds_;
    for (const TaskRuntime& rt : tasks_) {
      const TaskTrace& tr = *rt.trace;
      TaskState st = directory_.at(tr.task_id);
      TaskOutcome o;
      o.task_id = tr.task_id;
      o.arrival = rt.arrival;
      o.completion = rt.rounds.back().execution.end;
      o.latency = o.completion - o.arrival;
      o.wait_total = st.waits.total;
      o.stall_total = rt.stall;
      o.executed_actions = tr.total_actions();
      o.total_rounds = static_cast<int>(tr.rounds.size());
      o.offloaded_rounds = static_cast<int>(
          std::count_if(rt.rounds.begin(), rt.rounds.end(), [](const RoundRuntime& r) { return r.tier == Tier::cloud; }));
      o.max_deferrals = rt.max_deferrals;
      o.success = tr.success;
      out.outcomes.push_back(std::move(o));
      out.tasks.push_back(std::move(st));
    }
    return out;
  }

  SimConfig cfg_;
  std::vector<TaskRuntime> tasks_;
  std::unordered_map<std::string, std::size_t> index_;
  TaskDirectory directory_;
  Pool edge_;
  Pool cloud_;
  std::priority_queue<QueueItem, std::vector<QueueItem>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::vector<Event> events_;
  std::vector<PendingRequest> pending_;
  std::vector<Batch> batches_;
  std::int64_t next_batch_id_ = 0;
  std::optional<TimePoint> plan_at_;
  int in_flight_ = 0;
  std::int64_t plan_rounds_ = 0;
  std::size_t completed_ = 0;
  std::size_t next_unstarted_ = 0;
};

}  // namespace

SimResult run(std::span<const TaskTrace> traces, std::span<const TimePoint> arrivals, const SimConfig& cfg) {
  if (traces.size() != arrivals.size())
    throw std::invalid_argument("run: " + std::to_string(traces.size()) + " traces but " +
                                std::to_string(arrivals.size()) + " arrivals");
  Simulator sim(traces, cfg);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (arrivals[i] < TimePoint{}) throw std::invalid_argument("run: negative arrival time");
    sim.arrive(i, arrivals[i]);
  }
  return sim.run();
}

SimResult run_fleet(std::span<const TaskTrace> traces, int slots, const SimConfig& cfg) {
  if (slots < 1) throw std::invalid_argument("run_fleet: slots must be >= 1");
  Simulator sim(traces, cfg);
  const std::size_t first = std::min(traces.size(), static_cast<std::size_t>(slots));
  for (std::size_t i = 0; i < first; ++i) sim.arrive(i, TimePoint{}, static_cast<int>(i));
  sim.set_backlog(first);
  return sim.run();
}

}  // namespace kairos
