#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "kairos/rng.hpp"
#include "kairos/workload.hpp"

namespace kairos {

using json = nlohmann::json;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("synthetic spec: ") + what);
}

// Margin keeping borderline ratios strictly inside (1, 1 + design_threshold).
constexpr double kBorderlineMargin = 0.02;

}  // namespace

void SyntheticSpec::validate() const {
  require(task_count >= 0, "task_count must be >= 0");
  require(chunk_size >= 1, "chunk_size must be >= 1");
  require(diffusion_steps >= 2, "diffusion_steps must be >= 2");
  require(control_hz >= 1, "control_hz must be >= 1");
  require(action_dim >= 0, "action_dim must be >= 0");
  require(action_budget_min >= 1 && action_budget_min <= action_budget_max, "bad action budget range");
  require(task_horizon_min >= 1 && task_horizon_min <= task_horizon_max &&
              task_horizon_max <= chunk_size,
          "task horizon range must lie in [1, chunk_size]");
  require(decay_min > 0.0 && decay_min <= decay_max && decay_max < 1.0, "decay range must lie in (0, 1)");
  require(noise >= 0.0 && noise < 1.0, "noise must lie in [0, 1)");
  require(design_threshold >= 0.0, "design_threshold must be >= 0");
  require(borderline_fraction >= 0.0 && borderline_fraction <= 1.0, "borderline_fraction must lie in [0, 1]");
  require(bump_min > 1.0 + design_threshold && bump_min <= bump_max,
          "bump range must lie above 1 + design_threshold");
  require(uncertain_tail_fraction >= 0.0 && uncertain_tail_fraction <= 1.0,
          "uncertain_tail_fraction must lie in [0, 1]");
  require(success_rate >= 0.0 && success_rate <= 1.0, "success_rate must lie in [0, 1]");
  require(obs_payload_bytes >= 0 && action_payload_bytes >= 0, "payload sizes must be >= 0");
  require(gen_latency >= Duration{0}, "gen_latency must be >= 0");
  require(gen_latency < exec_duration(chunk_size, control_hz),
          "gen_latency must be shorter than a full chunk's playback");
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
  SyntheticSpec s;
  try {
    const json j = json::parse(json_text);
    s.task_count = j.value("task_count", s.task_count);
    s.seed = j.value("seed", s.seed);
    s.chunk_size = j.value("chunk_size", s.chunk_size);
    s.diffusion_steps = j.value("diffusion_steps", s.diffusion_steps);
    s.control_hz = j.value("control_hz", s.control_hz);
    s.action_dim = j.value("action_dim", s.action_dim);
    s.action_budget_min = j.value("action_budget_min", s.action_budget_min);
    s.action_budget_max = j.value("action_budget_max", s.action_budget_max);
    s.task_horizon_min = j.value("task_horizon_min", s.task_horizon_min);
    s.task_horizon_max = j.value("task_horizon_max", s.task_horizon_max);
    s.decay_min = j.value("decay_min", s.decay_min);
    s.decay_max = j.value("decay_max", s.decay_max);
    s.noise = j.value("noise", s.noise);
    s.design_threshold = j.value("design_threshold", s.design_threshold);
    s.borderline_fraction = j.value("borderline_fraction", s.borderline_fraction);
    s.bump_min = j.value("bump_min", s.bump_min);
    s.bump_max = j.value("bump_max", s.bump_max);
    s.uncertain_tail_fraction = j.value("uncertain_tail_fraction", s.uncertain_tail_fraction);
    s.success_rate = j.value("success_rate", s.success_rate);
    s.obs_payload_bytes = j.value("obs_payload_bytes", s.obs_payload_bytes);
    s.action_payload_bytes = j.value("action_payload_bytes", s.action_payload_bytes);
    s.gen_latency = Duration{j.value("gen_latency_us", s.gen_latency.count())};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_spec(ss.str());
}

std::string synthetic_spec_to_json(const SyntheticSpec& s) {
  json j = {{"task_count", s.task_count},
            {"seed", s.seed},
            {"chunk_size", s.chunk_size},
            {"diffusion_steps", s.diffusion_steps},
            {"control_hz", s.control_hz},
            {"action_dim", s.action_dim},
            {"action_budget_min", s.action_budget_min},
            {"action_budget_max", s.action_budget_max},
            {"task_horizon_min", s.task_horizon_min},
            {"task_horizon_max", s.task_horizon_max},
            {"decay_min", s.decay_min},
            {"decay_max", s.decay_max},
            {"noise", s.noise},
            {"design_threshold", s.design_threshold},
            {"borderline_fraction", s.borderline_fraction},
            {"bump_min", s.bump_min},
            {"bump_max", s.bump_max},
            {"uncertain_tail_fraction", s.uncertain_tail_fraction},
            {"success_rate", s.success_rate},
            {"obs_payload_bytes", s.obs_payload_bytes},
            {"action_payload_bytes", s.action_payload_bytes},
            {"gen_latency_us", s.gen_latency.count()}};
  return j.dump(2);
}

TaskProfile draw_task_profile(const SyntheticSpec& spec, std::string task_id, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7461736bULL));
  TaskProfile p;
  p.task_id = std::move(task_id);
  p.seed = seed;
  p.action_budget = rng.uniform_int(spec.action_budget_min, spec.action_budget_max);
  p.best_static_horizon = static_cast<int>(rng.uniform_int(spec.task_horizon_min, spec.task_horizon_max));
  p.success = rng.bernoulli(spec.success_rate);
  return p;
}

TaskProfile draw_task_profile(const SyntheticSpec& spec, int task_index) {
  char id[32];
  std::snprintf(id, sizeof id, "task-%05d", task_index);
  return draw_task_profile(spec, id, derive_seed(spec.seed, static_cast<std::uint64_t>(task_index)));
}

UpdateMagnitudes synthesize_round_magnitudes(const SyntheticSpec& spec, const TaskProfile& profile,
                                             int round_id) {
  Rng rng(derive_seed(profile.seed, 0x726f756e64ULL, static_cast<std::uint64_t>(round_id)));
  const int n_actions = spec.chunk_size;
  const int steps = spec.diffusion_steps;
  const int last = steps - 1;
  // Actions [0, safe) are converged or borderline; action `safe` (if any) is
  // the first uncertain one.
  const int safe = static_cast<int>(rng.uniform_int(profile.best_static_horizon, n_actions));

  std::vector<double> u(static_cast<std::size_t>(steps) * static_cast<std::size_t>(n_actions));
  auto cell = [&](int k, int n) -> double& { return u[static_cast<std::size_t>(k * n_actions + n)]; };
  const double borderline_hi = std::max(1.0 + kBorderlineMargin, 1.0 + spec.design_threshold - kBorderlineMargin);

  for (int n = 0; n < n_actions; ++n) {
    const double decay = rng.uniform(spec.decay_min, spec.decay_max);
    const double scale = rng.uniform(0.5, 1.5);
    double sum = 0.0;
    double level = scale;
    for (int k = 0; k < last; ++k) {
      cell(k, n) = level * (1.0 + spec.noise * rng.uniform(-1.0, 1.0));
      sum += cell(k, n);
      level *= decay;
    }
    const double mean = sum / last;

    bool uncertain = n == safe;
    if (n > safe) uncertain = rng.bernoulli(spec.uncertain_tail_fraction);
    double final_update = 0.0;
    if (uncertain) {
      final_update = mean * rng.uniform(spec.bump_min, spec.bump_max);
    } else if (rng.bernoulli(spec.borderline_fraction)) {
      final_update = mean * rng.uniform(1.0 + kBorderlineMargin / 2, borderline_hi);
    } else {
      const double natural = level * (1.0 + spec.noise * rng.uniform(-1.0, 1.0));
      final_update = std::min(natural, 0.95 * mean);
    }
    cell(last, n) = final_update;
  }
  return UpdateMagnitudes(steps, n_actions, std::move(u));
}

int trigger_index_for(int horizon, Duration gen_latency, int control_hz) {
  // Actions played during one generation, rounded up.
  const std::int64_t lead = (gen_latency.count() * control_hz + 999'999) / 1'000'000;
  const std::int64_t idx = horizon - lead;
  return static_cast<int>(std::clamp<std::int64_t>(idx, 0, horizon - 1));
}

namespace {

ActionTrajectory synthesize_trajectory(const SyntheticSpec& spec, const TaskProfile& profile,
                                       int round_id, int horizon) {
  Rng rng(derive_seed(profile.seed, 0x7472616aULL, static_cast<std::uint64_t>(round_id)));
  const auto dim = static_cast<std::size_t>(spec.action_dim);
  std::vector<double> pos(dim), vel(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    pos[d] = rng.uniform(-1.0, 1.0);
    vel[d] = rng.uniform(-0.05, 0.05);
  }
  ActionTrajectory traj;
  traj.reserve(static_cast<std::size_t>(horizon));
  for (int i = 0; i < horizon; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      vel[d] += rng.uniform(-0.01, 0.01);
      pos[d] += vel[d];
    }
    traj.push_back(pos);
  }
  return traj;
}

TaskTrace synthesize(const SyntheticSpec& spec, const TaskProfile& profile,
                     const std::function<int(const UpdateMagnitudes&)>& decide) {
  spec.validate();
  TaskTrace t;
  t.task_id = profile.task_id;
  t.control_hz = spec.control_hz;
  t.obs_payload_bytes = spec.obs_payload_bytes;
  t.action_payload_bytes = spec.action_payload_bytes;
  t.success = profile.success;

  std::int64_t executed = 0;
  int prev_horizon = 0;
  for (int round = 0; executed < profile.action_budget; ++round) {
    RoundRecord r;
    r.round_id = round;
    r.chunk_size = spec.chunk_size;
    r.update_magnitudes = synthesize_round_magnitudes(spec, profile, round);
    const std::int64_t left = profile.action_budget - executed;
    r.horizon = static_cast<int>(std::min<std::int64_t>(decide(*r.update_magnitudes), left));
    r.trigger_action_index =
        round == 0 ? 0 : trigger_index_for(prev_horizon, spec.gen_latency, spec.control_hz);
    if (spec.action_dim > 0) r.action_trajectory = synthesize_trajectory(spec, profile, round, r.horizon);
    executed += r.horizon;
    prev_horizon = r.horizon;
    t.rounds.push_back(std::move(r));
  }
  validate_trace(t);
  return t;
}

}  // namespace

TaskTrace synthesize_trace(const SyntheticSpec& spec, const TaskProfile& profile,
                           const HorizonPolicyConfig& policy) {
  return synthesize(spec, profile, [&](const UpdateMagnitudes& u) { return decide_horizon(policy, u); });
}

TaskTrace synthesize_trace(const SyntheticSpec& spec, const HorizonPolicyConfig& policy,
                           Duration gen_latency, std::uint64_t seed) {
  SyntheticSpec s = spec;
  s.gen_latency = gen_latency;
  char id[32];
  std::snprintf(id, sizeof id, "task-%016llx", static_cast<unsigned long long>(seed));
  return synthesize_trace(s, draw_task_profile(s, id, seed), policy);
}

std::vector<TaskTrace> synthesize_family(const SyntheticSpec& spec, const FamilyPolicy& policy) {
  spec.validate();
  std::vector<TaskTrace> out;
  out.reserve(static_cast<std::size_t>(spec.task_count));
  for (int i = 0; i < spec.task_count; ++i) {
    const TaskProfile profile = draw_task_profile(spec, i);
    if (const auto* cfg = std::get_if<HorizonPolicyConfig>(&policy)) {
      out.push_back(synthesize_trace(spec, profile, *cfg));
    } else {
      out.push_back(synthesize_trace(spec, profile, HorizonPolicyConfig::fixed(profile.best_static_horizon)));
    }
  }
  return out;
}

}  // namespace kairos
