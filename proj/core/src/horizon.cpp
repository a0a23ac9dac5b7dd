#include "kairos/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kairos {

UpdateMagnitudes::UpdateMagnitudes(int steps, int actions, std::vector<double> values)
    : steps_(steps), actions_(actions), values_(std::move(values)) {
  if (steps_ < 2) throw std::invalid_argument("update magnitudes need at least 2 diffusion steps");
  if (actions_ < 1) throw std::invalid_argument("update magnitudes need at least 1 action");
  if (values_.size() != static_cast<std::size_t>(steps_) * static_cast<std::size_t>(actions_)) {
    throw std::invalid_argument("update magnitudes: expected " + std::to_string(steps_ * actions_) +
                                " entries, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("update magnitudes must be finite and non-negative");
    }
  }
}

int converged_prefix(const UpdateMagnitudes& u, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("confidence threshold must be >= 0");
  const int last = u.steps() - 1;
  for (int n = 0; n < u.actions(); ++n) {
    double sum = 0.0;
    for (int k = 0; k < last; ++k) sum += u.at(k, n);
    const double mean = sum / last;
    if (u.at(last, n) > (1.0 + threshold) * mean) return n;
  }
  return u.actions();
}

int fixed_horizon(const HorizonPolicyConfig& cfg, int chunk_size) {
  if (cfg.static_horizon < 1) throw std::invalid_argument("static horizon must be >= 1");
  return std::min(cfg.static_horizon, chunk_size);
}

int decide_horizon(const HorizonPolicyConfig& cfg, const UpdateMagnitudes& u) {
  switch (cfg.kind) {
    case HorizonPolicyKind::fixed:
      return fixed_horizon(cfg, u.actions());
    case HorizonPolicyKind::confidence_threshold: {
      if (cfg.min_horizon < 1) throw std::invalid_argument("H_min must be >= 1");
      const int thresh = converged_prefix(u, cfg.threshold);
      return std::min(std::max(thresh, cfg.min_horizon), u.actions());
    }
  }
  throw std::invalid_argument("unknown horizon policy kind");
}

std::vector<double> sweep_thresholds(std::span<const HorizonPolicyConfig> cfgs,
                                     std::span<const UpdateMagnitudes> rounds) {
  if (cfgs.empty() || rounds.empty()) throw std::invalid_argument("sweep needs configs and rounds");
  std::vector<double> means;
  means.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    long long total = 0;
    for (const auto& u : rounds) total += decide_horizon(cfg, u);
    means.push_back(static_cast<double>(total) / static_cast<double>(rounds.size()));
  }
  return means;
}

}  // namespace kairos
