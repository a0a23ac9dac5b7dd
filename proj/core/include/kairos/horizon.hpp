#pragma once

#include <span>
#include <vector>

namespace kairos {

/// Per-step, per-action diffusion update magnitudes for one generated chunk:
/// entry (k, n) is the L2 norm of the update applied to action n at step k.
/// Stored row-major, one row per step.
class UpdateMagnitudes {
 public:
  UpdateMagnitudes() = default;
  /// Throws std::invalid_argument unless steps >= 2, actions >= 1,
  /// values.size() == steps * actions and every entry is finite and >= 0.
  UpdateMagnitudes(int steps, int actions, std::vector<double> values);

  int steps() const { return steps_; }
  int actions() const { return actions_; }
  double at(int step, int action) const { return values_[static_cast<std::size_t>(step * actions_ + action)]; }
  std::span<const double> step(int k) const {
    return {values_.data() + static_cast<std::size_t>(k * actions_), static_cast<std::size_t>(actions_)};
  }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const UpdateMagnitudes&, const UpdateMagnitudes&) = default;

 private:
  int steps_ = 0;
  int actions_ = 0;
  std::vector<double> values_;
};

enum class HorizonPolicyKind { fixed, confidence_threshold };

struct HorizonPolicyConfig {
  HorizonPolicyKind kind = HorizonPolicyKind::confidence_threshold;
  int static_horizon = 0;   // fixed policy
  double threshold = 0.4;   // confidence policy, t
  int min_horizon = 5;      // confidence policy, H_min

  static HorizonPolicyConfig fixed(int horizon) {
    return {HorizonPolicyKind::fixed, horizon, 0.0, 1};
  }
  static HorizonPolicyConfig confidence(double threshold, int min_horizon = 5) {
    return {HorizonPolicyKind::confidence_threshold, 0, threshold, min_horizon};
  }
};

/// Length of the converged prefix: scanning actions in order, the first action
/// whose final-step update exceeds (1 + threshold) times the mean of its
/// earlier updates ends the prefix. Returns the chunk size when nothing trips.
int converged_prefix(const UpdateMagnitudes& u, double threshold);

/// Execution horizon for one round. Fixed policies return min(H, N); the
/// confidence policy returns max(converged_prefix, H_min) capped at N.
/// Throws std::invalid_argument on a negative threshold or a horizon below 1.
int decide_horizon(const HorizonPolicyConfig& cfg, const UpdateMagnitudes& u);

/// Horizon a fixed policy yields for a chunk of `chunk_size` actions.
int fixed_horizon(const HorizonPolicyConfig& cfg, int chunk_size);

/// Mean decided horizon of each config over the sequence of rounds.
std::vector<double> sweep_thresholds(std::span<const HorizonPolicyConfig> cfgs,
                                     std::span<const UpdateMagnitudes> rounds);

}  // namespace kairos
