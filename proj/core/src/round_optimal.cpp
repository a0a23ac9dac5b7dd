#include <cmath>
#include <stdexcept>

#include "kairos/workload.hpp"

namespace kairos {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

int round_optimal_horizon(const ActionTrajectory& reference, const ActionTrajectory& candidate,
                          double sim_threshold) {
  if (!(sim_threshold > 0.0 && sim_threshold <= 1.0)) {
    throw std::invalid_argument("similarity threshold must lie in (0, 1]");
  }
  const std::size_t n = std::min(reference.size(), candidate.size());
  for (std::size_t i = 0; i < n; ++i) {
    // 1e-12 absorbs rounding on identical vectors at threshold 1.
    if (cosine_similarity(reference[i], candidate[i]) < sim_threshold - 1e-12) return static_cast<int>(i);
  }
  return static_cast<int>(n);
}

}  // namespace kairos
