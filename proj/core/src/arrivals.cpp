#include <cmath>
#include <stdexcept>

#include "kairos/rng.hpp"
#include "kairos/workload.hpp"

namespace kairos {

std::vector<TimePoint> poisson_arrivals(double rate_per_sec, int count, std::uint64_t seed) {
  if (!(rate_per_sec > 0.0) || !std::isfinite(rate_per_sec)) {
    throw std::invalid_argument("arrival rate must be positive");
  }
  if (count < 0) throw std::invalid_argument("arrival count must be non-negative");
  Rng rng(derive_seed(seed, 0x4172726976616cULL));
  std::vector<TimePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  std::int64_t t = 0;
  for (int i = 0; i < count; ++i) {
    const auto gap = static_cast<std::int64_t>(std::floor(rng.exponential(rate_per_sec) * 1e6 + 0.5));
    // Two tasks never share an arrival tick.
    t += std::max<std::int64_t>(gap, 1);
    out.push_back(at_us(t));
  }
  return out;
}

}  // namespace kairos
