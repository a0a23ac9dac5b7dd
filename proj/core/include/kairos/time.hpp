#pragma once

#include <chrono>
#include <cstdint>
#include <ratio>

namespace kairos {

// Simulated clock. Ticks are integer microseconds since the start of a run;
// nothing in the library ever reads wall-clock time through it.
struct SimClock {
  using rep = std::int64_t;
  using period = std::micro;
  using duration = std::chrono::duration<rep, period>;
  using time_point = std::chrono::time_point<SimClock>;
  static constexpr bool is_steady = true;
};

using Duration = SimClock::duration;
using TimePoint = SimClock::time_point;

constexpr TimePoint at_us(std::int64_t us) { return TimePoint{Duration{us}}; }
constexpr std::int64_t us_of(TimePoint t) { return t.time_since_epoch().count(); }
constexpr std::int64_t us_of(Duration d) { return d.count(); }

/// num / den rounded half-up. Requires num >= 0 and den > 0.
constexpr std::int64_t div_round_half_up(std::int64_t num, std::int64_t den) {
  return (2 * num + den) / (2 * den);
}

/// Playback time of `actions` at `control_hz`, rounded half-up to the
/// microsecond. This is the only action-count to time conversion in the
/// library.
Duration exec_duration(std::int64_t actions, int control_hz);

}  // namespace kairos
