#include "kairos/task.hpp"

#include <stdexcept>

namespace kairos {

Duration exec_duration(std::int64_t actions, int control_hz) {
  if (control_hz <= 0) throw std::invalid_argument("control_hz must be positive");
  if (actions < 0) throw std::invalid_argument("action count must be non-negative");
  return Duration{div_round_half_up(actions * 1'000'000, control_hz)};
}

void ActionChunk::validate() const {
  if (control_hz <= 0) throw std::invalid_argument("control_hz must be positive");
  if (chunk_size < 1) throw std::invalid_argument("chunk_size must be positive");
  if (horizon < 1 || horizon > chunk_size) {
    throw std::invalid_argument("horizon must lie in [1, chunk_size]");
  }
}

TimePoint exec_end_from_piggyback(TimePoint issued_at, int remaining_actions, int control_hz) {
  if (remaining_actions < 0) throw std::invalid_argument("remaining_actions must be non-negative");
  return issued_at + exec_duration(remaining_actions, control_hz);
}

TimePoint exec_end_from_piggyback(const PendingRequest& req, int control_hz) {
  if (!req.last_exec) {
    throw std::invalid_argument("request " + req.task_id + "/" + std::to_string(req.round_id) +
                                " carries no execution info");
  }
  return exec_end_from_piggyback(req.issued_at, req.last_exec->remaining_actions, control_hz);
}

}  // namespace kairos
