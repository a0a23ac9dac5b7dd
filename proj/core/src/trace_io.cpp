#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "kairos/workload.hpp"

namespace kairos {

using json = nlohmann::json;

TraceError::TraceError(std::string message, std::size_t line, std::string task_id, int round_id)
    : std::runtime_error(std::move(message)),
      line_(line),
      task_id_(std::move(task_id)),
      round_id_(round_id) {}

std::int64_t TaskTrace::total_actions() const {
  return std::accumulate(rounds.begin(), rounds.end(), std::int64_t{0},
                         [](std::int64_t acc, const RoundRecord& r) { return acc + r.horizon; });
}

namespace {

[[noreturn]] void fail(const TaskTrace& t, int round_id, const std::string& what) {
  std::string msg = "task " + t.task_id;
  if (round_id >= 0) msg += " round " + std::to_string(round_id);
  throw TraceError(msg + ": " + what, 0, t.task_id, round_id);
}

}  // namespace

void validate_trace(const TaskTrace& t) {
  if (t.task_id.empty()) fail(t, -1, "empty task_id");
  if (t.control_hz <= 0) fail(t, -1, "control_hz must be positive");
  if (t.obs_payload_bytes < 0 || t.action_payload_bytes < 0) fail(t, -1, "negative payload size");
  if (t.rounds.empty()) fail(t, -1, "no rounds");
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    const RoundRecord& r = t.rounds[i];
    const int id = r.round_id;
    if (id != static_cast<int>(i)) {
      fail(t, id, "round ids must be contiguous from 0 (expected " + std::to_string(i) + ")");
    }
    if (r.chunk_size < 1) fail(t, id, "chunk_size must be positive");
    if (r.horizon < 1 || r.horizon > r.chunk_size) fail(t, id, "horizon must lie in [1, chunk_size]");
    if (i == 0) {
      if (r.trigger_action_index != 0) fail(t, id, "round 0 trigger_action_index must be 0");
    } else {
      const int prev_h = t.rounds[i - 1].horizon;
      if (r.trigger_action_index < 0 || r.trigger_action_index >= prev_h) {
        fail(t, id, "trigger_action_index " + std::to_string(r.trigger_action_index) +
                        " outside previous horizon [0, " + std::to_string(prev_h) + ")");
      }
    }
    if (r.update_magnitudes && r.update_magnitudes->actions() != r.chunk_size) {
      fail(t, id, "update_magnitudes width differs from chunk_size");
    }
    if (r.action_trajectory) {
      const auto& traj = *r.action_trajectory;
      if (static_cast<int>(traj.size()) != r.horizon) fail(t, id, "action_trajectory rows differ from horizon");
      for (const auto& a : traj) {
        if (a.size() != traj.front().size()) fail(t, id, "action_trajectory rows differ in dimension");
      }
    }
  }
}

std::string trace_to_json_line(const TaskTrace& t) {
  json rounds = json::array();
  for (const auto& r : t.rounds) {
    json jr = {{"round_id", r.round_id},
               {"trigger_action_index", r.trigger_action_index},
               {"horizon", r.horizon},
               {"chunk_size", r.chunk_size}};
    if (r.update_magnitudes) {
      json rows = json::array();
      for (int k = 0; k < r.update_magnitudes->steps(); ++k) {
        const auto row = r.update_magnitudes->step(k);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      jr["update_magnitudes"] = std::move(rows);
    }
    if (r.action_trajectory) jr["action_trajectory"] = *r.action_trajectory;
    rounds.push_back(std::move(jr));
  }
  json j = {{"task_id", t.task_id},
            {"control_hz", t.control_hz},
            {"obs_payload_bytes", t.obs_payload_bytes},
            {"action_payload_bytes", t.action_payload_bytes},
            {"success", t.success},
            {"rounds", std::move(rounds)}};
  return j.dump();
}

namespace {

TaskTrace trace_from_json(const json& j) {
  TaskTrace t;
  t.task_id = j.at("task_id").get<std::string>();
  t.control_hz = j.at("control_hz").get<int>();
  t.obs_payload_bytes = j.at("obs_payload_bytes").get<std::int64_t>();
  t.action_payload_bytes = j.at("action_payload_bytes").get<std::int64_t>();
  t.success = j.at("success").get<bool>();
  for (const auto& jr : j.at("rounds")) {
    RoundRecord r;
    r.round_id = jr.at("round_id").get<int>();
    r.trigger_action_index = jr.at("trigger_action_index").get<int>();
    r.horizon = jr.at("horizon").get<int>();
    r.chunk_size = jr.at("chunk_size").get<int>();
    if (auto it = jr.find("update_magnitudes"); it != jr.end() && !it->is_null()) {
      const auto rows = it->get<std::vector<std::vector<double>>>();
      const int steps = static_cast<int>(rows.size());
      const int width = rows.empty() ? 0 : static_cast<int>(rows.front().size());
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(steps) * static_cast<std::size_t>(width));
      for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != width) {
          throw TraceError("task " + t.task_id + " round " + std::to_string(r.round_id) +
                               ": ragged update_magnitudes",
                           0, t.task_id, r.round_id);
        }
        flat.insert(flat.end(), row.begin(), row.end());
      }
      try {
        r.update_magnitudes.emplace(steps, width, std::move(flat));
      } catch (const std::invalid_argument& e) {
        throw TraceError("task " + t.task_id + " round " + std::to_string(r.round_id) + ": " + e.what(),
                         0, t.task_id, r.round_id);
      }
    }
    if (auto it = jr.find("action_trajectory"); it != jr.end() && !it->is_null()) {
      r.action_trajectory = it->get<ActionTrajectory>();
    }
    t.rounds.push_back(std::move(r));
  }
  return t;
}

}  // namespace

std::vector<TaskTrace> read_traces(std::istream& in) {
  std::vector<TaskTrace> traces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    TaskTrace t;
    try {
      t = trace_from_json(json::parse(line));
      validate_trace(t);
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(line_no) + ": malformed trace record: " + e.what(),
                       line_no, "", -1);
    } catch (const TraceError& e) {
      throw TraceError("line " + std::to_string(line_no) + ": " + e.what(), line_no, e.task_id(),
                       e.round_id());
    }
    traces.push_back(std::move(t));
  }
  return traces;
}

void write_traces(std::span<const TaskTrace> traces, std::ostream& out) {
  for (const auto& t : traces) {
    validate_trace(t);
    out << trace_to_json_line(t) << '\n';
  }
}

std::vector<TaskTrace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return read_traces(in);
}

void store_traces(std::span<const TaskTrace> traces, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  write_traces(traces, out);
  if (!out) throw std::runtime_error("failed writing trace file " + path.string());
}

std::vector<TaskTrace> load_trace_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TaskTrace> traces;
  for (const auto& f : files) {
    try {
      auto part = load_traces(f);
      traces.insert(traces.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
    } catch (const TraceError& e) {
      throw TraceError(f.filename().string() + ": " + e.what(), e.line(), e.task_id(), e.round_id());
    }
  }
  return traces;
}

}  // namespace kairos
