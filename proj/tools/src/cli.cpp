#include "kairos/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kairos/experiment.hpp"
#include "kairos/workload.hpp"

namespace kairos {
namespace {

namespace fs = std::filesystem;

// Used when neither --edge-profile nor --cloud-only is given: batch-1 latency
// of 200 ms, saturating at batch 8.
EngineProfile default_edge_profile() {
  return EngineProfile(Tier::edge,
                       {{1, Duration{200'000}}, {2, Duration{230'000}}, {4, Duration{290'000}}, {8, Duration{420'000}}},
                       8, 8);
}

std::vector<TaskTrace> load_trace_path(const fs::path& p) {
  auto traces = fs::is_directory(p) ? load_trace_dir(p) : load_traces(p);
  if (traces.empty()) throw std::invalid_argument("no traces found in " + p.string());
  return traces;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct GenOptions {
  std::string spec_file;
  std::string policy = "confidence";
  int static_h = 20;
  double threshold = 0.4;
  int h_min = 5;
  std::optional<std::uint64_t> seed;
  std::optional<int> tasks;
  std::string out;
};

void cmd_gen_traces(const GenOptions& o, std::ostream& out) {
  SyntheticSpec spec = o.spec_file.empty() ? SyntheticSpec{} : load_synthetic_spec(o.spec_file);
  if (o.seed) spec.seed = *o.seed;
  if (o.tasks) spec.task_count = *o.tasks;
  spec.validate();

  FamilyPolicy policy;
  if (o.policy == "static") {
    policy = HorizonPolicyConfig::fixed(o.static_h);
  } else if (o.policy == "confidence") {
    policy = HorizonPolicyConfig::confidence(o.threshold, o.h_min);
  } else if (o.policy == "task-static") {
    policy = PerTaskStaticHorizon{};
  } else {
    throw std::invalid_argument("unknown horizon policy " + o.policy);
  }
  const auto traces = synthesize_family(spec, policy);
  const fs::path path = fs::path(o.out) / "traces.jsonl";
  fs::create_directories(o.out);
  store_traces(traces, path);
  out << "wrote " << traces.size() << " traces to " << path.string() << '\n';
}

struct RunOptions {
  std::string traces;
  std::vector<std::string> schedulers{"kairos"};
  std::vector<double> rates;
  std::vector<int> fleets;
  std::optional<int> tasks;
  int buckets = 10;
  int aging = 5;
  std::optional<std::int64_t> stale_threshold_us;
  std::string edge_profile;
  std::string cloud_profile;
  bool cloud_only = false;
  std::string network;
  std::string edge_network;
  std::vector<std::uint64_t> seeds{1};
  std::string planning = "event";
  std::int64_t planning_interval_us = 10'000;
  bool events = false;
  bool no_timestamp = false;
  int jobs = 1;
  std::string out;
};

std::string event_file_name(const CellSpec& c) {
  std::string load = c.load_label();
  std::replace(load.begin(), load.end(), '=', '_');
  return "events_" + std::string(to_string(c.scheduler)) + "_" + load + "_seed" + std::to_string(c.seed) + ".jsonl";
}

void cmd_run(const RunOptions& o, std::ostream& out) {
  if (o.rates.empty() == o.fleets.empty()) throw std::invalid_argument("give exactly one of --rate or --fleet");
  auto traces = load_trace_path(o.traces);
  if (o.tasks) {
    if (*o.tasks < 1) throw std::invalid_argument("--tasks must be >= 1");
    traces.resize(std::min(traces.size(), static_cast<std::size_t>(*o.tasks)));
  }

  SimConfig cfg;
  cfg.scheduler.buckets = o.buckets;
  cfg.scheduler.aging = o.aging;
  if (!o.cloud_only) cfg.edge = o.edge_profile.empty() ? default_edge_profile() : load_engine_profile(o.edge_profile);
  if (!o.cloud_profile.empty()) cfg.cloud = load_engine_profile(o.cloud_profile);
  // Observations older than one edge inference are stale by default.
  if (o.stale_threshold_us) {
    cfg.scheduler.stale_threshold = Duration{*o.stale_threshold_us};
  } else if (cfg.edge) {
    cfg.scheduler.stale_threshold = cfg.edge->batch_latency(1);
  }
  if (o.cloud_only && !cfg.cloud) throw std::invalid_argument("--cloud-only needs --cloud-profile");
  if (!o.network.empty()) cfg.cloud_link = load_network_model(o.network);
  if (!o.edge_network.empty()) cfg.edge_link = load_network_model(o.edge_network);
  if (o.planning == "interval") {
    cfg.planning = PlanningMode::fixed_interval;
  } else if (o.planning != "event") {
    throw std::invalid_argument("--planning must be event or interval");
  }
  cfg.planning_interval = Duration{o.planning_interval_us};
  cfg.validate();

  std::vector<CellSpec> cells;
  for (std::uint64_t seed : o.seeds) {
    for (const std::string& s : o.schedulers) {
      const SchedulingPolicy policy = parse_policy(s);
      for (double r : o.rates) cells.push_back(CellSpec{policy, LoadMode::rate, r, 1, seed});
      for (int f : o.fleets) cells.push_back(CellSpec{policy, LoadMode::fleet, 1.0, f, seed});
    }
  }
  const auto results = run_cells(traces, cells, cfg, o.jobs);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  const std::optional<std::string> stamp = o.no_timestamp ? std::nullopt : std::optional(utc_now());
  {
    auto f = open_out(dir / "results.csv");
    write_results_csv(results, f, stamp);
  }
  if (o.seeds.size() > 1) {
    std::map<std::uint64_t, std::vector<ExperimentResult>> by_seed;
    for (const auto& r : results) by_seed[r.cell.seed].push_back(r);
    for (const auto& [seed, rs] : by_seed) {
      auto f = open_out(dir / ("results_seed" + std::to_string(seed) + ".csv"));
      write_results_csv(rs, f, stamp);
    }
  }
  {
    auto f = open_out(dir / "summary.json");
    f << summary_json(results) << '\n';
  }
  if (o.events) {
    for (const auto& r : results) {
      auto f = open_out(dir / event_file_name(r.cell));
      write_event_log(r.events, f);
    }
  }
  for (const auto& r : results) {
    out << to_string(r.cell.scheduler) << ' ' << r.cell.load_label() << " seed=" << r.cell.seed
        << " avg_us=" << static_cast<std::int64_t>(r.summary.avg_us) << " p95_us=" << r.summary.p95_us
        << " offload=" << r.summary.offload_fraction << '\n';
  }
}

struct ParetoOptions {
  std::string traces;
  std::vector<int> static_h{10, 20, 30, 40, 50};
  std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0};
  int h_min = 5;
  std::string out;
};

void cmd_pareto(const ParetoOptions& o, std::ostream& out) {
  const auto traces = load_trace_path(o.traces);
  const auto rows = pareto_rows(traces, o.static_h, o.thresholds, o.h_min);
  if (o.out.empty()) {
    write_pareto_csv(rows, out);
    return;
  }
  auto f = open_out(fs::path(o.out) / "pareto.csv");
  write_pareto_csv(rows, f);
}

void report_error(std::ostream& err, std::string_view command, std::string_view type, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = type;
  j["command"] = command;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kairos: physical-AI inference serving simulator", "kairos"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen-traces", "Generate a synthetic trace family");
  g->add_option("--spec", gen.spec_file, "Synthetic spec JSON")->check(CLI::ExistingFile);
  g->add_option("--policy", gen.policy, "static | confidence | task-static")->capture_default_str();
  g->add_option("--static-h", gen.static_h, "Horizon of the static policy")->capture_default_str();
  g->add_option("--threshold", gen.threshold, "Confidence threshold t")->capture_default_str();
  g->add_option("--h-min", gen.h_min, "Minimum horizon of the confidence policy")->capture_default_str();
  g->add_option("--seed", gen.seed, "Override the spec seed");
  g->add_option("--tasks", gen.tasks, "Override the spec task count");
  g->add_option("--out", gen.out, "Output directory")->required();

  RunOptions run;
  auto* r = app.add_subcommand("run", "Replay traces under a scheduler");
  r->add_option("--traces", run.traces, "Trace file or directory")->required()->check(CLI::ExistingPath);
  r->add_option("--scheduler", run.schedulers, "kairos | fifo | las (repeatable)")->delimiter(',');
  r->add_option("--rate", run.rates, "Poisson task arrival rates per second")->delimiter(',');
  r->add_option("--fleet", run.fleets, "Fleet sizes for back-to-back replay")->delimiter(',');
  r->add_option("--tasks", run.tasks, "Use only the first N traces");
  r->add_option("--buckets", run.buckets, "Wait-ratio buckets B")->capture_default_str();
  r->add_option("--aging", run.aging, "Aging parameter A")->capture_default_str();
  r->add_option("--stale-threshold-us", run.stale_threshold_us, "Observation age that triggers a refetch");
  r->add_option("--edge-profile", run.edge_profile, "Edge engine profile JSON")->check(CLI::ExistingFile);
  r->add_option("--cloud-profile", run.cloud_profile, "Cloud engine profile JSON")->check(CLI::ExistingFile);
  r->add_flag("--cloud-only", run.cloud_only, "Serve from the cloud only");
  r->add_option("--network", run.network, "Edge-cloud link JSON (default 100 ms, 1 Gbps)")
      ->check(CLI::ExistingFile);
  r->add_option("--edge-network", run.edge_network, "Robot-edge link JSON (default ideal)")
      ->check(CLI::ExistingFile);
  r->add_option("--seed", run.seeds, "Seeds (repeatable)")->delimiter(',');
  r->add_option("--planning", run.planning, "event | interval")->capture_default_str();
  r->add_option("--planning-interval-us", run.planning_interval_us, "Interval planning period")
      ->capture_default_str();
  r->add_flag("--events", run.events, "Write one JSONL event log per cell");
  r->add_flag("--no-timestamp", run.no_timestamp, "Omit the generated_at line from CSV output");
  r->add_option("--jobs", run.jobs, "Worker threads")->capture_default_str();
  r->add_option("--out", run.out, "Output directory")->required();

  ParetoOptions par;
  auto* p = app.add_subcommand("pareto", "Mean horizon and success fraction per policy setting");
  p->add_option("--traces", par.traces, "Trace file or directory")->required()->check(CLI::ExistingPath);
  p->add_option("--static", par.static_h, "Static horizons")->delimiter(',');
  p->add_option("--thresholds", par.thresholds, "Confidence thresholds")->delimiter(',');
  p->add_option("--h-min", par.h_min, "Minimum horizon of the confidence policy")->capture_default_str();
  p->add_option("--out", par.out, "Output directory (stdout when omitted)");

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "", "usage", e.what());
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "gen-traces") cmd_gen_traces(gen, out);
    if (command == "run") cmd_run(run, out);
    if (command == "pareto") cmd_pareto(par, out);
  } catch (const TraceError& e) {
    report_error(err, command, "trace", e.what());
    return 1;
  } catch (const SimulationError& e) {
    report_error(err, command, "simulation", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    report_error(err, command, "invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, command, "runtime", e.what());
    return 1;
  }
  return 0;
}

}  // namespace kairos
