#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "rampopt/config.hpp"
#include "rampopt/cost.hpp"
#include "rampopt/optimizer.hpp"

namespace rampopt {

// Canonical filenames inside a run directory.
struct RunPaths {
  std::string dir, config, log, convergence, best, landscape;
};
RunPaths run_paths(const std::string& dir);

// Loads a config file and applies the command-line overrides.
RunConfig resolve_config(const std::string& path,
                         std::optional<std::uint64_t> seed,
                         std::optional<std::string> out_dir);

struct RunOutcome {
  RunConfig config;  // fully resolved, as saved into the run directory
  OptimizationResult result;
  RunPaths paths;
};

// One optimization run with full artifacts: resolved config, per-evaluation
// JSONL log (flushed as it grows), convergence curve, best point, and a
// surrogate landscape slice when one exists. 'initial_override' replaces the
// scenario's default start (used by warm-started sweeps) and is recorded in
// the saved config so the run stays self-describing.
RunOutcome run_single(const RunConfig& cfg,
                      const Eigen::VectorXd* initial_override = nullptr);

struct SweepRow {
  double duration_ms = 0.0;
  std::string kind;
  int evaluations = 0;
  int failures = 0;
  int best_index = -1;
  double best_total = 0.0;
  double best_oscillation = 0.0;
  double best_range = 0.0;
  double best_width = 0.0;
};

// Descending-duration transport sweep; each duration warm-starts from the
// previous best ramp shape. Writes one run directory per duration plus
// summary.csv.
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

// Rebuilds summary.csv purely from the per-duration run directories;
// running it twice produces byte-identical files.
std::vector<SweepRow> regenerate_sweep_summary(const std::string& sweep_dir,
                                               const std::vector<double>& durations_ms);

struct DampingOutcome {
  CostReport baseline_cost, best_cost;
  double baseline_amplitude = 0.0, best_amplitude = 0.0;  // detector x series
  double baseline_energy = 0.0, best_energy = 0.0;        // J, at measure start
  int best_index = -1;
  RunPaths paths;
};

// Baseline (zero-control) shot, an optimization of the control window, and
// a side-by-side report (damping_report.json).
DampingOutcome run_damping(const RunConfig& cfg);

// Re-executes a logged run from its saved config and compares every
// observation bit for bit; throws ReplayMismatchError at the first
// divergence. Returns the number of verified evaluations.
int replay_run(const std::string& run_dir);

struct TraceOptions {
  // Where the traced parameters come from: an explicit vector wins, then a
  // recorded run's best point, then the scenario default.
  std::vector<double> params;
  std::string from_run_dir;
  int interlace = 4;
};

// Probes the motion throughout the ramp and the following hold with
// interlaced pulse trains, writing <out>/trace.csv sorted by pulse time.
// Returns the number of rows written.
int run_trace(const RunConfig& cfg, const TraceOptions& opts);

struct IngestOutcome {
  CostReport cost;
  long events = 0;
  long dropped = 0;
  int pulses_with_data = 0;
};

// Scores a recorded event stream against the config's pulse timing; when
// 'out_dir' is non-empty, also writes records.csv and cost.json there.
IngestOutcome run_ingest(const RunConfig& cfg, const std::string& events_path,
                         const std::string& out_dir);

// CLI entry points; each prints a short summary to stdout and throws a
// rampopt Error on failure.
void cmd_optimize(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);
void cmd_damping(const RunConfig& cfg);
void cmd_replay(const std::string& run_dir);
void cmd_trace(const RunConfig& cfg, const TraceOptions& opts);
void cmd_ingest(const RunConfig& cfg, const std::string& events_path);

}  // namespace rampopt
