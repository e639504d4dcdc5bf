#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rampopt/config.hpp"
#include "rampopt/errors.hpp"
#include "rampopt/harness.hpp"

namespace {

int exit_code_for(const rampopt::Error& e) {
  const std::string& c = e.category();
  if (c == "config") return 3;
  if (c == "bounds" || c == "domain" || c == "untrappable") return 4;
  if (c == "io") return 5;
  if (c == "coverage") return 6;
  if (c == "numerical") return 7;
  if (c == "insufficient-data") return 8;
  if (c == "replay-mismatch") return 9;
  return 1;
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args->config_path, "run configuration file");
  if (config_required) opt->required();
  cmd->add_option("--seed", [args](const CLI::results_t& r) {
    args->seed = std::stoull(r.at(0));
    return true;
  }, "override the master seed");
  cmd->add_option("--out", [args](const CLI::results_t& r) {
    args->out_dir = r.at(0);
    return true;
  }, "override the output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop ramp optimization for a simulated cold-atom transport rig"};
  app.require_subcommand(1);

  CommonArgs optimize_args, sweep_args, damping_args, trace_args, ingest_args;
  std::string replay_dir, replay_config;
  rampopt::TraceOptions trace_opts;
  std::string ingest_events;

  auto* optimize =
      app.add_subcommand("optimize", "run one closed-loop optimization");
  add_common(optimize, &optimize_args);

  auto* sweep = app.add_subcommand(
      "sweep", "optimize a descending ladder of ramp durations, warm-started");
  add_common(sweep, &sweep_args);

  auto* damping = app.add_subcommand(
      "damping", "optimize the post-transport oscillation-damping window");
  add_common(damping, &damping_args);

  auto* trace = app.add_subcommand(
      "trace", "probe the in-trap motion along a ramp with interlaced pulses");
  add_common(trace, &trace_args);
  trace->add_option("--params", trace_opts.params,
                    "explicit ramp parameters (comma separated)")
      ->delimiter(',');
  trace->add_option("--run", trace_opts.from_run_dir,
                    "take the parameters from this run directory's best point");
  trace->add_option("--interlace", trace_opts.interlace,
                    "interleaved pulse trains per period")
      ->check(CLI::PositiveNumber);

  auto* replay = app.add_subcommand(
      "replay", "re-execute a logged run and verify it bit for bit");
  replay->add_option("--run", replay_dir, "run directory to verify")->required();
  replay->add_option("--config", replay_config,
                     "ignored; the run directory's own config governs");

  auto* ingest = app.add_subcommand(
      "ingest", "recompute the cost of a recorded detector event stream");
  add_common(ingest, &ingest_args);
  ingest->add_option("--events", ingest_events, "event stream (t,x,y csv)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) {
      rampopt::cmd_optimize(rampopt::resolve_config(
          optimize_args.config_path, optimize_args.seed, optimize_args.out_dir));
    } else if (sweep->parsed()) {
      rampopt::cmd_sweep(rampopt::resolve_config(sweep_args.config_path,
                                                 sweep_args.seed,
                                                 sweep_args.out_dir));
    } else if (damping->parsed()) {
      rampopt::cmd_damping(rampopt::resolve_config(
          damping_args.config_path, damping_args.seed, damping_args.out_dir));
    } else if (trace->parsed()) {
      rampopt::cmd_trace(rampopt::resolve_config(trace_args.config_path,
                                                 trace_args.seed,
                                                 trace_args.out_dir),
                         trace_opts);
    } else if (replay->parsed()) {
      rampopt::cmd_replay(replay_dir);
    } else if (ingest->parsed()) {
      rampopt::cmd_ingest(rampopt::resolve_config(ingest_args.config_path,
                                                  ingest_args.seed,
                                                  ingest_args.out_dir),
                          ingest_events);
    }
  } catch (const rampopt::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << std::endl;
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
