#include "rampopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rampopt/errors.hpp"
#include "rampopt/experiment.hpp"
#include "rampopt/rng.hpp"
#include "rampopt/runlog.hpp"

namespace rampopt {

namespace fs = std::filesystem;

namespace {

// Directory names like d200 or d62.5 stay readable and unambiguous.
std::string duration_tag(double ms) {
  std::ostringstream os;
  os << "d" << ms;
  return os.str();
}

Eigen::VectorXd config_initial(const RunConfig& cfg, const Experiment& exp) {
  if (cfg.initial_params.empty()) return exp.initial_params();
  if (static_cast<Eigen::Index>(cfg.initial_params.size()) !=
      exp.space().dimension()) {
    std::ostringstream os;
    os << "optimizer.initial_params has " << cfg.initial_params.size()
       << " entries but the scenario exposes " << exp.space().dimension()
       << " parameters";
    throw ConfigError(os.str());
  }
  Eigen::VectorXd p(exp.space().dimension());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    p[k] = cfg.initial_params[static_cast<std::size_t>(k)];
  }
  return p;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

double nan_to(double x, double fallback) { return std::isfinite(x) ? x : fallback; }

bool bit_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return a == b;
}

void compare_observation(const Observation& logged, const Observation& live) {
  const auto fail = [&](const std::string& field, double was, double is) {
    std::ostringstream os;
    os.precision(17);
    os << "evaluation " << live.index << " diverged in " << field << ": logged "
       << was << ", replayed " << is;
    throw ReplayMismatchError(os.str());
  };
  if (logged.index != live.index) {
    fail("index", logged.index, live.index);
  }
  if (logged.source != live.source) {
    std::ostringstream os;
    os << "evaluation " << live.index << " diverged in source: logged "
       << to_string(logged.source) << ", replayed " << to_string(live.source);
    throw ReplayMismatchError(os.str());
  }
  if (logged.unit.size() != live.unit.size()) {
    fail("dimension", static_cast<double>(logged.unit.size()),
         static_cast<double>(live.unit.size()));
  }
  for (Eigen::Index k = 0; k < logged.unit.size(); ++k) {
    if (!bit_equal(logged.unit[k], live.unit[k])) {
      fail("unit[" + std::to_string(k) + "]", logged.unit[k], live.unit[k]);
    }
    if (!bit_equal(logged.raw[k], live.raw[k])) {
      fail("raw[" + std::to_string(k) + "]", logged.raw[k], live.raw[k]);
    }
  }
  if (logged.report.failed != live.report.failed) {
    fail("failed", logged.report.failed ? 1.0 : 0.0,
         live.report.failed ? 1.0 : 0.0);
  }
  if (!bit_equal(logged.report.total, live.report.total)) {
    fail("total", logged.report.total, live.report.total);
  }
  if (!bit_equal(logged.report.oscillation_cost, live.report.oscillation_cost)) {
    fail("oscillation", logged.report.oscillation_cost,
         live.report.oscillation_cost);
  }
  if (!bit_equal(logged.report.range_penalty, live.report.range_penalty)) {
    fail("range", logged.report.range_penalty, live.report.range_penalty);
  }
  if (!bit_equal(logged.report.width_cost, live.report.width_cost)) {
    fail("width", logged.report.width_cost, live.report.width_cost);
  }
  if (logged.report.total_detections != live.report.total_detections) {
    fail("detections", static_cast<double>(logged.report.total_detections),
         static_cast<double>(live.report.total_detections));
  }
  if (logged.eval_seed != live.eval_seed) {
    fail("eval_seed", static_cast<double>(logged.eval_seed),
         static_cast<double>(live.eval_seed));
  }
}

std::vector<SweepRow> write_summary_csv(const std::string& path,
                                        std::vector<SweepRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  out << "duration_ms,kind,evaluations,failures,best_index,best_total,"
         "best_oscillation,best_range,best_width\n";
  for (const SweepRow& r : rows) {
    out << r.duration_ms << ',' << r.kind << ',' << r.evaluations << ','
        << r.failures << ',' << r.best_index << ',';
    if (r.best_index < 0) {
      out << "nan,nan,nan,nan";
    } else {
      out << r.best_total << ',' << r.best_oscillation << ',' << r.best_range << ','
          << r.best_width;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
  return rows;
}

SweepRow row_from_run(const std::string& run_dir) {
  const RunPaths paths = run_paths(run_dir);
  const RunConfig cfg = load_config_file(paths.config);
  const std::vector<Observation> history = read_run_log(paths.log);

  SweepRow row;
  row.duration_ms = cfg.duration_ms;
  row.kind = to_string(cfg.ramp_kind);
  row.evaluations = static_cast<int>(history.size());
  for (const Observation& o : history) {
    if (o.report.failed) {
      ++row.failures;
      continue;
    }
    if (row.best_index < 0 || o.report.total < row.best_total) {
      row.best_index = o.index;
      row.best_total = o.report.total;
      row.best_oscillation = o.report.oscillation_cost;
      row.best_range = o.report.range_penalty;
      row.best_width = o.report.width_cost;
    }
  }
  return row;
}

}  // namespace

RunPaths run_paths(const std::string& dir) {
  RunPaths p;
  p.dir = dir;
  p.config = (fs::path(dir) / "config.cfg").string();
  p.log = (fs::path(dir) / "log.jsonl").string();
  p.convergence = (fs::path(dir) / "convergence.csv").string();
  p.best = (fs::path(dir) / "best.json").string();
  p.landscape = (fs::path(dir) / "landscape.json").string();
  return p;
}

RunConfig resolve_config(const std::string& path,
                         std::optional<std::uint64_t> seed,
                         std::optional<std::string> out_dir) {
  RunConfig cfg = load_config_file(path);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  return cfg;
}

RunOutcome run_single(const RunConfig& cfg_in, const Eigen::VectorXd* override_p) {
  RunConfig cfg = cfg_in;
  if (cfg.out_dir.empty()) throw ConfigError("run.out (or --out) is required");
  validate(cfg);

  const auto experiment = make_experiment(cfg);
  Eigen::VectorXd initial =
      override_p ? *override_p : config_initial(cfg, *experiment);
  // Record the actual starting point so the directory replays standalone.
  cfg.initial_params.assign(initial.data(), initial.data() + initial.size());

  const RunPaths paths = run_paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  save_config_file(paths.config, cfg);

  OptimizerSettings settings = optimizer_from_config(cfg);
  RunLogWriter log(paths.log);

  RunOutcome outcome;
  outcome.config = cfg;
  outcome.paths = paths;
  outcome.result = run_optimization(
      experiment->space(), initial, settings, cfg.seed,
      [&](const Eigen::VectorXd& raw, std::uint64_t eval_seed) {
        return experiment->evaluate(raw, eval_seed);
      },
      [&](const Observation& obs) { log.append(obs); });

  write_convergence_csv(paths.convergence, outcome.result.history);
  if (outcome.result.best_index >= 0) {
    const Observation& best = outcome.result.best();
    if (outcome.result.has_surrogate && experiment->space().dimension() >= 2) {
      const LandscapeSlice slice =
          landscape_slice(outcome.result.surrogate, best.unit, 41, 0.25,
                          settings.exec);
      write_landscape_json(paths.landscape, slice);
      write_best_json(paths.best, best, &slice);
    } else {
      write_best_json(paths.best, best);
    }
  }
  return outcome;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  if (cfg.scenario != Scenario::Transport) {
    throw ConfigError("duration sweeps are defined for the transport scenario");
  }
  if (cfg.out_dir.empty()) throw ConfigError("run.out (or --out) is required");
  validate(cfg);
  ensure_dir(cfg.out_dir);

  Eigen::VectorXd warm;
  bool have_warm = false;
  std::vector<std::string> run_dirs;
  for (std::size_t i = 0; i < cfg.sweep_durations_ms.size(); ++i) {
    RunConfig sub = cfg;
    sub.duration_ms = cfg.sweep_durations_ms[i];
    sub.out_dir =
        (fs::path(cfg.out_dir) / duration_tag(sub.duration_ms)).string();
    sub.seed = derive_seed(cfg.seed, "sweep", static_cast<std::uint64_t>(i));
    sub.initial_params.clear();

    const RunOutcome outcome =
        run_single(sub, have_warm ? &warm : nullptr);
    run_dirs.push_back(outcome.paths.dir);
    if (outcome.result.best_index >= 0) {
      // The knot/ratio parameterization is duration-free, so the best shape
      // transfers to the next (shorter) duration unchanged.
      warm = outcome.result.best().raw;
      have_warm = true;
    }
  }

  return regenerate_sweep_summary(cfg.out_dir, cfg.sweep_durations_ms);
}

std::vector<SweepRow> regenerate_sweep_summary(
    const std::string& sweep_dir, const std::vector<double>& durations_ms) {
  std::vector<SweepRow> rows;
  for (double ms : durations_ms) {
    rows.push_back(
        row_from_run((fs::path(sweep_dir) / duration_tag(ms)).string()));
  }
  return write_summary_csv((fs::path(sweep_dir) / "summary.csv").string(),
                           std::move(rows));
}

DampingOutcome run_damping(const RunConfig& cfg) {
  if (cfg.scenario != Scenario::Damping) {
    throw ConfigError("run_damping needs the damping scenario");
  }
  if (cfg.out_dir.empty()) throw ConfigError("run.out (or --out) is required");
  validate(cfg);
  ensure_dir(cfg.out_dir);

  DampingExperiment experiment(cfg);
  const double omega_x = experiment.resting_trap().omega_x;
  const FieldPoint rest_field = field_from_trap(experiment.resting_trap());

  const auto amplitude_of = [&](const ShotResult& shot) {
    std::vector<double> t, x;
    const PulseTrain& train = experiment.pulse_prototype();
    for (const DetectionRecord& r : shot.records) {
      if (r.count <= 0) continue;
      t.push_back(train.period * static_cast<double>(r.pulse_index));
      x.push_back(r.mean[0]);
    }
    if (t.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    return fit_sinusoid_known_frequency(t, x, omega_x).amplitude;
  };

  DampingOutcome out;
  const ShotResult baseline = experiment.run_shot(
      experiment.baseline_params(), derive_seed(cfg.seed, "baseline"));
  out.baseline_cost = baseline.cost;
  out.baseline_amplitude = amplitude_of(baseline);
  out.baseline_energy =
      com_energy(baseline.measure_start, rest_field, experiment.atom_mass());

  RunConfig run_cfg = cfg;
  run_cfg.out_dir = (fs::path(cfg.out_dir) / "run").string();
  const RunOutcome opt = run_single(run_cfg);
  out.paths = opt.paths;
  out.best_index = opt.result.best_index;
  if (opt.result.best_index >= 0) {
    const Observation& best = opt.result.best();
    const ShotResult best_shot = experiment.run_shot(best.raw, best.eval_seed);
    out.best_cost = best_shot.cost;
    out.best_amplitude = amplitude_of(best_shot);
    out.best_energy =
        com_energy(best_shot.measure_start, rest_field, experiment.atom_mass());
  } else {
    out.best_cost = baseline.cost;
    out.best_cost.failed = true;
  }

  nlohmann::json j;
  j["baseline"] = {{"total", nan_to(out.baseline_cost.total, -1.0)},
                   {"oscillation", nan_to(out.baseline_cost.oscillation_cost, -1.0)},
                   {"amplitude_x", nan_to(out.baseline_amplitude, -1.0)},
                   {"com_energy", out.baseline_energy},
                   {"detections", out.baseline_cost.total_detections}};
  j["best"] = {{"index", out.best_index},
               {"total", nan_to(out.best_cost.total, -1.0)},
               {"oscillation", nan_to(out.best_cost.oscillation_cost, -1.0)},
               {"amplitude_x", nan_to(out.best_amplitude, -1.0)},
               {"com_energy", out.best_energy},
               {"detections", out.best_cost.total_detections}};
  if (out.best_index >= 0 && out.best_cost.total > 0.0) {
    j["cost_ratio"] = out.baseline_cost.total / out.best_cost.total;
  }
  if (out.best_index >= 0 && out.best_amplitude > 0.0) {
    j["amplitude_ratio"] = out.baseline_amplitude / out.best_amplitude;
  }
  std::ofstream report((fs::path(cfg.out_dir) / "damping_report.json").string());
  if (!report) throw IoError("cannot write damping report");
  report << j.dump(2) << '\n';
  return out;
}

int replay_run(const std::string& run_dir) {
  const RunPaths paths = run_paths(run_dir);
  if (!fs::exists(paths.config) || !fs::exists(paths.log)) {
    throw IoError("'" + run_dir + "' does not look like a run directory");
  }
  const RunConfig cfg = load_config_file(paths.config);
  const std::vector<Observation> logged = read_run_log(paths.log);
  if (logged.empty()) throw IoError("run log is empty");

  const auto experiment = make_experiment(cfg);
  const Eigen::VectorXd initial = config_initial(cfg, *experiment);
  const OptimizerSettings settings = optimizer_from_config(cfg);

  std::size_t next = 0;
  run_optimization(
      experiment->space(), initial, settings, cfg.seed,
      [&](const Eigen::VectorXd& raw, std::uint64_t eval_seed) {
        return experiment->evaluate(raw, eval_seed);
      },
      [&](const Observation& obs) {
        if (next >= logged.size()) {
          throw ReplayMismatchError("replay produced more evaluations than logged");
        }
        compare_observation(logged[next], obs);
        ++next;
      });
  if (next != logged.size()) {
    std::ostringstream os;
    os << "replay produced " << next << " evaluations, log holds " << logged.size();
    throw ReplayMismatchError(os.str());
  }
  return static_cast<int>(next);
}

int run_trace(const RunConfig& cfg, const TraceOptions& opts) {
  if (cfg.scenario != Scenario::Transport) {
    throw ConfigError("trace is defined for the transport scenario");
  }
  if (cfg.out_dir.empty()) throw ConfigError("run.out (or --out) is required");
  if (opts.interlace < 1) throw DomainError("interlace must be at least 1");
  validate(cfg);

  TransportExperiment experiment(cfg);
  Eigen::VectorXd params;
  if (!opts.params.empty()) {
    params.resize(static_cast<Eigen::Index>(opts.params.size()));
    for (std::size_t k = 0; k < opts.params.size(); ++k) {
      params[static_cast<Eigen::Index>(k)] = opts.params[k];
    }
  } else if (!opts.from_run_dir.empty()) {
    std::ifstream best_in(run_paths(opts.from_run_dir).best);
    if (!best_in) {
      throw IoError("cannot open best.json under '" + opts.from_run_dir + "'");
    }
    nlohmann::json j;
    best_in >> j;
    const auto& raw = j.at("raw");
    params.resize(static_cast<Eigen::Index>(raw.size()));
    for (std::size_t k = 0; k < raw.size(); ++k) {
      params[static_cast<Eigen::Index>(k)] = raw[k].get<double>();
    }
  } else {
    params = experiment.initial_params();
  }
  if (params.size() != experiment.space().dimension()) {
    throw DomainError("trace parameter dimension mismatch");
  }

  // One fine-step trajectory spanning ramp plus measurement hold, so pulses
  // can probe the motion during the transformation itself.
  const RampSpec spec = experiment.ramp_for(params);
  Trajectory traj = evolve(experiment.start_state(), spec, experiment.calibration(),
                           experiment.ramp_step(), spec.duration,
                           experiment.loss());
  const PulseTrain& proto = experiment.pulse_prototype();
  const double hold_needed =
      experiment.settle() +
      proto.period * (static_cast<double>(proto.pulse_count - 1) + 0.5);
  const double hold_window =
      std::ceil(hold_needed / traj.dt) * traj.dt;
  traj = extend(std::move(traj), make_linear(spec.end, spec.end, hold_window),
                experiment.calibration(), hold_window, experiment.loss());

  const FreeFall fall{proto.fall_distance, k_gravity};
  const double t_fall = fall.fall_time();

  struct Row {
    double t, vstar_x, mean_x, x, v_x, b_x, b_y, b_z, atoms;
  };
  std::vector<Row> rows;
  for (int j = 0; j < opts.interlace; ++j) {
    PulseTrain train = proto;
    train.start_time =
        traj.t0 + proto.period * static_cast<double>(j) /
                      static_cast<double>(opts.interlace);
    train.pulse_count = static_cast<int>(
        std::floor((traj.t_end() - train.start_time) / train.period)) + 1;
    const PulseSimResult sim = simulate_pulses(
        traj, train, experiment.cloud(), 0.0,
        derive_seed(cfg.seed, "trace", static_cast<std::uint64_t>(j)),
        Exec::Serial);
    for (const DetectionRecord& r : sim.records) {
      const double t_p =
          train.start_time + train.period * static_cast<double>(r.pulse_index);
      const CondensateState s = traj.state_at(t_p);
      rows.push_back({t_p, r.mean[0] / t_fall, r.mean[0], s.axes[0].position,
                      s.axes[0].velocity, s.axes[0].scale, s.axes[1].scale,
                      s.axes[2].scale, s.atom_number});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t < b.t; });

  ensure_dir(cfg.out_dir);
  std::ofstream out((fs::path(cfg.out_dir) / "trace.csv").string());
  if (!out) throw IoError("cannot write trace.csv");
  out.precision(17);
  out << "t,vstar_x,mean_x,x,v_x,b_x,b_y,b_z,atoms\n";
  for (const Row& r : rows) {
    out << r.t << ',' << r.vstar_x << ',' << r.mean_x << ',' << r.x << ','
        << r.v_x << ',' << r.b_x << ',' << r.b_y << ',' << r.b_z << ','
        << r.atoms << '\n';
  }
  if (!out) throw IoError("failed writing trace.csv");
  return static_cast<int>(rows.size());
}

IngestOutcome run_ingest(const RunConfig& cfg, const std::string& events_path,
                         const std::string& out_dir) {
  validate(cfg);
  PulseTrain train = pulses_from_config(cfg);
  // The stream carries absolute times; the config pins when the pulse train
  // started.
  switch (cfg.scenario) {
    case Scenario::Transport:
      train.start_time = cfg.duration_ms * 1e-3 + cfg.settle_ms * 1e-3;
      break;
    case Scenario::Damping:
      train.start_time =
          (cfg.induce_ms + cfg.control_ms + cfg.settle_ms) * 1e-3;
      break;
    case Scenario::Sphere:
      throw ConfigError("the sphere scenario records no detector events");
  }

  std::ifstream in(events_path);
  if (!in) throw IoError("cannot open event stream '" + events_path + "'");
  const std::vector<Event> events = read_events_csv(in);

  BinDiagnostics diag;
  const std::vector<DetectionRecord> records = bin_events(events, train, &diag);
  IngestOutcome out;
  out.cost = robust_cost(records, weights_from_config(cfg));
  out.events = static_cast<long>(events.size());
  out.dropped = diag.dropped;
  for (const DetectionRecord& r : records) {
    if (r.count > 0) ++out.pulses_with_data;
  }

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream rec((fs::path(out_dir) / "records.csv").string());
    write_records_csv(rec, records);
    nlohmann::json j;
    j["failed"] = out.cost.failed;
    j["total"] = out.cost.failed ? nlohmann::json(nullptr)
                                 : nlohmann::json(out.cost.total);
    j["oscillation"] = out.cost.failed
                           ? nlohmann::json(nullptr)
                           : nlohmann::json(out.cost.oscillation_cost);
    j["range"] = out.cost.failed ? nlohmann::json(nullptr)
                                 : nlohmann::json(out.cost.range_penalty);
    j["width"] = out.cost.failed ? nlohmann::json(nullptr)
                                 : nlohmann::json(out.cost.width_cost);
    j["detections"] = out.cost.total_detections;
    j["events"] = out.events;
    j["dropped"] = out.dropped;
    j["pulses_with_data"] = out.pulses_with_data;
    std::ofstream cj((fs::path(out_dir) / "cost.json").string());
    if (!cj) throw IoError("cannot write cost.json");
    cj << j.dump(2) << '\n';
  }
  return out;
}

void cmd_optimize(const RunConfig& cfg) {
  const RunOutcome outcome = run_single(cfg);
  std::cout << "run " << outcome.paths.dir << ": "
            << outcome.result.history.size() << " evaluations";
  if (outcome.result.best_index >= 0) {
    const Observation& best = outcome.result.best();
    std::cout << ", best " << best.report.total << " at evaluation " << best.index;
  } else {
    std::cout << ", every evaluation failed";
  }
  std::cout << std::endl;
}

void cmd_sweep(const RunConfig& cfg) {
  const std::vector<SweepRow> rows = run_sweep(cfg);
  for (const SweepRow& r : rows) {
    std::cout << r.duration_ms << " ms: ";
    if (r.best_index >= 0) {
      std::cout << "best " << r.best_total;
    } else {
      std::cout << "all failed";
    }
    std::cout << " (" << r.failures << "/" << r.evaluations << " failures)"
              << std::endl;
  }
}

void cmd_damping(const RunConfig& cfg) {
  const DampingOutcome out = run_damping(cfg);
  std::cout << "baseline cost " << out.baseline_cost.total << ", amplitude "
            << out.baseline_amplitude << " m" << std::endl;
  if (out.best_index >= 0) {
    std::cout << "best cost " << out.best_cost.total << ", amplitude "
              << out.best_amplitude << " m (evaluation " << out.best_index << ")"
              << std::endl;
  } else {
    std::cout << "optimization failed on every evaluation" << std::endl;
  }
}

void cmd_replay(const std::string& run_dir) {
  const int n = replay_run(run_dir);
  std::cout << "replay verified: " << n << " evaluations match" << std::endl;
}

void cmd_trace(const RunConfig& cfg, const TraceOptions& opts) {
  const int rows = run_trace(cfg, opts);
  std::cout << "trace.csv: " << rows << " pulses" << std::endl;
}

void cmd_ingest(const RunConfig& cfg, const std::string& events_path) {
  const IngestOutcome out = run_ingest(cfg, events_path, cfg.out_dir);
  nlohmann::json j;
  j["failed"] = out.cost.failed;
  if (!out.cost.failed) {
    j["total"] = out.cost.total;
    j["oscillation"] = out.cost.oscillation_cost;
    j["range"] = out.cost.range_penalty;
    j["width"] = out.cost.width_cost;
  }
  j["detections"] = out.cost.total_detections;
  j["events"] = out.events;
  j["dropped"] = out.dropped;
  j["pulses_with_data"] = out.pulses_with_data;
  std::cout << j.dump() << std::endl;
}

}  // namespace rampopt
