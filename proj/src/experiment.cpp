#include "rampopt/experiment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "rampopt/errors.hpp"
#include "rampopt/rng.hpp"

namespace rampopt {

namespace {

constexpr double k_two_pi = 6.283185307179586476925287;
// Integration steps per shortest trap period; comfortably above the
// integrator's own 200-step floor.
constexpr double k_steps_per_period = 240.0;

double step_for(double omega_max) { return k_two_pi / (k_steps_per_period * omega_max); }

// Upper bound on the trap frequency over a control box: the map grows with
// both currents, so the box corner dominates.
double omega_max_for_controls(const CurrentMapCalibration& cal, double v1_hi,
                              double v2_hi) {
  const TrapConfiguration corner =
      cal.currents_from_controls(ControlInputs{v1_hi, std::max(0.0, v2_hi)});
  return cal.evaluate(corner).omega_max();
}

// Measurement window: settle, then the pulse span, then half a period of
// slack so the last pulse stays strictly inside the trajectory.
double hold_window(const PulseTrain& train, double settle) {
  return settle + train.period * (static_cast<double>(train.pulse_count - 1) + 0.5);
}

// Supply imperfection: each shot realizes the programmed controls through
// slightly mis-set channel gains — one relative error per channel, frozen
// for the whole shot. Drawn from the shot seed so replays reproduce it.
// Preparation (the stationary start state, the fixed excitation plunge) is
// not re-derived: the error is shot-to-shot, not a slow drift the cloud
// could equilibrate to.
CurrentMapCalibration jittered_calibration(const CurrentMapCalibration& cal,
                                           double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return cal;
  auto rng = engine_for(seed, "actuation");
  std::normal_distribution<double> n01(0.0, 1.0);
  const double e1 = sigma * n01(rng);
  const double e2 = sigma * n01(rng);
  CurrentMapCalibration shot = cal;
  shot.set_gains(cal.gain_k1() * (1.0 + e1), cal.gain_k2() * (1.0 + e2));
  return shot;
}

ShotResult score_shot(const Trajectory& hold_traj, PulseTrain train, double settle,
                      const CloudShape& shape, const CostWeights& weights,
                      double hold_omega_max, bool noise, std::uint64_t seed) {
  train.start_time = hold_traj.t0 + settle;
  ShotResult shot;
  shot.sim = simulate_pulses(hold_traj, train, shape, hold_omega_max, seed,
                             Exec::Serial);
  shot.records = noise ? bin_events(shot.sim.events, train) : shot.sim.records;
  shot.cost = robust_cost(shot.records, weights);
  shot.measure_start = hold_traj.state_at(train.start_time);
  return shot;
}

}  // namespace

CurrentMapCalibration calibration_from_config(const RunConfig& cfg) {
  CurrentMapCalibration::Anchor initial;
  initial.currents = {cfg.quad_initial_a, cfg.bias_initial_a};
  initial.omega_axial = k_two_pi * cfg.axial_initial_hz;
  initial.omega_radial = k_two_pi * cfg.radial_initial_hz;
  CurrentMapCalibration::Anchor final_state;
  final_state.currents = {cfg.quad_final_a, cfg.bias_final_a};
  final_state.omega_axial = k_two_pi * cfg.axial_final_hz;
  final_state.omega_radial = k_two_pi * cfg.radial_final_hz;
  CurrentMapCalibration cal = CurrentMapCalibration::fit(
      initial, final_state, cfg.displacement_mm * 1e-3, cfg.escape_velocity_initial,
      cfg.escape_velocity_final, cfg.atom_mass_kg);
  cal.set_gains(cfg.gain_k1, cfg.gain_k2);
  cal.set_current_limits(cfg.min_quad_a, cfg.max_current_a);
  return cal;
}

CostWeights weights_from_config(const RunConfig& cfg) {
  CostWeights w;
  w.width_threshold = cfg.width_threshold_mm * 1e-3;
  w.width_scale = cfg.width_scale;
  w.range_threshold = cfg.range_threshold_mm * 1e-3;
  w.range_scale = cfg.range_scale;
  w.min_detections = cfg.min_detections;
  w.range_mode = cfg.range_componentwise ? CostWeights::RangeMode::Componentwise
                                         : CostWeights::RangeMode::Scalar;
  return w;
}

PulseTrain pulses_from_config(const RunConfig& cfg) {
  PulseTrain t;
  t.period = cfg.pulse_period_ms * 1e-3;
  t.pulse_count = cfg.pulse_count;
  t.outcoupled_fraction = cfg.outcoupled_fraction;
  t.detection_efficiency = cfg.detection_efficiency;
  t.fall_distance = cfg.fall_distance_m;
  t.resolution_xy = cfg.resolution_xy_um * 1e-6;
  t.resolution_z = cfg.resolution_z_um * 1e-6;
  // The plate sits under the resting cloud at the end of the path.
  t.detector_center = cfg.displacement_mm * 1e-3;
  t.detector_halfwidth = cfg.detector_halfwidth_mm * 1e-3;
  return t;
}

CloudShape cloud_from_config(const RunConfig& cfg) {
  return CloudShape{{cfg.width0_x_um * 1e-6, cfg.width0_y_um * 1e-6,
                     cfg.width0_z_um * 1e-6}};
}

OptimizerSettings optimizer_from_config(const RunConfig& cfg) {
  OptimizerSettings s;
  s.budget = cfg.budget;
  s.initial_designs = cfg.initial_designs;
  s.initial_spread = cfg.initial_spread;
  s.refit_interval = cfg.refit_interval;
  s.refit_growth = cfg.refit_growth;
  s.gp.seeded_starts = cfg.hyper_starts;
  s.gp.max_iters = cfg.hyper_iters;
  s.gp.tol = cfg.hyper_tol;
  s.acquisition.max_iters = cfg.acquisition_iters;
  s.acquisition.tol = cfg.acquisition_tol;
  s.acquisition_starts = cfg.acquisition_starts;
  s.de.mutation = cfg.de_mutation;
  s.de.crossover = cfg.de_crossover;
  s.de.population = cfg.de_population;
  s.exec = cfg.parallel ? Exec::Parallel : Exec::Serial;
  return s;
}

std::unique_ptr<Experiment> make_experiment(const RunConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::Transport: return std::make_unique<TransportExperiment>(cfg);
    case Scenario::Damping: return std::make_unique<DampingExperiment>(cfg);
    case Scenario::Sphere: return std::make_unique<SphereExperiment>(cfg);
  }
  throw DomainError("unknown scenario");
}

TransportExperiment::TransportExperiment(const RunConfig& cfg)
    : cal_(calibration_from_config(cfg)) {
  const ControlInputs start =
      cal_.controls_from_currents(cal_.initial_anchor().currents);
  const ControlInputs end = cal_.controls_from_currents(cal_.final_anchor().currents);
  const double duration = cfg.duration_ms * 1e-3;

  switch (cfg.ramp_kind) {
    case RampKind::Linear:
      prototype_ = make_linear(start, end, duration);
      break;
    case RampKind::Exponential:
      prototype_ = make_exponential(start, end, duration,
                                    {cfg.expo_ratio_lo, cfg.expo_ratio_hi});
      break;
    case RampKind::PiecewiseLinear:
      prototype_ = make_piecewise(start, end, duration, cfg.segments_per_channel,
                                  {cfg.v1_knot_lo, cfg.v1_knot_hi},
                                  {cfg.v2_knot_lo, cfg.v2_knot_hi});
      break;
  }

  const int d = param_dimension(prototype_);
  space_.lo.resize(d);
  space_.hi.resize(d);
  for (int k = 0; k < d; ++k) {
    space_.lo[k] = prototype_.bounds[static_cast<std::size_t>(k)].lo;
    space_.hi[k] = prototype_.bounds[static_cast<std::size_t>(k)].hi;
  }

  start_state_ = make_stationary_state(cal_.evaluate(cal_.initial_anchor().currents),
                                       cfg.atom_number, 0.0);
  loss_ = LossModel{cfg.loss_gamma, cfg.loss_gamma > 0.0};
  shape_ = cloud_from_config(cfg);
  weights_ = weights_from_config(cfg);
  train_ = pulses_from_config(cfg);
  settle_ = cfg.settle_ms * 1e-3;
  noise_ = cfg.detection_noise;
  actuation_noise_ = cfg.current_noise;

  // The ramp step must survive the stiffest trap the parameter box can
  // request; kinds whose waveform stays between the endpoints only need the
  // endpoint corner.
  double v1_hi = std::max(prototype_.start.v1, prototype_.end.v1);
  double v2_hi = std::max(prototype_.start.v2, prototype_.end.v2);
  if (cfg.ramp_kind == RampKind::PiecewiseLinear) {
    v1_hi = std::max(v1_hi, cfg.v1_knot_hi);
    v2_hi = std::max(v2_hi, cfg.v2_knot_hi);
  }
  dt_ramp_ = step_for(omega_max_for_controls(cal_, v1_hi, v2_hi));

  const TrapParameters rest = cal_.evaluate(cal_.final_anchor().currents);
  hold_omega_max_ = rest.omega_max();
  dt_hold_ = step_for(hold_omega_max_);
  hold_spec_ = make_linear(end, end, hold_window(train_, settle_));
}

Eigen::VectorXd TransportExperiment::initial_params() const {
  Eigen::VectorXd p(space_.dimension());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    p[k] = prototype_.params[static_cast<std::size_t>(k)];
  }
  return p;
}

RampSpec TransportExperiment::ramp_for(const Eigen::VectorXd& raw) const {
  if (raw.size() != space_.dimension()) {
    throw DomainError("ramp parameter dimension mismatch");
  }
  RampSpec spec = prototype_;
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    spec.params[static_cast<std::size_t>(k)] = raw[k];
  }
  validate(spec);
  return spec;
}

void TransportExperiment::set_duration(double seconds) {
  prototype_ = warm_start(prototype_, seconds);
}

CurrentMapCalibration TransportExperiment::calibration_for_shot(
    std::uint64_t seed) const {
  return jittered_calibration(cal_, actuation_noise_, seed);
}

ShotResult TransportExperiment::run_shot(const Eigen::VectorXd& raw,
                                         std::uint64_t seed) const {
  const RampSpec spec = ramp_for(raw);
  const CurrentMapCalibration cal = calibration_for_shot(seed);
  Trajectory ramp_traj =
      evolve(start_state_, spec, cal, dt_ramp_, spec.duration, loss_);
  Trajectory hold_traj = evolve(ramp_traj.samples.back(), hold_spec_, cal, dt_hold_,
                                hold_spec_.duration, loss_);
  return score_shot(hold_traj, train_, settle_, shape_, weights_, hold_omega_max_,
                    noise_, seed);
}

CostReport TransportExperiment::evaluate(const Eigen::VectorXd& raw,
                                         std::uint64_t seed) const {
  return run_shot(raw, seed).cost;
}

DampingExperiment::DampingExperiment(const RunConfig& cfg)
    : cal_(calibration_from_config(cfg)), mass_(cfg.atom_mass_kg) {
  const TrapConfiguration rest_currents{cfg.damp_quad_a, cfg.damp_bias_a};
  rest_trap_ = cal_.evaluate(rest_currents);
  const ControlInputs start =
      cal_.controls_from_currents(cal_.initial_anchor().currents);
  const ControlInputs rest = cal_.controls_from_currents(rest_currents);

  prototype_ = make_piecewise(rest, rest, cfg.control_ms * 1e-3,
                              cfg.segments_per_channel,
                              {cfg.damp_v1_lo, cfg.damp_v1_hi},
                              {cfg.damp_v2_lo, cfg.damp_v2_hi});
  const int d = param_dimension(prototype_);
  space_.lo.resize(d);
  space_.hi.resize(d);
  for (int k = 0; k < d; ++k) {
    space_.lo[k] = prototype_.bounds[static_cast<std::size_t>(k)].lo;
    space_.hi[k] = prototype_.bounds[static_cast<std::size_t>(k)].hi;
  }

  loss_ = LossModel{cfg.loss_gamma, cfg.loss_gamma > 0.0};
  shape_ = cloud_from_config(cfg);
  weights_ = weights_from_config(cfg);
  train_ = pulses_from_config(cfg);
  settle_ = cfg.settle_ms * 1e-3;
  noise_ = cfg.detection_noise;
  actuation_noise_ = cfg.current_noise;

  // The plunge that excites the sloshing is identical for every evaluation.
  const CondensateState at_rest = make_stationary_state(
      cal_.evaluate(cal_.initial_anchor().currents), cfg.atom_number, 0.0);
  const RampSpec plunge = make_linear(start, rest, cfg.induce_ms * 1e-3);
  const double dt_plunge = step_for(omega_max_for_controls(
      cal_, std::max(start.v1, rest.v1), std::max(start.v2, rest.v2)));
  excited_ = evolve(at_rest, plunge, cal_, dt_plunge, plunge.duration, loss_)
                 .samples.back();

  dt_control_ = step_for(
      omega_max_for_controls(cal_, cfg.damp_v1_hi, cfg.damp_v2_hi));
  hold_omega_max_ = rest_trap_.omega_max();
  dt_hold_ = step_for(hold_omega_max_);
  hold_spec_ = make_linear(rest, rest, hold_window(train_, settle_));
}

Eigen::VectorXd DampingExperiment::initial_params() const {
  Eigen::VectorXd p(space_.dimension());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    p[k] = prototype_.params[static_cast<std::size_t>(k)];
  }
  return p;
}

RampSpec DampingExperiment::control_for(const Eigen::VectorXd& raw) const {
  if (raw.size() != space_.dimension()) {
    throw DomainError("control parameter dimension mismatch");
  }
  RampSpec spec = prototype_;
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    spec.params[static_cast<std::size_t>(k)] = raw[k];
  }
  validate(spec);
  return spec;
}

CurrentMapCalibration DampingExperiment::calibration_for_shot(
    std::uint64_t seed) const {
  return jittered_calibration(cal_, actuation_noise_, seed);
}

ShotResult DampingExperiment::run_shot(const Eigen::VectorXd& raw,
                                       std::uint64_t seed) const {
  const RampSpec control = control_for(raw);
  const CurrentMapCalibration cal = calibration_for_shot(seed);
  Trajectory control_traj =
      evolve(excited_, control, cal, dt_control_, control.duration, loss_);
  Trajectory hold_traj = evolve(control_traj.samples.back(), hold_spec_, cal,
                                dt_hold_, hold_spec_.duration, loss_);
  return score_shot(hold_traj, train_, settle_, shape_, weights_, hold_omega_max_,
                    noise_, seed);
}

CostReport DampingExperiment::evaluate(const Eigen::VectorXd& raw,
                                       std::uint64_t seed) const {
  return run_shot(raw, seed).cost;
}

SphereExperiment::SphereExperiment(const RunConfig& cfg)
    : SphereExperiment(cfg.sphere_dimension, cfg.sphere_target,
                       cfg.min_detections) {}

SphereExperiment::SphereExperiment(int dimension, double target, long detections)
    : target_(target), detections_(detections) {
  if (dimension < 1) throw DomainError("sphere needs at least one dimension");
  space_.lo = Eigen::VectorXd::Zero(dimension);
  space_.hi = Eigen::VectorXd::Ones(dimension);
}

Eigen::VectorXd SphereExperiment::initial_params() const {
  return Eigen::VectorXd::Constant(space_.dimension(), 0.5);
}

CostReport SphereExperiment::evaluate(const Eigen::VectorXd& raw,
                                      std::uint64_t /*seed*/) const {
  if (raw.size() != space_.dimension()) throw DomainError("dimension mismatch");
  CostReport r;
  r.oscillation_cost = (raw.array() - target_).square().sum();
  r.range_penalty = 0.0;
  r.width_cost = 0.0;
  r.total = r.oscillation_cost;
  r.total_detections = detections_;
  return r;
}

SinusoidFit fit_sinusoid_known_frequency(const std::vector<double>& t,
                                         const std::vector<double>& y,
                                         double omega) {
  if (t.size() != y.size()) throw DomainError("sample vectors disagree in length");
  if (t.size() < 3) throw InsufficientDataError("need at least three samples");
  if (!(omega > 0.0)) throw DomainError("frequency must be positive");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(t.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    a(row, 0) = std::sin(omega * t[i]);
    a(row, 1) = std::cos(omega * t[i]);
    a(row, 2) = 1.0;
    b[row] = y[i];
  }
  const Eigen::Vector3d c =
      (a.transpose() * a).ldlt().solve(a.transpose() * b);
  SinusoidFit fit;
  fit.amplitude = std::hypot(c[0], c[1]);
  fit.offset = c[2];
  fit.phase = std::atan2(c[1], c[0]);
  return fit;
}

}  // namespace rampopt
