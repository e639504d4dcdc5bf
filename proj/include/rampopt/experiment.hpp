#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "rampopt/atom_laser.hpp"
#include "rampopt/config.hpp"
#include "rampopt/cost.hpp"
#include "rampopt/dynamics.hpp"
#include "rampopt/optimizer.hpp"
#include "rampopt/ramp.hpp"
#include "rampopt/trap.hpp"

namespace rampopt {

// One scored shot of a scenario: the evolution consumed by the pulse train
// plus what the detector saw.
struct ShotResult {
  CostReport cost;
  std::vector<DetectionRecord> records;  // the scored series
  PulseSimResult sim;
  CondensateState measure_start;  // state when the first pulse fires
};

// Shared interface the optimizer harness drives. evaluate() must be safe to
// call repeatedly and depends only on (raw parameters, seed).
class Experiment {
 public:
  virtual ~Experiment() = default;
  virtual const ParameterSpace& space() const = 0;
  virtual Eigen::VectorXd initial_params() const = 0;
  virtual CostReport evaluate(const Eigen::VectorXd& raw,
                              std::uint64_t seed) const = 0;
};

std::unique_ptr<Experiment> make_experiment(const RunConfig& cfg);

// Decompression-and-transport shots: the cloud starts at rest in the tight
// trap, rides the parameterized ramp to the weak trap, then a pulse train
// scores the residual motion. The free parameters are the ramp shape; the
// duration is fixed per instance (set_duration rebuilds the prototype for
// warm-started sweeps, keeping the parameter identity intact).
class TransportExperiment : public Experiment {
 public:
  explicit TransportExperiment(const RunConfig& cfg);

  const ParameterSpace& space() const override { return space_; }
  Eigen::VectorXd initial_params() const override;
  CostReport evaluate(const Eigen::VectorXd& raw, std::uint64_t seed) const override;

  ShotResult run_shot(const Eigen::VectorXd& raw, std::uint64_t seed) const;
  void set_duration(double seconds);
  double duration() const { return prototype_.duration; }
  RampSpec ramp_for(const Eigen::VectorXd& raw) const;

  const CurrentMapCalibration& calibration() const { return cal_; }
  const RampSpec& prototype() const { return prototype_; }
  const PulseTrain& pulse_prototype() const { return train_; }
  const CondensateState& start_state() const { return start_state_; }
  double ramp_step() const { return dt_ramp_; }
  double hold_step() const { return dt_hold_; }
  double hold_frequency_max() const { return hold_omega_max_; }
  const LossModel& loss() const { return loss_; }
  const CloudShape& cloud() const { return shape_; }
  const CostWeights& weights() const { return weights_; }
  bool detection_noise() const { return noise_; }
  double settle() const { return settle_; }
  double actuation_noise() const { return actuation_noise_; }

 private:
  // Per-shot calibration: the clean gains scaled by one relative draw per
  // channel, so every realized current in the shot shares the same error.
  CurrentMapCalibration calibration_for_shot(std::uint64_t seed) const;

  CurrentMapCalibration cal_;
  RampSpec prototype_;
  ParameterSpace space_;
  CondensateState start_state_;
  RampSpec hold_spec_;  // constant waveform at the ramp end point
  PulseTrain train_;    // start_time filled per shot
  CloudShape shape_;
  CostWeights weights_;
  LossModel loss_;
  double dt_ramp_ = 0.0;
  double dt_hold_ = 0.0;
  double hold_omega_max_ = 0.0;
  double settle_ = 0.0;
  double actuation_noise_ = 0.0;
  bool noise_ = true;
};

// Oscillation-damping shots: a fixed linear plunge into the weak trap first
// excites the sloshing (computed once), then a short piecewise control
// window around the resting currents tries to kill it before the pulse
// train scores what remains. The zero-control baseline is the prototype
// parameter vector itself.
class DampingExperiment : public Experiment {
 public:
  explicit DampingExperiment(const RunConfig& cfg);

  const ParameterSpace& space() const override { return space_; }
  Eigen::VectorXd initial_params() const override;
  CostReport evaluate(const Eigen::VectorXd& raw, std::uint64_t seed) const override;

  ShotResult run_shot(const Eigen::VectorXd& raw, std::uint64_t seed) const;
  Eigen::VectorXd baseline_params() const { return initial_params(); }
  RampSpec control_for(const Eigen::VectorXd& raw) const;
  const CondensateState& excited_state() const { return excited_; }
  const TrapParameters& resting_trap() const { return rest_trap_; }
  const CurrentMapCalibration& calibration() const { return cal_; }
  const PulseTrain& pulse_prototype() const { return train_; }
  double atom_mass() const { return mass_; }

 private:
  CurrentMapCalibration calibration_for_shot(std::uint64_t seed) const;

  CurrentMapCalibration cal_;
  RampSpec prototype_;  // control window, knots free
  ParameterSpace space_;
  CondensateState excited_;
  TrapParameters rest_trap_;
  RampSpec hold_spec_;
  PulseTrain train_;
  CloudShape shape_;
  CostWeights weights_;
  LossModel loss_;
  double dt_control_ = 0.0;
  double dt_hold_ = 0.0;
  double hold_omega_max_ = 0.0;
  double settle_ = 0.0;
  double mass_ = 0.0;
  double actuation_noise_ = 0.0;
  bool noise_ = true;
};

// Analytic quadratic bowl on the unit cube; detector fields are stubbed so
// the full harness (logging, replay) can run without the physics.
class SphereExperiment : public Experiment {
 public:
  explicit SphereExperiment(const RunConfig& cfg);
  SphereExperiment(int dimension, double target, long detections);

  const ParameterSpace& space() const override { return space_; }
  Eigen::VectorXd initial_params() const override;
  CostReport evaluate(const Eigen::VectorXd& raw, std::uint64_t seed) const override;

 private:
  ParameterSpace space_;
  double target_ = 0.3;
  long detections_ = 2500;
};

// Helpers shared by the scenarios and the harness.
CurrentMapCalibration calibration_from_config(const RunConfig& cfg);
CostWeights weights_from_config(const RunConfig& cfg);
PulseTrain pulses_from_config(const RunConfig& cfg);
CloudShape cloud_from_config(const RunConfig& cfg);
OptimizerSettings optimizer_from_config(const RunConfig& cfg);

// Least-squares amplitude of a sinusoid of known angular frequency through
// (t, y) samples: fits a sin + b cos + c and returns hypot(a, b). Needs at
// least three samples spanning a nonzero time window.
struct SinusoidFit {
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
};
SinusoidFit fit_sinusoid_known_frequency(const std::vector<double>& t,
                                         const std::vector<double>& y,
                                         double omega);

}  // namespace rampopt
