#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rampopt/constants.hpp"
#include "rampopt/cost.hpp"
#include "rampopt/ramp.hpp"

namespace rampopt {

enum class Scenario { Transport, Damping, Sphere };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

// Complete description of a run. Every field has a workable default; a
// config file overrides fields section by section. Parsing is strict: an
// unknown section, unknown key, duplicate key, or malformed value is a
// ConfigError naming the line.
struct RunConfig {
  // [run]
  Scenario scenario = Scenario::Transport;
  std::uint64_t seed = 1;
  std::string out_dir;
  int budget = 200;

  // [ramp]
  RampKind ramp_kind = RampKind::PiecewiseLinear;
  double duration_ms = 200.0;
  std::vector<double> sweep_durations_ms = {1000.0, 400.0, 200.0, 100.0, 50.0};
  int segments_per_channel = 8;
  double v1_knot_lo = 0.4, v1_knot_hi = 14.2;
  double v2_knot_lo = 0.0, v2_knot_hi = 5.8;
  double expo_ratio_lo = 0.02, expo_ratio_hi = 2.0;

  // [trap]
  double quad_initial_a = 14.2, bias_initial_a = 14.2;
  double axial_initial_hz = 52.0, radial_initial_hz = 595.0;
  double quad_final_a = 0.58, bias_final_a = 1.9;
  double axial_final_hz = 5.8, radial_final_hz = 15.5;
  double displacement_mm = 9.0;
  double escape_velocity_initial = 2.0, escape_velocity_final = 0.2;
  double atom_mass_kg = k_mass_he_star;
  double gain_k1 = 1.0, gain_k2 = 1.0;
  double current_noise = 0.0;
  double min_quad_a = 0.2, max_current_a = 20.0;

  // [cloud]
  double atom_number = 8e5;
  double width0_x_um = 10.0, width0_y_um = 3.0, width0_z_um = 3.0;
  double loss_gamma = 50.0;

  // [pulses]
  double pulse_period_ms = 10.0;
  int pulse_count = 50;
  double outcoupled_fraction = 0.02;
  double detection_efficiency = 0.10;
  double fall_distance_m = 0.852;
  double resolution_xy_um = 120.0;
  double resolution_z_um = 10.0;
  double detector_halfwidth_mm = 40.0;
  double settle_ms = 0.0;
  bool detection_noise = true;  // off: score the model means instead of events

  // [cost]
  double width_threshold_mm = 4.0;
  double width_scale = 6e8;
  double range_threshold_mm = 47.0;
  double range_scale = 1e6;
  long min_detections = 2500;
  bool range_componentwise = true;

  // [optimizer]
  std::vector<double> initial_params;  // empty picks the scenario default
  int initial_designs = 0;             // 0 picks 2 * dimension + 1
  double initial_spread = 0.10;
  int refit_interval = 5;
  double refit_growth = 0.5;
  int hyper_starts = 2;  // seeded restarts on top of the fixed grid
  int hyper_iters = 60;
  double hyper_tol = 1e-3;
  int acquisition_starts = 20;
  int acquisition_iters = 200;
  double acquisition_tol = 1e-6;
  double de_mutation = 0.7;
  double de_crossover = 0.5;
  int de_population = 0;  // 0 picks max(10, 3 * dimension)
  bool parallel = false;

  // [damping]
  double induce_ms = 1200.0;
  double control_ms = 120.0;
  double damp_quad_a = 0.7698745918742416;
  double damp_bias_a = 4.541254519184275;
  double damp_v1_lo = 0.4, damp_v1_hi = 3.0;
  double damp_v2_lo = 1.0, damp_v2_hi = 6.0;

  // [sphere]
  int sphere_dimension = 4;
  double sphere_target = 0.3;
};

RunConfig parse_config(std::istream& in, const std::string& origin);
RunConfig load_config_file(const std::string& path);

// Canonical dump of every field; parsing it back reproduces the config
// exactly, and equal configs produce byte-identical dumps.
void write_config(std::ostream& out, const RunConfig& cfg);
void save_config_file(const std::string& path, const RunConfig& cfg);

// Cross-field consistency checks (positive durations, descending sweep
// list, ordered bounds, ...). Throws ConfigError.
void validate(const RunConfig& cfg);

}  // namespace rampopt
