#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rampopt/constants.hpp"
#include "rampopt/dynamics.hpp"
#include "rampopt/exec.hpp"

namespace rampopt {

// Pulsed outcoupling plus the far-field detector below the trap. The
// detector plate is finite: only atoms landing within detector_halfwidth of
// detector_center (both in-plane axes) are recorded. Everything the pipeline
// reports — counts, means, spreads, and therefore costs — is bounded by the
// plate, exactly like the hardware it models.
struct PulseTrain {
  double start_time = 0.0;          // s, absolute time of the first pulse
  double period = 0.010;            // s
  int pulse_count = 250;
  double outcoupled_fraction = 0.02;   // per pulse
  double detection_efficiency = 0.10;  // per outcoupled atom
  double fall_distance = 0.852;        // m, trap to detector
  double resolution_xy = 120e-6;       // m, rms in-plane detector blur
  double resolution_z = 10e-6;         // m, rms blur of the arrival coordinate
  double detector_center = 0.0;        // m, plate center along the slosh axis
  double detector_halfwidth = 0.040;   // m, acceptance half-width per axis
};

struct FreeFall {
  double distance = 0.852;
  double gravity = k_gravity;

  double fall_time() const;          // sqrt(2 d / g)
  double detector_velocity() const;  // g * fall_time
  // Exact time for an atom released at height z (relative to the trap
  // center) with vertical velocity v to reach the detector plane.
  double arrival_time(double z, double v) const;
};

// In-trap rms widths of the stationary cloud; the instantaneous width along
// each axis is width0 * scale.
struct CloudShape {
  std::array<double, 3> width0 = {10e-6, 3e-6, 3e-6};  // m
};

// Per-pulse detector summary. mean/stddev are the model values implied by
// the trajectory; count is the sampled number of detections.
struct DetectionRecord {
  int pulse_index = 0;
  std::array<double, 3> mean = {0.0, 0.0, 0.0};    // m, detector plane + depth
  std::array<double, 3> stddev = {0.0, 0.0, 0.0};  // m
  long count = 0;
};

// Raw detector click: arrival time and in-plane position. The depth
// coordinate is carried by the arrival-time offset.
struct Event {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct PulseSimResult {
  std::vector<DetectionRecord> records;
  std::vector<Event> events;
  bool aliasing_warning = false;  // pulse period undersamples the trap motion
  double atoms_remaining = 0.0;   // after the last pulse
};

// Simulates the detector response for every pulse of the train. The train
// must lie inside the trajectory window (CoverageError otherwise). Each
// pulse removes its outcoupled fraction from the cloud. Detection counts are
// binomial draws; event positions are normal draws around the model means.
// Each pulse owns an independent RNG stream derived from (seed, pulse), so
// Serial and Parallel execution produce identical output.
// 'max_trap_frequency' (rad/s) only arms the aliasing warning; pass 0 to
// skip the check.
PulseSimResult simulate_pulses(const Trajectory& traj, const PulseTrain& train,
                               const CloudShape& shape, double max_trap_frequency,
                               std::uint64_t seed, Exec exec = Exec::Serial);

struct BinDiagnostics {
  long dropped = 0;  // events assignable to no pulse
};

// Inverse of the event encoding: assigns each event to the nearest pulse,
// recovers the depth coordinate from the arrival-time offset, and reduces to
// per-pulse empirical means and population standard deviations. Produces one
// record per pulse; pulses with no events keep zero mean, spread and count.
std::vector<DetectionRecord> bin_events(const std::vector<Event>& events,
                                        const PulseTrain& train,
                                        BinDiagnostics* diag = nullptr);

void write_events_csv(std::ostream& out, const std::vector<Event>& events);
std::vector<Event> read_events_csv(std::istream& in);
void write_records_csv(std::ostream& out, const std::vector<DetectionRecord>& records);

}  // namespace rampopt
