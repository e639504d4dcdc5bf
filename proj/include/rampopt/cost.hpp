#pragma once

#include <vector>

#include "rampopt/atom_laser.hpp"

namespace rampopt {

// Robust cost shaping. Oscillation is the per-axis spread (population
// standard deviation over pulses) of the detector means. Two one-sided
// quartic hinges keep the search away from clouds that are too wide and
// from excursions that leave the detector: they are exactly zero below
// their thresholds, smooth at the threshold, and grow steeply above it.
struct CostWeights {
  double width_threshold = 4e-3;  // m, on the norm of the per-pulse widths
  double width_scale = 6e8;       // m^-4
  double range_threshold = 47e-3;  // m, on the per-axis mean peak-to-peak
  double range_scale = 1e6;        // m^-4
  long min_detections = 2500;      // below this the shot is discarded

  // Componentwise adds the range hinge to each axis spread before the norm;
  // Scalar adds the summed hinges after the norm.
  enum class RangeMode { Componentwise, Scalar };
  RangeMode range_mode = RangeMode::Componentwise;
};

// total = oscillation_cost + range_penalty + width_cost (exactly).
// A failed report keeps total_detections but sets the cost fields to NaN;
// failed evaluations never reach the surrogate.
struct CostReport {
  double oscillation_cost = 0.0;
  double range_penalty = 0.0;
  double width_cost = 0.0;
  double total = 0.0;
  bool failed = false;
  long total_detections = 0;
};

// Quartic hinge on the width norm: 0 below the threshold.
double width_penalty(double width_norm, const CostWeights& w);
// Quartic hinge on a single axis peak-to-peak.
double range_penalty(double peak_to_peak, const CostWeights& w);

// Reduces a pulse series to the robust scalar cost. Pulses with zero
// detections carry no information and are skipped. Throws
// InsufficientDataError when the record set is empty.
CostReport robust_cost(const std::vector<DetectionRecord>& records,
                       const CostWeights& w);

}  // namespace rampopt
