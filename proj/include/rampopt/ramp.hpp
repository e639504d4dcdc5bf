#pragma once

#include <string>
#include <vector>

#include "rampopt/trap.hpp"

namespace rampopt {

enum class RampKind { Linear, Exponential, PiecewiseLinear };

const char* to_string(RampKind k);
RampKind ramp_kind_from_string(const std::string& s);

struct ParamBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// A two-channel control waveform on [0, duration]. The free parameters are
// chosen so that they stay meaningful when only the duration changes:
//   Linear:          none.
//   Exponential:     per-channel time constants as fractions of the duration.
//   PiecewiseLinear: interior knot voltages per channel (endpoints fixed),
//                    placed on a uniform time grid.
struct RampSpec {
  RampKind kind = RampKind::Linear;
  double duration = 1.0;  // s
  ControlInputs start, end;
  int segments_per_channel = 8;  // PiecewiseLinear only
  std::vector<double> params;
  std::vector<ParamBounds> bounds;
};

int param_dimension(RampKind kind, int segments_per_channel);
int param_dimension(const RampSpec& spec);

// Throws DomainError/BoundsError when the spec is internally inconsistent
// (wrong parameter count, params outside bounds, non-positive duration).
void validate(const RampSpec& spec);

// Evaluates the waveform at local time t in [0, duration]. Endpoints are
// reproduced exactly: sample(0) == start and sample(duration) == end for
// every kind and every in-bounds parameter vector.
ControlInputs sample_waveform(const RampSpec& spec, double t);

// Same shape on a new time axis: identical parameter vector, new duration.
// Throws DomainError if the new duration is not positive.
RampSpec warm_start(const RampSpec& previous, double new_duration);

RampSpec make_linear(ControlInputs start, ControlInputs end, double duration);
// 'ratio_bounds' limits each channel's time constant as a fraction of the
// duration; params default to the midpoint of that box.
RampSpec make_exponential(ControlInputs start, ControlInputs end, double duration,
                          ParamBounds ratio_bounds = {0.02, 2.0});
// Interior knots default to the straight line between the endpoint voltages.
RampSpec make_piecewise(ControlInputs start, ControlInputs end, double duration,
                        int segments_per_channel, ParamBounds v1_knot_bounds,
                        ParamBounds v2_knot_bounds);

}  // namespace rampopt
