#include "rampopt/ramp.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

// Exponential decay weight that is exactly 1 at t=0 and exactly 0 at t=tau,
// for any time constant tc > 0.
double exponential_weight(double t, double tau, double tc) {
  const double e_t = std::exp(-t / tc);
  const double e_tau = std::exp(-tau / tc);
  return (e_t - e_tau) / (1.0 - e_tau);
}

// Piecewise-linear channel through knots on a uniform grid over [0, tau].
double piecewise_channel(double t, double tau, const std::vector<double>& knots) {
  const int segments = static_cast<int>(knots.size()) - 1;
  const double u = t / tau * segments;
  int seg = static_cast<int>(u);
  if (seg >= segments) seg = segments - 1;
  const double frac = u - seg;
  return std::lerp(knots[static_cast<std::size_t>(seg)],
                   knots[static_cast<std::size_t>(seg) + 1], frac);
}

std::vector<double> channel_knots(const RampSpec& spec, int channel) {
  const int s = spec.segments_per_channel;
  const double v_start = channel == 0 ? spec.start.v1 : spec.start.v2;
  const double v_end = channel == 0 ? spec.end.v1 : spec.end.v2;
  std::vector<double> knots(static_cast<std::size_t>(s) + 1);
  knots.front() = v_start;
  knots.back() = v_end;
  const int offset = channel * (s - 1);
  for (int i = 1; i < s; ++i) {
    knots[static_cast<std::size_t>(i)] =
        spec.params[static_cast<std::size_t>(offset + i - 1)];
  }
  return knots;
}

}  // namespace

const char* to_string(RampKind k) {
  switch (k) {
    case RampKind::Linear: return "linear";
    case RampKind::Exponential: return "exponential";
    case RampKind::PiecewiseLinear: return "piecewise";
  }
  return "unknown";
}

RampKind ramp_kind_from_string(const std::string& s) {
  if (s == "linear") return RampKind::Linear;
  if (s == "exponential") return RampKind::Exponential;
  if (s == "piecewise") return RampKind::PiecewiseLinear;
  throw DomainError("unknown ramp kind '" + s + "'");
}

int param_dimension(RampKind kind, int segments_per_channel) {
  switch (kind) {
    case RampKind::Linear: return 0;
    case RampKind::Exponential: return 2;
    case RampKind::PiecewiseLinear:
      if (segments_per_channel < 1) {
        throw DomainError("piecewise ramp needs at least one segment per channel");
      }
      return 2 * (segments_per_channel - 1);
  }
  throw DomainError("unknown ramp kind");
}

int param_dimension(const RampSpec& spec) {
  return param_dimension(spec.kind, spec.segments_per_channel);
}

void validate(const RampSpec& spec) {
  if (!(spec.duration > 0.0)) throw DomainError("ramp duration must be positive");
  const int d = param_dimension(spec);
  if (static_cast<int>(spec.params.size()) != d ||
      static_cast<int>(spec.bounds.size()) != d) {
    std::ostringstream os;
    os << to_string(spec.kind) << " ramp expects " << d << " parameters, got "
       << spec.params.size() << " params and " << spec.bounds.size() << " bounds";
    throw DomainError(os.str());
  }
  for (int i = 0; i < d; ++i) {
    const auto& b = spec.bounds[static_cast<std::size_t>(i)];
    if (!(b.lo < b.hi)) {
      std::ostringstream os;
      os << "degenerate bounds [" << b.lo << ", " << b.hi << "] for parameter " << i;
      throw DomainError(os.str());
    }
    const double v = spec.params[static_cast<std::size_t>(i)];
    if (v < b.lo || v > b.hi) {
      std::ostringstream os;
      os << "parameter " << i << " = " << v << " outside [" << b.lo << ", " << b.hi
         << "]";
      throw BoundsError(os.str());
    }
  }
  if (spec.kind == RampKind::Exponential) {
    for (int i = 0; i < 2; ++i) {
      if (!(spec.bounds[static_cast<std::size_t>(i)].lo > 0.0)) {
        throw DomainError("exponential time-constant ratios must stay positive");
      }
    }
  }
}

ControlInputs sample_waveform(const RampSpec& spec, double t) {
  if (t < 0.0 || t > spec.duration) {
    std::ostringstream os;
    os << "sample time " << t << " outside [0, " << spec.duration << "]";
    throw DomainError(os.str());
  }
  switch (spec.kind) {
    case RampKind::Linear: {
      const double u = t / spec.duration;
      return {std::lerp(spec.start.v1, spec.end.v1, u),
              std::lerp(spec.start.v2, spec.end.v2, u)};
    }
    case RampKind::Exponential: {
      const double w1 =
          exponential_weight(t, spec.duration, spec.params[0] * spec.duration);
      const double w2 =
          exponential_weight(t, spec.duration, spec.params[1] * spec.duration);
      return {std::lerp(spec.end.v1, spec.start.v1, w1),
              std::lerp(spec.end.v2, spec.start.v2, w2)};
    }
    case RampKind::PiecewiseLinear: {
      return {piecewise_channel(t, spec.duration, channel_knots(spec, 0)),
              piecewise_channel(t, spec.duration, channel_knots(spec, 1))};
    }
  }
  throw DomainError("unknown ramp kind");
}

RampSpec warm_start(const RampSpec& previous, double new_duration) {
  if (!(new_duration > 0.0)) throw DomainError("warm start duration must be positive");
  RampSpec next = previous;
  next.duration = new_duration;
  return next;
}

RampSpec make_linear(ControlInputs start, ControlInputs end, double duration) {
  RampSpec spec;
  spec.kind = RampKind::Linear;
  spec.duration = duration;
  spec.start = start;
  spec.end = end;
  validate(spec);
  return spec;
}

RampSpec make_exponential(ControlInputs start, ControlInputs end, double duration,
                          ParamBounds ratio_bounds) {
  RampSpec spec;
  spec.kind = RampKind::Exponential;
  spec.duration = duration;
  spec.start = start;
  spec.end = end;
  const double mid = 0.5 * (ratio_bounds.lo + ratio_bounds.hi);
  spec.params = {mid, mid};
  spec.bounds = {ratio_bounds, ratio_bounds};
  validate(spec);
  return spec;
}

RampSpec make_piecewise(ControlInputs start, ControlInputs end, double duration,
                        int segments_per_channel, ParamBounds v1_knot_bounds,
                        ParamBounds v2_knot_bounds) {
  RampSpec spec;
  spec.kind = RampKind::PiecewiseLinear;
  spec.duration = duration;
  spec.start = start;
  spec.end = end;
  spec.segments_per_channel = segments_per_channel;
  const int d = param_dimension(spec);
  spec.params.resize(static_cast<std::size_t>(d));
  spec.bounds.resize(static_cast<std::size_t>(d));
  const int s = segments_per_channel;
  for (int channel = 0; channel < 2; ++channel) {
    const double v_start = channel == 0 ? start.v1 : start.v2;
    const double v_end = channel == 0 ? end.v1 : end.v2;
    const ParamBounds b = channel == 0 ? v1_knot_bounds : v2_knot_bounds;
    for (int i = 1; i < s; ++i) {
      const std::size_t idx = static_cast<std::size_t>(channel * (s - 1) + i - 1);
      spec.params[idx] = std::lerp(v_start, v_end, static_cast<double>(i) / s);
      spec.bounds[idx] = b;
    }
  }
  validate(spec);
  return spec;
}

}  // namespace rampopt
