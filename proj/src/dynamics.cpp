#include "rampopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rampopt {

namespace {

constexpr double k_two_pi = 6.283185307179586476925287;
// Steps per shortest trap period below which evolve() refuses to run.
constexpr double k_min_steps_per_period = 200.0;

struct RampField {
  const RampSpec* spec;
  const CurrentMapCalibration* cal;
  double t_offset;

  FieldPoint operator()(double t) const {
    // Integrator substep times can land an ulp past the window ends; absorb
    // round-off-scale excursions, keep genuine out-of-range queries fatal.
    double local = t - t_offset;
    const double slack = 1e-9 * std::max(1.0, spec->duration);
    if (local < 0.0 && local > -slack) local = 0.0;
    if (local > spec->duration && local - spec->duration < slack) {
      local = spec->duration;
    }
    const ControlInputs in = sample_waveform(*spec, local);
    const TrapParameters p = cal->evaluate(cal->currents_from_controls(in));
    return field_from_trap(p);
  }
};

// Largest trap frequency seen while scanning the ramp on a fine fixed grid.
// The waveform is piecewise smooth and the current -> frequency map is
// monotone in both currents, so a dense scan bounds the true maximum well
// enough for a step-size check with a safety margin.
double max_frequency_on_ramp(const RampSpec& spec, const CurrentMapCalibration& cal) {
  const int n = std::max(1024, 64 * spec.segments_per_channel);
  double w_max = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = spec.duration * static_cast<double>(i) / n;
    const ControlInputs in = sample_waveform(spec, t);
    const TrapParameters p = cal.evaluate(cal.currents_from_controls(in));
    w_max = std::max(w_max, p.omega_max());
  }
  return w_max;
}

}  // namespace

CondensateState Trajectory::state_at(double t) const {
  if (samples.empty()) throw DomainError("empty trajectory");
  const double tol = 1e-9 * std::max(1.0, std::abs(t_end()));
  if (t < t0 - tol || t > t_end() + tol) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory window [" << t0 << ", " << t_end()
       << "]";
    throw DomainError(os.str());
  }
  if (samples.size() == 1) return samples.front();
  const double u = std::clamp((t - t0) / dt, 0.0,
                              static_cast<double>(samples.size() - 1));
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= samples.size() - 1) i = samples.size() - 2;
  const double frac = u - static_cast<double>(i);

  const CondensateState& a = samples[i];
  const CondensateState& b = samples[i + 1];
  CondensateState out = a;
  for (int k = 0; k < 3; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    out.axes[ks].position = std::lerp(a.axes[ks].position, b.axes[ks].position, frac);
    out.axes[ks].velocity = std::lerp(a.axes[ks].velocity, b.axes[ks].velocity, frac);
    out.axes[ks].scale = std::lerp(a.axes[ks].scale, b.axes[ks].scale, frac);
    out.axes[ks].scale_rate =
        std::lerp(a.axes[ks].scale_rate, b.axes[ks].scale_rate, frac);
  }
  out.atom_number = std::lerp(a.atom_number, b.atom_number, frac);
  out.time = t;
  return out;
}

CondensateState make_stationary_state(const TrapParameters& trap, double atom_number,
                                      double time) {
  CondensateState s;
  s.axes[0].position = trap.center_x;
  s.omega_ref = trap.omegas();
  s.atom_number = atom_number;
  s.time = time;
  return s;
}

FieldPoint field_from_trap(const TrapParameters& p) {
  return {p.omegas(), p.center_x, p.escape_velocity_x};
}

double com_energy_x(const CondensateState& s, const FieldPoint& f, double mass) {
  const double dx = s.axes[0].position - f.center_x;
  return 0.5 * mass *
         (s.axes[0].velocity * s.axes[0].velocity + f.omega[0] * f.omega[0] * dx * dx);
}

double com_energy(const CondensateState& s, const FieldPoint& f, double mass) {
  double e = com_energy_x(s, f, mass);
  for (int a = 1; a < 3; ++a) {
    const std::size_t as = static_cast<std::size_t>(a);
    e += 0.5 * mass *
         (s.axes[as].velocity * s.axes[as].velocity +
          f.omega[as] * f.omega[as] * s.axes[as].position * s.axes[as].position);
  }
  return e;
}

Trajectory evolve(const CondensateState& initial, const RampSpec& spec,
                  const CurrentMapCalibration& cal, double dt, double window,
                  const LossModel& loss) {
  validate(spec);
  if (!(window > 0.0)) throw DomainError("evolution window must be positive");
  if (window > spec.duration * (1.0 + 1e-12)) {
    throw DomainError("evolution window extends past the ramp duration");
  }
  const double w_max = max_frequency_on_ramp(spec, cal);
  const double dt_cap = k_two_pi / (k_min_steps_per_period * w_max);
  if (dt > dt_cap) {
    std::ostringstream os;
    os << "step " << dt << " s exceeds " << dt_cap
       << " s (1/200th of the shortest trap period on this ramp)";
    throw DomainError(os.str());
  }
  const auto steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(window / dt - 1e-9)));
  const double dt_exact = window / static_cast<double>(steps);

  RampField field{&spec, &cal, initial.time};
  return integrate_field(initial, field, dt_exact, steps, loss);
}

Trajectory extend(Trajectory head, const RampSpec& spec,
                  const CurrentMapCalibration& cal, double window,
                  const LossModel& loss) {
  if (head.samples.empty()) throw DomainError("cannot extend an empty trajectory");
  const auto steps = static_cast<std::int64_t>(std::llround(window / head.dt));
  if (steps < 1 || std::abs(window - static_cast<double>(steps) * head.dt) >
                       1e-9 * std::max(1.0, window)) {
    throw DomainError("extension window must be a whole number of head steps");
  }
  Trajectory tail = evolve(head.samples.back(), spec, cal, head.dt, window, loss);
  head.lost = head.lost || tail.lost;
  head.samples.insert(head.samples.end(), tail.samples.begin() + 1,
                      tail.samples.end());
  return head;
}

}  // namespace rampopt
