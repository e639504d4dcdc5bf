#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rampopt/errors.hpp"
#include "rampopt/ramp.hpp"
#include "rampopt/trap.hpp"

namespace rampopt {

// Center-of-mass coordinate plus the condensate scale factor along one axis.
// scale = 1, scale_rate = 0 is the stationary shape in the trap whose
// frequency equals the state's reference frequency for that axis.
struct AxisState {
  double position = 0.0;    // m
  double velocity = 0.0;    // m/s
  double scale = 1.0;       // dimensionless width factor
  double scale_rate = 0.0;  // 1/s
};

struct CondensateState {
  std::array<AxisState, 3> axes;
  // Reference frequencies fixing the scale gauge; set when the state is
  // prepared and carried unchanged through every later evolution stage.
  std::array<double, 3> omega_ref = {0.0, 0.0, 0.0};
  double atom_number = 0.0;
  double time = 0.0;  // s, absolute
};

// Instantaneous harmonic field felt by the cloud.
struct FieldPoint {
  std::array<double, 3> omega = {0.0, 0.0, 0.0};  // rad/s
  double center_x = 0.0;                          // m
  double escape_velocity_x = 0.0;                 // m/s
};

// Atoms spill at rate gamma while the axial center-of-mass energy exceeds
// the trap depth.
struct LossModel {
  double gamma = 50.0;  // 1/s
  bool enabled = true;
};

// Uniformly sampled evolution. samples[i] is the state at t0 + i*dt.
struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<CondensateState> samples;
  bool lost = false;  // atom number dropped below one atom at some point

  double t_end() const {
    return t0 + dt * static_cast<double>(samples.empty() ? 0 : samples.size() - 1);
  }
  // Linear interpolation between the two bracketing samples; t must lie in
  // [t0, t_end].
  CondensateState state_at(double t) const;
};

// Cloud at rest in the given trap: centered, stationary, unit scale, with the
// trap frequencies as the scale references.
CondensateState make_stationary_state(const TrapParameters& trap, double atom_number,
                                      double time = 0.0);

// Axial center-of-mass energy relative to the instantaneous trap minimum.
double com_energy_x(const CondensateState& s, const FieldPoint& f, double mass);
// Total center-of-mass energy over all three axes.
double com_energy(const CondensateState& s, const FieldPoint& f, double mass);

FieldPoint field_from_trap(const TrapParameters& p);

namespace detail {

struct AxisDerivative {
  double d_position, d_velocity, d_scale, d_scale_rate;
};

inline AxisDerivative axis_derivative(const AxisState& a, double omega_ref,
                                      double omega, double center) {
  const double w2 = omega * omega;
  const double wr2 = omega_ref * omega_ref;
  const double b = a.scale;
  return {a.velocity, -w2 * (a.position - center), a.scale_rate,
          wr2 / (b * b * b) - w2 * b};
}

}  // namespace detail

// Fixed-step classical fourth-order integration of the center-of-mass and
// scale equations under an arbitrary time-dependent field. The field is
// evaluated at the step edges and midpoint only. Throws NumericalError when
// a state component stops being finite or a scale factor is no longer
// positive. This low-level entry applies no step-size safety check; evolve()
// below does.
template <typename Field>
Trajectory integrate_field(const CondensateState& initial, Field&& field,
                           double dt, std::int64_t steps,
                           const LossModel& loss = {}) {
  if (!(dt > 0.0)) throw DomainError("integration step must be positive");
  if (steps < 0) throw DomainError("negative step count");

  Trajectory traj;
  traj.t0 = initial.time;
  traj.dt = dt;
  traj.samples.reserve(static_cast<std::size_t>(steps) + 1);
  traj.samples.push_back(initial);

  CondensateState s = initial;
  FieldPoint f0 = field(s.time);
  for (std::int64_t step = 0; step < steps; ++step) {
    const double t = traj.t0 + dt * static_cast<double>(step);
    const FieldPoint f1 = field(t + 0.5 * dt);
    const FieldPoint f2 = field(t + dt);

    CondensateState next = s;
    for (int a = 0; a < 3; ++a) {
      const AxisState& y = s.axes[static_cast<std::size_t>(a)];
      const double wr = s.omega_ref[static_cast<std::size_t>(a)];
      const double c0 = a == 0 ? f0.center_x : 0.0;
      const double c1 = a == 0 ? f1.center_x : 0.0;
      const double c2 = a == 0 ? f2.center_x : 0.0;
      const double w0 = f0.omega[static_cast<std::size_t>(a)];
      const double w1 = f1.omega[static_cast<std::size_t>(a)];
      const double w2 = f2.omega[static_cast<std::size_t>(a)];

      const auto k1 = detail::axis_derivative(y, wr, w0, c0);
      AxisState y2{y.position + 0.5 * dt * k1.d_position,
                   y.velocity + 0.5 * dt * k1.d_velocity,
                   y.scale + 0.5 * dt * k1.d_scale,
                   y.scale_rate + 0.5 * dt * k1.d_scale_rate};
      const auto k2 = detail::axis_derivative(y2, wr, w1, c1);
      AxisState y3{y.position + 0.5 * dt * k2.d_position,
                   y.velocity + 0.5 * dt * k2.d_velocity,
                   y.scale + 0.5 * dt * k2.d_scale,
                   y.scale_rate + 0.5 * dt * k2.d_scale_rate};
      const auto k3 = detail::axis_derivative(y3, wr, w1, c1);
      AxisState y4{y.position + dt * k3.d_position, y.velocity + dt * k3.d_velocity,
                   y.scale + dt * k3.d_scale, y.scale_rate + dt * k3.d_scale_rate};
      const auto k4 = detail::axis_derivative(y4, wr, w2, c2);

      AxisState& out = next.axes[static_cast<std::size_t>(a)];
      out.position = y.position + dt / 6.0 *
                                      (k1.d_position + 2.0 * k2.d_position +
                                       2.0 * k3.d_position + k4.d_position);
      out.velocity = y.velocity + dt / 6.0 *
                                      (k1.d_velocity + 2.0 * k2.d_velocity +
                                       2.0 * k3.d_velocity + k4.d_velocity);
      out.scale = y.scale +
                  dt / 6.0 *
                      (k1.d_scale + 2.0 * k2.d_scale + 2.0 * k3.d_scale + k4.d_scale);
      out.scale_rate = y.scale_rate + dt / 6.0 *
                                          (k1.d_scale_rate + 2.0 * k2.d_scale_rate +
                                           2.0 * k3.d_scale_rate + k4.d_scale_rate);

      if (!std::isfinite(out.position) || !std::isfinite(out.velocity) ||
          !std::isfinite(out.scale) || !std::isfinite(out.scale_rate) ||
          !(out.scale > 0.0)) {
        throw NumericalError("integration blew up; reduce the step size");
      }
    }
    next.time = t + dt;

    if (loss.enabled && loss.gamma > 0.0 && next.atom_number > 0.0) {
      const double mass_free_energy =
          next.axes[0].velocity * next.axes[0].velocity +
          f2.omega[0] * f2.omega[0] * (next.axes[0].position - f2.center_x) *
              (next.axes[0].position - f2.center_x);
      const double mass_free_depth =
          f2.escape_velocity_x * f2.escape_velocity_x;
      if (mass_free_energy > mass_free_depth) {
        next.atom_number *= std::exp(-loss.gamma * dt);
      }
    }
    if (next.atom_number < 1.0) traj.lost = true;

    traj.samples.push_back(next);
    s = next;
    f0 = f2;
  }
  return traj;
}

// Evolves the cloud through a control ramp: waveform -> currents -> trap at
// every stage time. 'window' may be shorter than the ramp (a partial
// evolution) but not longer. The requested step is shrunk to divide the
// window exactly, and must not exceed one two-hundredth of the shortest trap
// period reachable during the ramp.
Trajectory evolve(const CondensateState& initial, const RampSpec& spec,
                  const CurrentMapCalibration& cal, double dt, double window,
                  const LossModel& loss = {});

// Evolves the last state of 'head' further and splices the samples into one
// uniform trajectory; both stages use head.dt.
Trajectory extend(Trajectory head, const RampSpec& spec,
                  const CurrentMapCalibration& cal, double window,
                  const LossModel& loss = {});

}  // namespace rampopt
