#include "rampopt/trap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rampopt/constants.hpp"
#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

constexpr double k_two_pi = 6.283185307179586476925287;

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

}  // namespace

double TrapParameters::omega_max() const {
  return std::max({omega_x, omega_y, omega_z});
}

CurrentMapCalibration CurrentMapCalibration::fit(const Anchor& initial,
                                                 const Anchor& final_state,
                                                 double displacement_x,
                                                 double v_escape_initial,
                                                 double v_escape_final,
                                                 double atom_mass) {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "calibration requires positive " << name << ", got " << v;
      throw DomainError(os.str());
    }
  };
  for (const auto* a : {&initial, &final_state}) {
    require_positive(a->currents.quad_current, "quadrupole current");
    require_positive(a->currents.bias_current, "bias current");
    require_positive(a->omega_axial, "axial frequency");
    require_positive(a->omega_radial, "radial frequency");
  }
  require_positive(v_escape_initial, "escape velocity");
  require_positive(v_escape_final, "escape velocity");
  require_positive(atom_mass, "atom mass");
  if (initial.currents.quad_current == final_state.currents.quad_current ||
      initial.currents.bias_current == final_state.currents.bias_current) {
    throw DomainError("calibration anchors must differ in both coil currents");
  }

  const double iq_ratio =
      initial.currents.quad_current / final_state.currents.quad_current;
  const double ib_ratio =
      initial.currents.bias_current / final_state.currents.bias_current;

  CurrentMapCalibration cal;
  cal.initial_ = initial;
  cal.final_ = final_state;
  // Two equations per direction, solved in log space.
  cal.exp_radial_ =
      std::log((initial.omega_radial / final_state.omega_radial) / iq_ratio) /
      std::log(ib_ratio);
  cal.amp_radial_ = initial.omega_radial /
                    (initial.currents.quad_current *
                     std::pow(initial.currents.bias_current, cal.exp_radial_));
  cal.exp_axial_ = std::log(initial.omega_axial / final_state.omega_axial) /
                   std::log(ib_ratio);
  cal.amp_axial_ = initial.omega_axial /
                   std::pow(initial.currents.bias_current, cal.exp_axial_);
  cal.displacement_ = displacement_x;
  cal.v_escape_initial_ = v_escape_initial;
  cal.v_escape_final_ = v_escape_final;
  cal.mass_ = atom_mass;
  return cal;
}

CurrentMapCalibration CurrentMapCalibration::standard() {
  Anchor initial;
  initial.currents = {14.2, 14.2};
  initial.omega_axial = k_two_pi * 52.0;
  initial.omega_radial = k_two_pi * 595.0;
  Anchor final_state;
  final_state.currents = {0.58, 1.9};
  final_state.omega_axial = k_two_pi * 5.8;
  final_state.omega_radial = k_two_pi * 15.5;
  return fit(initial, final_state, 9.0e-3, 2.0, 0.2, k_mass_he_star);
}

void CurrentMapCalibration::set_gains(double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw DomainError("channel gains must be positive");
  k1_ = k1;
  k2_ = k2;
}

void CurrentMapCalibration::set_current_limits(double min_quad, double max_current) {
  if (!(min_quad > 0.0) || !(max_current > min_quad)) {
    throw DomainError("current limits must satisfy 0 < min_quad < max_current");
  }
  min_quad_ = min_quad;
  max_current_ = max_current;
}

TrapParameters CurrentMapCalibration::evaluate(const TrapConfiguration& c) const {
  if (!(c.quad_current >= min_quad_)) {
    std::ostringstream os;
    os << "quadrupole current " << c.quad_current << " A below the " << min_quad_
       << " A holding minimum";
    throw UntrappableError(os.str());
  }
  if (!(c.bias_current > 0.0)) {
    std::ostringstream os;
    os << "bias current " << c.bias_current << " A does not confine";
    throw UntrappableError(os.str());
  }
  if (c.quad_current > max_current_ || c.bias_current > max_current_) {
    std::ostringstream os;
    os << "currents (" << c.quad_current << ", " << c.bias_current
       << ") A exceed the " << max_current_ << " A coil limit";
    throw BoundsError(os.str());
  }

  TrapParameters p;
  const double radial =
      amp_radial_ * c.quad_current * std::pow(c.bias_current, exp_radial_);
  p.omega_x = amp_axial_ * std::pow(c.bias_current, exp_axial_);
  p.omega_y = radial;
  p.omega_z = radial;

  // Normalized position along the quadrupole sweep; the trap sits at 0 at the
  // initial anchor and at +displacement at the final anchor.
  const double iq_i = initial_.currents.quad_current;
  const double iq_f = final_.currents.quad_current;
  const double s = clamp01((c.quad_current - iq_i) / (iq_f - iq_i));
  p.center_x = displacement_ * s;
  p.escape_velocity_x =
      v_escape_initial_ * std::pow(v_escape_final_ / v_escape_initial_, s);
  return p;
}

TrapConfiguration CurrentMapCalibration::currents_from_controls(
    const ControlInputs& in) const {
  if (in.v1 < box_.v1_lo || in.v1 > box_.v1_hi || in.v2 < box_.v2_lo ||
      in.v2 > box_.v2_hi) {
    std::ostringstream os;
    os << "controls (" << in.v1 << ", " << in.v2 << ") V outside the box ["
       << box_.v1_lo << ", " << box_.v1_hi << "] x [" << box_.v2_lo << ", "
       << box_.v2_hi << "]";
    throw BoundsError(os.str());
  }
  // Channel 1 drives the quadrupole coil alone; the bias coil sums both
  // channels behind its own gain.
  TrapConfiguration c;
  c.quad_current = k1_ * in.v1;
  c.bias_current = k2_ * (in.v1 + in.v2);
  return c;
}

ControlInputs CurrentMapCalibration::controls_from_currents(
    const TrapConfiguration& c) const {
  ControlInputs in;
  in.v1 = c.quad_current / k1_;
  in.v2 = c.bias_current / k2_ - in.v1;
  return in;
}

TrapConfiguration controls_to_currents(const ControlInputs& in,
                                       const CurrentMapCalibration& cal) {
  return cal.currents_from_controls(in);
}

TrapParameters trap_from_currents(const TrapConfiguration& c,
                                  const CurrentMapCalibration& cal) {
  return cal.evaluate(c);
}

double adiabatic_decompression_timescale(double omega_initial, double omega_final) {
  if (!(omega_final > 0.0) || !(omega_initial >= omega_final)) {
    throw DomainError("decompression timescale requires omega_initial >= omega_final > 0");
  }
  return (omega_initial - omega_final) /
         (4.0 * std::sqrt(2.0) * omega_initial * omega_final);
}

double adiabatic_transport_timescale(double mass, double distance, double omega) {
  if (!(mass > 0.0) || !(distance > 0.0) || !(omega > 0.0)) {
    throw DomainError("transport timescale requires positive mass, distance, frequency");
  }
  return std::pow(4.0 * mass * distance * distance / (k_hbar * omega * omega * omega),
                  0.25);
}

}  // namespace rampopt
