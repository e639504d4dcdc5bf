#pragma once

#include <array>

namespace rampopt {

// Coil currents, amperes.
struct TrapConfiguration {
  double quad_current = 0.0;
  double bias_current = 0.0;
};

// Controller channel voltages.
struct ControlInputs {
  double v1 = 0.0;
  double v2 = 0.0;
};

// Instantaneous harmonic trap derived from a pair of coil currents.
// x is the weak (axial) direction; y and z are the tight radial pair.
struct TrapParameters {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;
  double omega_z = 0.0;
  double center_x = 0.0;           // m, trap minimum along x (y, z centers are 0)
  double escape_velocity_x = 0.0;  // m/s; trap depth along x is m v^2 / 2

  std::array<double, 3> omegas() const { return {omega_x, omega_y, omega_z}; }
  double omega_max() const;
};

// Inclusive rectangular box for the two control channels.
struct ControlBox {
  double v1_lo = 0.0, v1_hi = 20.0;
  double v2_lo = -20.0, v2_hi = 20.0;
};

// Smooth current -> trap map anchored to two measured operating points.
//
//   omega_radial = A_r * I_Q * I_B^q_r
//   omega_axial  = A_x * I_B^q_x
//
// The four coefficients are solved so both anchors are reproduced exactly.
// The trap minimum moves linearly with the normalized position along the
// anchor-to-anchor quadrupole axis, and the escape velocity interpolates
// log-linearly along the same coordinate; both are clamped outside [0, 1].
class CurrentMapCalibration {
 public:
  struct Anchor {
    TrapConfiguration currents;
    double omega_axial = 0.0;   // rad/s
    double omega_radial = 0.0;  // rad/s
  };

  // Solves the power-law coefficients from two anchors. Requires positive
  // currents and frequencies and anchors that differ in both currents.
  static CurrentMapCalibration fit(const Anchor& initial, const Anchor& final_state,
                                   double displacement_x, double v_escape_initial,
                                   double v_escape_final, double atom_mass);

  // The published operating points: (14.2, 14.2) A at 2*pi*(52, 595) Hz and
  // (0.58, 1.9) A at 2*pi*(5.8, 15.5) Hz, a 9 mm displacement, and escape
  // velocities 2.0 -> 0.2 m/s.
  static CurrentMapCalibration standard();

  TrapParameters evaluate(const TrapConfiguration& c) const;
  TrapConfiguration currents_from_controls(const ControlInputs& in) const;
  ControlInputs controls_from_currents(const TrapConfiguration& c) const;

  double atom_mass() const { return mass_; }
  const Anchor& initial_anchor() const { return initial_; }
  const Anchor& final_anchor() const { return final_; }
  const ControlBox& control_box() const { return box_; }

  void set_control_box(const ControlBox& b) { box_ = b; }
  void set_gains(double k1, double k2);
  void set_current_limits(double min_quad, double max_current);

  double min_quad_current() const { return min_quad_; }
  double max_current() const { return max_current_; }
  double gain_k1() const { return k1_; }
  double gain_k2() const { return k2_; }

 private:
  Anchor initial_, final_;
  double amp_radial_ = 0.0, exp_radial_ = 0.0;
  double amp_axial_ = 0.0, exp_axial_ = 0.0;
  double displacement_ = 0.0;
  double v_escape_initial_ = 0.0, v_escape_final_ = 0.0;
  double mass_ = 0.0;
  double k1_ = 1.0, k2_ = 1.0;  // A/V channel gains
  double min_quad_ = 0.2;       // A, below this the cloud is not held
  double max_current_ = 20.0;   // A, per coil hardware limit
  ControlBox box_;
};

TrapConfiguration controls_to_currents(const ControlInputs& in,
                                       const CurrentMapCalibration& cal);
TrapParameters trap_from_currents(const TrapConfiguration& c,
                                  const CurrentMapCalibration& cal);

// Minimum time for which a frequency sweep omega_i -> omega_f counts as
// adiabatic: (omega_i - omega_f) / (4 sqrt(2) omega_i omega_f), the equality
// point of the harmonic-oscillator decompression condition
// |sqrt(2) omega_dot / (8 omega^2)| << 1. Requires omega_i >= omega_f > 0.
double adiabatic_decompression_timescale(double omega_initial, double omega_final);

// Minimum adiabatic transport time over a distance d in a trap of frequency
// omega: (4 m d^2 / (hbar omega^3))^(1/4).
double adiabatic_transport_timescale(double mass, double distance, double omega);

}  // namespace rampopt
