#include <doctest.h>

#include <cmath>

#include "rampopt/constants.hpp"
#include "rampopt/errors.hpp"
#include "rampopt/trap.hpp"

using namespace rampopt;

namespace {
constexpr double k_two_pi = 6.283185307179586476925287;
}

TEST_CASE("standard calibration reproduces both anchors exactly") {
  const CurrentMapCalibration cal = CurrentMapCalibration::standard();

  const TrapParameters tight = cal.evaluate({14.2, 14.2});
  CHECK(tight.omega_x == doctest::Approx(k_two_pi * 52.0).epsilon(1e-12));
  CHECK(tight.omega_y == doctest::Approx(k_two_pi * 595.0).epsilon(1e-12));
  CHECK(tight.omega_z == tight.omega_y);
  CHECK(tight.center_x == doctest::Approx(0.0));
  CHECK(tight.escape_velocity_x == doctest::Approx(2.0).epsilon(1e-12));

  const TrapParameters weak = cal.evaluate({0.58, 1.9});
  CHECK(weak.omega_x == doctest::Approx(k_two_pi * 5.8).epsilon(1e-12));
  CHECK(weak.omega_y == doctest::Approx(k_two_pi * 15.5).epsilon(1e-12));
  CHECK(weak.center_x == doctest::Approx(9.0e-3).epsilon(1e-12));
  CHECK(weak.escape_velocity_x == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("frequency map matches the power-law solve along the current path") {
  // Frequencies at three interior points of the linear current path, frozen
  // from an independent solve of the same two-anchor system.
  const CurrentMapCalibration cal = CurrentMapCalibration::standard();

  struct Probe {
    double s, omega_radial, omega_axial;
  };
  const Probe probes[] = {
      {0.25, 2691.112402636821, 250.38290703140606},
      {0.50, 1713.7066978267526, 175.9491656056789},
      {0.75, 829.825443608103, 104.1053579760668},
  };
  for (const Probe& p : probes) {
    const TrapConfiguration c{14.2 + p.s * (0.58 - 14.2), 14.2 + p.s * (1.9 - 14.2)};
    const TrapParameters t = cal.evaluate(c);
    CHECK(t.omega_y == doctest::Approx(p.omega_radial).epsilon(1e-12));
    CHECK(t.omega_x == doctest::Approx(p.omega_axial).epsilon(1e-12));
  }
}

TEST_CASE("center and escape velocity interpolate and clamp along the sweep") {
  const CurrentMapCalibration cal = CurrentMapCalibration::standard();

  // Midpoint of the quadrupole sweep: half the displacement, geometric mean
  // of the escape velocities.
  const TrapParameters mid = cal.evaluate({0.5 * (14.2 + 0.58), 8.0});
  CHECK(mid.center_x == doctest::Approx(4.5e-3).epsilon(1e-12));
  CHECK(mid.escape_velocity_x ==
        doctest::Approx(0.6324555320336759).epsilon(1e-12));

  // Beyond either anchor the coordinate clamps instead of extrapolating.
  const TrapParameters above = cal.evaluate({15.0, 14.2});
  CHECK(above.center_x == doctest::Approx(0.0));
  CHECK(above.escape_velocity_x == doctest::Approx(2.0).epsilon(1e-12));
  const TrapParameters below = cal.evaluate({0.3, 1.9});
  CHECK(below.center_x == doctest::Approx(9.0e-3).epsilon(1e-12));
  CHECK(below.escape_velocity_x == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("holding currents for the damping scenario give round frequencies") {
  const CurrentMapCalibration cal = CurrentMapCalibration::standard();
  const TrapParameters t =
      cal.evaluate({0.7698745918742416, 4.541254519184275});
  CHECK(t.omega_x == doctest::Approx(k_two_pi * 15.0).epsilon(1e-9));
  CHECK(t.omega_y == doctest::Approx(k_two_pi * 25.0).epsilon(1e-9));
}

TEST_CASE("controls and currents convert both ways") {
  CurrentMapCalibration cal = CurrentMapCalibration::standard();

  // Channel 1 drives the quadrupole coil alone; the bias coil sums both.
  const TrapConfiguration c = cal.currents_from_controls({3.0, 2.0});
  CHECK(c.quad_current == doctest::Approx(3.0));
  CHECK(c.bias_current == doctest::Approx(5.0));

  const ControlInputs back = cal.controls_from_currents(c);
  CHECK(back.v1 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(back.v2 == doctest::Approx(2.0).epsilon(1e-14));

  cal.set_gains(1.3, 0.7);
  const TrapConfiguration cg = cal.currents_from_controls({3.0, 2.0});
  CHECK(cg.quad_current == doctest::Approx(1.3 * 3.0).epsilon(1e-14));
  CHECK(cg.bias_current == doctest::Approx(1.3 * 3.0 + 0.7 * 2.0).epsilon(1e-14));
  const ControlInputs backg = cal.controls_from_currents(cg);
  CHECK(backg.v1 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(backg.v2 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("trap evaluation rejects currents the hardware cannot hold") {
  const CurrentMapCalibration cal = CurrentMapCalibration::standard();
  CHECK_THROWS_AS(cal.evaluate({0.1, 1.9}), UntrappableError);
  CHECK_THROWS_AS(cal.evaluate({1.0, 0.0}), UntrappableError);
  CHECK_THROWS_AS(cal.evaluate({1.0, -0.5}), UntrappableError);
  CHECK_THROWS_AS(cal.evaluate({25.0, 1.9}), BoundsError);
  CHECK_THROWS_AS(cal.evaluate({1.0, 25.0}), BoundsError);
}

TEST_CASE("control box is enforced before any current math") {
  CurrentMapCalibration cal = CurrentMapCalibration::standard();
  ControlBox box;
  box.v1_lo = 0.0;
  box.v1_hi = 10.0;
  box.v2_lo = -1.0;
  box.v2_hi = 1.0;
  cal.set_control_box(box);
  CHECK_THROWS_AS(cal.currents_from_controls({11.0, 0.0}), BoundsError);
  CHECK_THROWS_AS(cal.currents_from_controls({5.0, 2.0}), BoundsError);
  CHECK_NOTHROW(cal.currents_from_controls({5.0, 0.5}));
}

TEST_CASE("calibration setters reject nonsense") {
  CurrentMapCalibration cal = CurrentMapCalibration::standard();
  CHECK_THROWS_AS(cal.set_gains(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(cal.set_gains(1.0, -2.0), DomainError);
  CHECK_THROWS_AS(cal.set_current_limits(0.0, 20.0), DomainError);
  CHECK_THROWS_AS(cal.set_current_limits(5.0, 5.0), DomainError);
}

TEST_CASE("calibration fit rejects degenerate or non-physical anchors") {
  CurrentMapCalibration::Anchor a;
  a.currents = {14.2, 14.2};
  a.omega_axial = 1.0;
  a.omega_radial = 2.0;
  CurrentMapCalibration::Anchor b = a;
  b.currents = {0.58, 1.9};

  // Anchors must differ in both coil currents.
  CurrentMapCalibration::Anchor same_quad = b;
  same_quad.currents.quad_current = a.currents.quad_current;
  CHECK_THROWS_AS(CurrentMapCalibration::fit(a, same_quad, 9e-3, 2.0, 0.2, 1e-26),
                  DomainError);

  CurrentMapCalibration::Anchor bad = b;
  bad.omega_axial = 0.0;
  CHECK_THROWS_AS(CurrentMapCalibration::fit(a, bad, 9e-3, 2.0, 0.2, 1e-26),
                  DomainError);
  CHECK_THROWS_AS(CurrentMapCalibration::fit(a, b, 9e-3, -2.0, 0.2, 1e-26),
                  DomainError);
  CHECK_THROWS_AS(CurrentMapCalibration::fit(a, b, 9e-3, 2.0, 0.2, 0.0),
                  DomainError);
}

TEST_CASE("decompression timescale matches the closed form") {
  // (omega_i - omega_f) / (4 sqrt(2) omega_i omega_f), frozen from an
  // independent evaluation.
  CHECK(adiabatic_decompression_timescale(k_two_pi * 595.0, k_two_pi * 5.8) ==
        doctest::Approx(0.004803556699867492).epsilon(1e-12));
  CHECK(adiabatic_decompression_timescale(k_two_pi * 595.0, k_two_pi * 15.0) ==
        doctest::Approx(0.0018283734711874004).epsilon(1e-12));
  // Equal frequencies need no time at all.
  CHECK(adiabatic_decompression_timescale(2.0, 2.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(adiabatic_decompression_timescale(1.0, 2.0), DomainError);
  CHECK_THROWS_AS(adiabatic_decompression_timescale(1.0, 0.0), DomainError);
}

TEST_CASE("transport timescale matches the closed form") {
  CHECK(adiabatic_transport_timescale(k_mass_he_star, 9e-3, k_two_pi * 52.0) ==
        doctest::Approx(0.1555528797554123).epsilon(1e-12));
  CHECK(adiabatic_transport_timescale(k_mass_he_star, 9e-3, k_two_pi * 5.8) ==
        doctest::Approx(0.8059527253049341).epsilon(1e-12));
  CHECK(adiabatic_transport_timescale(6.6465e-27, 1e-3, k_two_pi * 10.0) ==
        doctest::Approx(0.17854977556793358).epsilon(1e-12));
  CHECK_THROWS_AS(adiabatic_transport_timescale(0.0, 1e-3, 1.0), DomainError);
  CHECK_THROWS_AS(adiabatic_transport_timescale(1e-26, -1e-3, 1.0), DomainError);
  CHECK_THROWS_AS(adiabatic_transport_timescale(1e-26, 1e-3, 0.0), DomainError);
}

TEST_CASE("omega_max picks the stiffest axis") {
  TrapParameters p;
  p.omega_x = 3.0;
  p.omega_y = 1.0;
  p.omega_z = 2.0;
  CHECK(p.omega_max() == doctest::Approx(3.0));
  CHECK(p.omegas()[0] == doctest::Approx(3.0));
  CHECK(p.omegas()[1] == doctest::Approx(1.0));
}
