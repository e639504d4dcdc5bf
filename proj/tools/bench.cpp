#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "rampopt/atom_laser.hpp"
#include "rampopt/exec.hpp"
#include "rampopt/gp.hpp"
#include "rampopt/optimizer.hpp"
#include "rampopt/pattern_search.hpp"
#include "rampopt/rng.hpp"

// Times each OpenMP-parallel kernel against its serial execution and checks
// that both produce identical bits. Run with OMP_NUM_THREADS set to taste.

namespace {

using rampopt::Exec;

double time_ms(int reps, const std::function<void()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) body();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-22s %10.2f ms %10.2f ms %7.2fx   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, identical ? "identical" : "DIFFERS");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", rampopt::max_threads());
  std::printf("%-22s %13s %13s %8s   %s\n", "kernel", "serial", "parallel",
              "speedup", "check");

  const int n = 120, d = 8;
  auto rng = rampopt::engine_for(7, "bench");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) x(i, k) = u(rng);
    y[i] = (x.row(i).array() - 0.3).square().sum() + 0.01 * u(rng);
  }

  // Hyperparameter search: the multistart spreads across threads.
  rampopt::GpSurrogate gp_serial, gp_parallel;
  const double fit_s =
      time_ms(3, [&] { gp_serial = rampopt::GpSurrogate::fit(x, y, 11, {}, Exec::Serial); });
  const double fit_p =
      time_ms(3, [&] { gp_parallel = rampopt::GpSurrogate::fit(x, y, 11, {}, Exec::Parallel); });
  const bool fit_same =
      gp_serial.hyper().length_scales == gp_parallel.hyper().length_scales &&
      gp_serial.hyper().signal_variance == gp_parallel.hyper().signal_variance &&
      gp_serial.hyper().noise_variance == gp_parallel.hyper().noise_variance;
  report("hyperparameter fit", fit_s, fit_p, fit_same);

  // Acquisition search over the surrogate.
  std::vector<Eigen::VectorXd> starts;
  for (int s = 0; s < 21; ++s) {
    Eigen::VectorXd p(d);
    auto srng = rampopt::engine_for(13, "start", static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> su(0.0, 1.0);
    for (int k = 0; k < d; ++k) p[k] = su(srng);
    starts.push_back(p);
  }
  const auto acquisition = [&](const Eigen::VectorXd& q) {
    const auto pred = gp_serial.predict(q);
    return pred.mean - pred.stddev;
  };
  rampopt::BoxBounds cube{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
  rampopt::PatternSearchOptions search{200, 1e-6, 0.25};
  rampopt::MultistartResult acq_serial, acq_parallel;
  const double acq_s = time_ms(3, [&] {
    acq_serial = multistart_minimize(acquisition, starts, cube, search, Exec::Serial);
  });
  const double acq_p = time_ms(3, [&] {
    acq_parallel =
        multistart_minimize(acquisition, starts, cube, search, Exec::Parallel);
  });
  report("acquisition search", acq_s, acq_p,
         acq_serial.value == acq_parallel.value && acq_serial.x == acq_parallel.x);

  // Pulse train over a synthetic trajectory.
  rampopt::Trajectory traj;
  traj.t0 = 0.0;
  traj.dt = 1e-3;
  rampopt::CondensateState s0;
  s0.omega_ref = {60.0, 100.0, 100.0};
  s0.atom_number = 8e5;
  for (int i = 0; i <= 2600; ++i) {
    rampopt::CondensateState s = s0;
    s.time = traj.dt * i;
    s.axes[0].position = 1e-3 * std::sin(6.0 * s.time);
    s.axes[0].velocity = 6e-3 * std::cos(6.0 * s.time);
    traj.samples.push_back(s);
  }
  rampopt::PulseTrain train;
  train.start_time = 0.0;
  train.pulse_count = 250;
  rampopt::CloudShape shape;
  rampopt::PulseSimResult pulses_serial, pulses_parallel;
  const double pul_s = time_ms(20, [&] {
    pulses_serial = simulate_pulses(traj, train, shape, 0.0, 99, Exec::Serial);
  });
  const double pul_p = time_ms(20, [&] {
    pulses_parallel = simulate_pulses(traj, train, shape, 0.0, 99, Exec::Parallel);
  });
  bool pulses_same = pulses_serial.events.size() == pulses_parallel.events.size();
  for (std::size_t i = 0; pulses_same && i < pulses_serial.events.size(); ++i) {
    pulses_same = pulses_serial.events[i].t == pulses_parallel.events[i].t &&
                  pulses_serial.events[i].x == pulses_parallel.events[i].x &&
                  pulses_serial.events[i].y == pulses_parallel.events[i].y;
  }
  report("pulse simulation", pul_s, pul_p, pulses_same);

  // Landscape grid over the surrogate.
  const Eigen::VectorXd center = Eigen::VectorXd::Constant(d, 0.35);
  rampopt::LandscapeSlice slice_serial, slice_parallel;
  const double land_s = time_ms(3, [&] {
    slice_serial = landscape_slice(gp_serial, center, 41, 0.25, Exec::Serial);
  });
  const double land_p = time_ms(3, [&] {
    slice_parallel = landscape_slice(gp_serial, center, 41, 0.25, Exec::Parallel);
  });
  report("landscape grid", land_s, land_p,
         slice_serial.values == slice_parallel.values);
  return 0;
}
