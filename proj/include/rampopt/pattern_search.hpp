#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "rampopt/exec.hpp"

namespace rampopt {

struct BoxBounds {
  Eigen::VectorXd lo, hi;
};

struct PatternSearchOptions {
  int max_iters = 200;
  double tol = 1e-6;          // stop once the step falls below tol * box width
  double initial_step = 0.25;  // fraction of the box width per dimension
};

struct LocalResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

struct MultistartResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int best_start = -1;
  int evaluations = 0;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

// Coordinate-wise compass search inside a box. Per iteration all 2d axial
// probes are evaluated and the best strictly-improving one is taken (ties by
// lowest probe index); otherwise the step halves. Probes are clipped to the
// box; a probe that collapses onto the current point is skipped. Entirely
// deterministic. Objectives may return +infinity or NaN for invalid points;
// such probes are never accepted.
LocalResult compass_search(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                           const BoxBounds& box, const PatternSearchOptions& opts);

// Runs one compass search per start and keeps the best final value, ties
// resolved by lowest start index, so Serial and Parallel agree bit for bit.
// The objective must be safe to call concurrently under Exec::Parallel.
MultistartResult multistart_minimize(const ObjectiveFn& f,
                                     const std::vector<Eigen::VectorXd>& starts,
                                     const BoxBounds& box,
                                     const PatternSearchOptions& opts,
                                     Exec exec = Exec::Serial);

}  // namespace rampopt
