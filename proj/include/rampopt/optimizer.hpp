#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rampopt/cost.hpp"
#include "rampopt/de.hpp"
#include "rampopt/exec.hpp"
#include "rampopt/gp.hpp"
#include "rampopt/pattern_search.hpp"

namespace rampopt {

// Which strategy proposed an evaluation. Gp<b> minimizes mean - b * stddev
// over the surrogate; De is the evolution step (also used while the
// surrogate cannot be fitted yet).
enum class Source { Init, Gp0, Gp1, Gp2, Gp3, De };

const char* to_string(Source s);
Source source_from_string(const std::string& s);

struct Observation {
  int index = -1;
  Source source = Source::Init;
  Eigen::VectorXd unit;  // parameters in the unit cube
  Eigen::VectorXd raw;   // parameters in instrument units
  CostReport report;
  std::uint64_t eval_seed = 0;
  double wall_ms = 0.0;
};

// Axis-aligned raw parameter box; all search logic runs on the unit cube.
struct ParameterSpace {
  Eigen::VectorXd lo, hi;

  Eigen::Index dimension() const { return lo.size(); }
  Eigen::VectorXd to_unit(const Eigen::VectorXd& raw) const;
  Eigen::VectorXd to_raw(const Eigen::VectorXd& unit) const;
};

struct OptimizerSettings {
  int budget = 200;
  int initial_designs = 0;       // 0 picks 2 * dimension + 1
  double initial_spread = 0.10;  // unit-cube sigma of the perturbed designs
  int refit_interval = 5;    // minimum successful points between full hyper fits
  double refit_growth = 0.5;  // extra gap as a fraction of the current count
  GpFitOptions gp;
  PatternSearchOptions acquisition{200, 1e-6, 0.25};
  int acquisition_starts = 20;  // seeded starts next to the incumbent
  DeOptions de;
  Exec exec = Exec::Serial;
};

// The experiment callback receives raw parameters plus a per-evaluation seed
// derived from the master seed and the evaluation index. Throwing a rampopt
// Error inside the callback records a failed observation and the loop
// continues; any other exception propagates.
using ExperimentFn =
    std::function<CostReport(const Eigen::VectorXd& raw, std::uint64_t eval_seed)>;
// Called once per observation, immediately after it completes and before the
// next proposal is formed.
using ObservationSink = std::function<void(const Observation&)>;

struct OptimizationResult {
  std::vector<Observation> history;
  int best_index = -1;  // lowest successful total; -1 when everything failed
  bool has_surrogate = false;
  GpSurrogate surrogate;  // final refit over all successful observations

  const Observation& best() const;
};

// Runs the full closed loop: one exact evaluation of 'initial_raw', then
// perturbed initial designs, then the repeating proposal cycle
// [Gp0, Gp1, Gp2, Gp3, De] until the budget is spent. A zero-dimensional
// space collapses to the single initial evaluation. Reproducible: the
// history depends only on (space, initial_raw, settings, master_seed) and
// the callback's behavior, never on thread count.
OptimizationResult run_optimization(const ParameterSpace& space,
                                    const Eigen::VectorXd& initial_raw,
                                    const OptimizerSettings& settings,
                                    std::uint64_t master_seed,
                                    const ExperimentFn& experiment,
                                    const ObservationSink& sink = {});

// Fits a surrogate to the successful observations (InsufficientDataError
// below two).
GpSurrogate fit_observations(const std::vector<Observation>& history,
                             std::uint64_t seed, const GpFitOptions& opts = {},
                             Exec exec = Exec::Serial);

// Cross-section of the fitted surrogate through a center point, spanned by
// the two stiffest axes (largest second derivative along each coordinate).
struct LandscapeSlice {
  int axis1 = -1;  // stiffest
  int axis2 = -1;
  Eigen::VectorXd curvature;  // per input dimension, at the center
  Eigen::VectorXd grid1, grid2;
  Eigen::MatrixXd values;  // mean(grid1[i], grid2[j]) - mean(center)
};

LandscapeSlice landscape_slice(const GpSurrogate& surrogate,
                               const Eigen::VectorXd& center_unit, int grid_points,
                               double half_span = 0.25, Exec exec = Exec::Serial);

}  // namespace rampopt
