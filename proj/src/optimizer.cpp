#include "rampopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "rampopt/errors.hpp"
#include "rampopt/rng.hpp"

namespace rampopt {

namespace {

void validate_space(const ParameterSpace& space) {
  if (space.lo.size() != space.hi.size()) {
    throw DomainError("parameter box bounds disagree in dimension");
  }
  for (Eigen::Index k = 0; k < space.lo.size(); ++k) {
    if (!(space.lo[k] < space.hi[k])) {
      std::ostringstream os;
      os << "degenerate parameter box in dimension " << k;
      throw DomainError(os.str());
    }
  }
}

CostReport failed_report() {
  CostReport r;
  r.failed = true;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.oscillation_cost = r.range_penalty = r.width_cost = r.total = nan;
  return r;
}

// Second derivative from three points with possibly uneven spacing.
double second_difference(double f_lo, double f_mid, double f_hi, double x_lo,
                         double x_mid, double x_hi) {
  const double h1 = x_mid - x_lo;
  const double h2 = x_hi - x_mid;
  return 2.0 * (f_lo * h2 + f_hi * h1 - f_mid * (h1 + h2)) / (h1 * h2 * (h1 + h2));
}

}  // namespace

const char* to_string(Source s) {
  switch (s) {
    case Source::Init: return "init";
    case Source::Gp0: return "gp0";
    case Source::Gp1: return "gp1";
    case Source::Gp2: return "gp2";
    case Source::Gp3: return "gp3";
    case Source::De: return "de";
  }
  return "unknown";
}

Source source_from_string(const std::string& s) {
  if (s == "init") return Source::Init;
  if (s == "gp0") return Source::Gp0;
  if (s == "gp1") return Source::Gp1;
  if (s == "gp2") return Source::Gp2;
  if (s == "gp3") return Source::Gp3;
  if (s == "de") return Source::De;
  throw DomainError("unknown proposal source '" + s + "'");
}

Eigen::VectorXd ParameterSpace::to_unit(const Eigen::VectorXd& raw) const {
  return ((raw - lo).array() / (hi - lo).array()).matrix();
}

Eigen::VectorXd ParameterSpace::to_raw(const Eigen::VectorXd& unit) const {
  return (lo.array() + unit.array() * (hi - lo).array()).matrix();
}

const Observation& OptimizationResult::best() const {
  if (best_index < 0) throw InsufficientDataError("no successful observation");
  return history[static_cast<std::size_t>(best_index)];
}

GpSurrogate fit_observations(const std::vector<Observation>& history,
                             std::uint64_t seed, const GpFitOptions& opts,
                             Exec exec) {
  std::vector<const Observation*> ok;
  for (const Observation& o : history) {
    if (!o.report.failed) ok.push_back(&o);
  }
  if (ok.size() < 2) {
    throw InsufficientDataError("need two successful observations to fit");
  }
  const Eigen::Index d = ok.front()->unit.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ok.size()), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = ok[i]->unit.transpose();
    y[static_cast<Eigen::Index>(i)] = ok[i]->report.total;
  }
  return GpSurrogate::fit(x, y, seed, opts, exec);
}

OptimizationResult run_optimization(const ParameterSpace& space,
                                    const Eigen::VectorXd& initial_raw,
                                    const OptimizerSettings& settings,
                                    std::uint64_t master_seed,
                                    const ExperimentFn& experiment,
                                    const ObservationSink& sink) {
  validate_space(space);
  if (!experiment) throw DomainError("experiment callback is empty");
  if (initial_raw.size() != space.dimension()) {
    throw DomainError("initial point dimension mismatch");
  }
  for (Eigen::Index k = 0; k < space.dimension(); ++k) {
    if (initial_raw[k] < space.lo[k] || initial_raw[k] > space.hi[k]) {
      throw BoundsError("initial point outside the parameter box");
    }
  }
  if (settings.budget < 1) throw DomainError("budget must be at least one");

  const int d = static_cast<int>(space.dimension());
  // Without parameters every evaluation is the same shot; run it once.
  const int budget = d == 0 ? 1 : settings.budget;
  const int n_init =
      d == 0 ? 1
             : std::min(budget, settings.initial_designs > 0
                                    ? settings.initial_designs
                                    : 2 * d + 1);

  OptimizationResult result;
  result.history.reserve(static_cast<std::size_t>(budget));

  DifferentialEvolution de(std::max(1, d), settings.de,
                           derive_seed(master_seed, "de-population"));

  GpHyper hyper;
  bool have_hyper = false;
  int successes_at_fit = 0;
  std::uint64_t fit_counter = 0;

  double best_total = std::numeric_limits<double>::infinity();
  double worst_total = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd unit0 =
      d == 0 ? Eigen::VectorXd(0) : space.to_unit(initial_raw);

  const auto successful = [&]() {
    int n = 0;
    for (const Observation& o : result.history) {
      if (!o.report.failed) ++n;
    }
    return n;
  };

  // Rebuilds or refreshes the surrogate over all successful observations.
  // A full hyper search runs on the first fit and then on a schedule that
  // starts at every 'refit_interval' successes and stretches geometrically
  // as the dataset grows (hyperparameters drift slowly once the data is
  // dense, and a full search costs n^3 per probe). In between, the stored
  // hyperparameters are reused and only the conditioning is redone.
  const auto refresh_surrogate = [&]() -> bool {
    const int n_ok = successful();
    if (d == 0 || n_ok < 2) return false;
    const int gap = std::max(
        settings.refit_interval,
        static_cast<int>(std::ceil(settings.refit_growth *
                                   static_cast<double>(successes_at_fit))));
    try {
      if (!have_hyper || n_ok - successes_at_fit >= gap) {
        result.surrogate = fit_observations(
            result.history, derive_seed(master_seed, "gp-fit", fit_counter++),
            settings.gp, settings.exec);
        hyper = result.surrogate.hyper();
        have_hyper = true;
        successes_at_fit = n_ok;
      } else {
        Eigen::MatrixXd x(n_ok, d);
        Eigen::VectorXd y(n_ok);
        Eigen::Index row = 0;
        for (const Observation& o : result.history) {
          if (o.report.failed) continue;
          x.row(row) = o.unit.transpose();
          y[row] = o.report.total;
          ++row;
        }
        result.surrogate = GpSurrogate::with_hyper(x, y, hyper);
      }
      result.has_surrogate = true;
      return true;
    } catch (const NumericalError&) {
      // A degenerate batch (for instance all costs identical) must not kill
      // the run; the loop falls back to evolution proposals.
      result.has_surrogate = false;
      return false;
    }
  };

  for (int index = 0; index < budget; ++index) {
    Observation obs;
    obs.index = index;
    bool de_proposal_used = false;
    DifferentialEvolution::Proposal de_prop;

    if (index == 0) {
      obs.source = Source::Init;
      obs.unit = unit0;
    } else if (index < n_init) {
      obs.source = Source::Init;
      auto rng = engine_for(master_seed, "init", static_cast<std::uint64_t>(index));
      std::normal_distribution<double> n01;
      obs.unit = unit0;
      for (int k = 0; k < d; ++k) {
        obs.unit[k] = std::clamp(obs.unit[k] + settings.initial_spread * n01(rng),
                                 0.0, 1.0);
      }
    } else {
      const int step = (index - n_init) % 5;
      const bool gp_ready = step < 4 && refresh_surrogate();
      if (gp_ready) {
        obs.source = step == 0   ? Source::Gp0
                     : step == 1 ? Source::Gp1
                     : step == 2 ? Source::Gp2
                                 : Source::Gp3;
        const double bias = static_cast<double>(step);
        const GpSurrogate& gp = result.surrogate;
        const auto acquisition = [&gp, bias](const Eigen::VectorXd& u) {
          const GpPrediction p = gp.predict(u);
          return p.mean - bias * p.stddev;
        };

        // Start portfolio: the incumbent, jittered copies of the best few
        // successful points (locals refine the living region), and uniform
        // draws for global reach. One stream, fixed order, so the proposal
        // is a pure function of (master seed, index).
        std::vector<Eigen::VectorXd> starts;
        starts.reserve(static_cast<std::size_t>(settings.acquisition_starts) + 1);
        if (result.best_index >= 0) {
          starts.push_back(
              result.history[static_cast<std::size_t>(result.best_index)].unit);
        }
        std::vector<const Observation*> elites;
        for (const Observation& past : result.history) {
          if (!past.report.failed) elites.push_back(&past);
        }
        std::sort(elites.begin(), elites.end(),
                  [](const Observation* a, const Observation* b) {
                    return a->report.total != b->report.total
                               ? a->report.total < b->report.total
                               : a->index < b->index;
                  });
        const int n_elite =
            std::min<int>(settings.acquisition_starts / 4,
                          static_cast<int>(elites.size()));
        auto rng =
            engine_for(master_seed, "acq", static_cast<std::uint64_t>(index));
        std::normal_distribution<double> n01;
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int s = 0; s < n_elite; ++s) {
          Eigen::VectorXd u = elites[static_cast<std::size_t>(s)]->unit;
          for (int k = 0; k < d; ++k) {
            u[k] = std::clamp(u[k] + 0.05 * n01(rng), 0.0, 1.0);
          }
          starts.push_back(std::move(u));
        }
        for (int s = n_elite; s < settings.acquisition_starts; ++s) {
          Eigen::VectorXd u(d);
          for (int k = 0; k < d; ++k) u[k] = u01(rng);
          starts.push_back(std::move(u));
        }
        BoxBounds cube{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
        obs.unit = multistart_minimize(acquisition, starts, cube,
                                       settings.acquisition, settings.exec)
                       .x;
      } else {
        obs.source = Source::De;
        de_prop =
            de.propose(derive_seed(master_seed, "de-step",
                                   static_cast<std::uint64_t>(index)));
        obs.unit = de_prop.x;
        de_proposal_used = true;
      }
    }

    obs.raw = d == 0 ? initial_raw : space.to_raw(obs.unit);
    obs.eval_seed = derive_seed(master_seed, "eval", static_cast<std::uint64_t>(index));

    const auto t_start = std::chrono::steady_clock::now();
    try {
      obs.report = experiment(obs.raw, obs.eval_seed);
    } catch (const Error&) {
      obs.report = failed_report();
    }
    obs.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    if (!obs.report.failed && !std::isfinite(obs.report.total)) {
      obs.report = failed_report();
    }

    if (!obs.report.failed) {
      if (obs.report.total < best_total) {
        best_total = obs.report.total;
        result.best_index = index;
      }
      worst_total = std::max(worst_total, obs.report.total);
    }

    if (de_proposal_used) {
      const double substituted =
          obs.report.failed
              ? (std::isfinite(worst_total)
                     ? 2.0 * worst_total
                     : std::numeric_limits<double>::infinity())
              : obs.report.total;
      de.tell(de_prop, substituted, !obs.report.failed);
    }

    result.history.push_back(obs);
    if (sink) sink(result.history.back());
  }

  refresh_surrogate();
  return result;
}

LandscapeSlice landscape_slice(const GpSurrogate& surrogate,
                               const Eigen::VectorXd& center_unit, int grid_points,
                               double half_span, Exec exec) {
  const Eigen::Index d = surrogate.dimension();
  if (d < 2) throw DomainError("landscape slice needs at least two dimensions");
  if (center_unit.size() != d) throw DomainError("center dimension mismatch");
  if (grid_points < 2) throw DomainError("grid needs at least two points");
  if (!(half_span > 0.0)) throw DomainError("half span must be positive");

  LandscapeSlice slice;
  slice.curvature.resize(d);
  const double center_value = surrogate.predict(center_unit).mean;
  const double h = 0.01;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double c = std::clamp(center_unit[k], 0.0, 1.0);
    const double lo = std::max(0.0, c - h);
    const double hi = std::min(1.0, c + h);
    Eigen::VectorXd p = center_unit;
    p[k] = lo;
    const double f_lo = surrogate.predict(p).mean;
    p[k] = hi;
    const double f_hi = surrogate.predict(p).mean;
    slice.curvature[k] = second_difference(f_lo, center_value, f_hi, lo, c, hi);
  }

  // The two stiffest coordinates, ties broken toward the lower index.
  int a1 = 0;
  for (Eigen::Index k = 1; k < d; ++k) {
    if (std::abs(slice.curvature[k]) > std::abs(slice.curvature[a1])) {
      a1 = static_cast<int>(k);
    }
  }
  int a2 = a1 == 0 ? 1 : 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (static_cast<int>(k) == a1) continue;
    if (std::abs(slice.curvature[k]) > std::abs(slice.curvature[a2])) {
      a2 = static_cast<int>(k);
    }
  }
  slice.axis1 = a1;
  slice.axis2 = a2;

  const auto grid_for = [&](int axis) {
    const double c = std::clamp(center_unit[axis], 0.0, 1.0);
    const double lo = std::max(0.0, c - half_span);
    const double hi = std::min(1.0, c + half_span);
    Eigen::VectorXd g(grid_points);
    for (int i = 0; i < grid_points; ++i) {
      g[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(grid_points - 1);
    }
    return g;
  };
  slice.grid1 = grid_for(a1);
  slice.grid2 = grid_for(a2);

  slice.values.resize(grid_points, grid_points);
  parallel_for(grid_points, exec, [&](std::int64_t i) {
    Eigen::VectorXd p = center_unit;
    p[a1] = slice.grid1[static_cast<Eigen::Index>(i)];
    for (int j = 0; j < grid_points; ++j) {
      p[a2] = slice.grid2[j];
      slice.values(static_cast<Eigen::Index>(i), j) =
          surrogate.predict(p).mean - center_value;
    }
  });
  return slice;
}

}  // namespace rampopt
