#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rampopt/errors.hpp"
#include "rampopt/optimizer.hpp"
#include "rampopt/rng.hpp"

using namespace rampopt;

namespace {

ParameterSpace unit_space(int d) {
  ParameterSpace s;
  s.lo = Eigen::VectorXd::Zero(d);
  s.hi = Eigen::VectorXd::Ones(d);
  return s;
}

CostReport ok_report(double total) {
  CostReport r;
  r.oscillation_cost = total;
  r.total = total;
  r.total_detections = 10000;
  return r;
}

ExperimentFn quadratic_at(Eigen::VectorXd target) {
  return [target](const Eigen::VectorXd& raw, std::uint64_t) {
    return ok_report((raw - target).squaredNorm());
  };
}

OptimizerSettings small_settings(int budget) {
  OptimizerSettings s;
  s.budget = budget;
  s.gp.max_iters = 25;  // keep unit tests quick
  s.acquisition.max_iters = 60;
  s.acquisition_starts = 8;
  return s;
}

}  // namespace

TEST_CASE("proposal sources name themselves consistently") {
  for (Source s : {Source::Init, Source::Gp0, Source::Gp1, Source::Gp2,
                   Source::Gp3, Source::De}) {
    CHECK(source_from_string(to_string(s)) == s);
  }
  CHECK(std::string(to_string(Source::Init)) == "init");
  CHECK(std::string(to_string(Source::De)) == "de");
  CHECK_THROWS_AS(source_from_string("annealing"), DomainError);
}

TEST_CASE("parameter spaces map affinely between raw and unit coordinates") {
  ParameterSpace s;
  s.lo = Eigen::VectorXd(2);
  s.hi = Eigen::VectorXd(2);
  s.lo << -2.0, 5.0;
  s.hi << 2.0, 15.0;
  CHECK(s.dimension() == 2);

  Eigen::VectorXd raw(2);
  raw << 0.0, 10.0;
  const Eigen::VectorXd unit = s.to_unit(raw);
  CHECK(unit[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(unit[1] == doctest::Approx(0.5).epsilon(1e-15));
  const Eigen::VectorXd back = s.to_raw(unit);
  CHECK(back[0] == doctest::Approx(raw[0]).epsilon(1e-14));
  CHECK(back[1] == doctest::Approx(raw[1]).epsilon(1e-14));

  CHECK(s.to_unit(s.lo).norm() == 0.0);
  CHECK((s.to_unit(s.hi).array() == 1.0).all());
}

TEST_CASE("the loop spends its budget in the documented source cycle") {
  const ParameterSpace space = unit_space(2);
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.4);
  const OptimizerSettings settings = small_settings(16);

  const OptimizationResult res =
      run_optimization(space, x0, settings, 7, quadratic_at(x0 * 0.5));
  REQUIRE(static_cast<int>(res.history.size()) == settings.budget);

  // One exact evaluation of the handed-in point, then 2d perturbed designs.
  CHECK(res.history[0].raw == x0);
  CHECK(res.history[0].unit == x0);  // unit box: raw and unit coincide
  for (int i = 0; i < 5; ++i) {
    CHECK(res.history[static_cast<std::size_t>(i)].source == Source::Init);
    CHECK(res.history[static_cast<std::size_t>(i)].unit.minCoeff() >= 0.0);
    CHECK(res.history[static_cast<std::size_t>(i)].unit.maxCoeff() <= 1.0);
  }
  // A clean objective keeps the surrogate alive, so the cycle repeats
  // [gp0 gp1 gp2 gp3 de] from index five onward.
  const Source cycle[5] = {Source::Gp0, Source::Gp1, Source::Gp2, Source::Gp3,
                           Source::De};
  for (std::size_t i = 5; i < res.history.size(); ++i) {
    CHECK(res.history[i].source == cycle[(i - 5) % 5]);
  }
  // Per-evaluation seeds come from the published derivation.
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    CHECK(res.history[i].index == static_cast<int>(i));
    CHECK(res.history[i].eval_seed == derive_seed(7, "eval", i));
  }
  CHECK(res.has_surrogate);
  CHECK(res.best_index >= 0);
}

TEST_CASE("histories are reproducible and independent of the execution policy") {
  const ParameterSpace space = unit_space(2);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.6);
  Eigen::VectorXd target(2);
  target << 0.3, 0.7;

  OptimizerSettings a = small_settings(14);
  OptimizerSettings b = small_settings(14);
  b.exec = Exec::Parallel;

  const OptimizationResult ra =
      run_optimization(space, x0, a, 11, quadratic_at(target));
  const OptimizationResult rb =
      run_optimization(space, x0, b, 11, quadratic_at(target));
  REQUIRE(ra.history.size() == rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    CHECK(ra.history[i].unit == rb.history[i].unit);
    CHECK(ra.history[i].report.total == rb.history[i].report.total);
    CHECK(ra.history[i].source == rb.history[i].source);
  }
  CHECK(ra.best_index == rb.best_index);

  // A different master seed explores differently.
  const OptimizationResult rc =
      run_optimization(space, x0, a, 12, quadratic_at(target));
  bool differs = false;
  for (std::size_t i = 1; i < ra.history.size() && !differs; ++i) {
    differs = ra.history[i].unit != rc.history[i].unit;
  }
  CHECK(differs);
}

TEST_CASE("a zero-dimensional space collapses to one evaluation") {
  ParameterSpace space;  // empty box
  int calls = 0;
  const ExperimentFn f = [&](const Eigen::VectorXd& raw, std::uint64_t) {
    ++calls;
    CHECK(raw.size() == 0);
    return ok_report(1.25);
  };
  const OptimizationResult res =
      run_optimization(space, Eigen::VectorXd(), small_settings(50), 3, f);
  CHECK(calls == 1);
  REQUIRE(res.history.size() == 1);
  CHECK(res.best_index == 0);
  CHECK(res.best().report.total == 1.25);
}

TEST_CASE("library errors in the experiment are recorded, not propagated") {
  const ParameterSpace space = unit_space(2);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.2);
  const ExperimentFn f = [](const Eigen::VectorXd& raw, std::uint64_t) {
    if (raw[0] > 0.8) throw UntrappableError("cloud spilled");
    return ok_report((raw.array() - 0.1).matrix().squaredNorm());
  };
  const OptimizationResult res =
      run_optimization(space, x0, small_settings(40), 5, f);
  int failed = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const Observation& o : res.history) {
    if (o.report.failed) {
      ++failed;
      CHECK(std::isnan(o.report.total));
    } else {
      best = std::min(best, o.report.total);
    }
  }
  CHECK(res.best().report.total == best);
  CHECK_FALSE(res.best().report.failed);

  // Foreign exceptions are not swallowed.
  const ExperimentFn broken = [](const Eigen::VectorXd&, std::uint64_t) -> CostReport {
    throw std::runtime_error("detector daemon crashed");
  };
  CHECK_THROWS_AS(
      run_optimization(space, x0, small_settings(3), 5, broken),
      std::runtime_error);
}

TEST_CASE("non-finite totals are treated as failures") {
  const ParameterSpace space = unit_space(1);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 0.9);
  const ExperimentFn f = [](const Eigen::VectorXd& raw, std::uint64_t) {
    if (raw[0] < 0.5) {
      CostReport r;
      r.total = std::numeric_limits<double>::infinity();
      return r;
    }
    return ok_report(raw[0]);
  };
  const OptimizationResult res =
      run_optimization(space, x0, small_settings(20), 9, f);
  for (const Observation& o : res.history) {
    if (!o.report.failed) CHECK(std::isfinite(o.report.total));
  }
  CHECK(res.best_index >= 0);
}

TEST_CASE("a run where every shot fails reports that honestly") {
  const ParameterSpace space = unit_space(2);
  const ExperimentFn f = [](const Eigen::VectorXd&, std::uint64_t) -> CostReport {
    throw BoundsError("always out of range");
  };
  const OptimizationResult res = run_optimization(
      space, Eigen::VectorXd::Constant(2, 0.5), small_settings(8), 2, f);
  CHECK(res.history.size() == 8);
  CHECK(res.best_index == -1);
  CHECK_FALSE(res.has_surrogate);
  CHECK_THROWS_AS(res.best(), InsufficientDataError);
}

TEST_CASE("the observation sink sees every evaluation in order") {
  const ParameterSpace space = unit_space(2);
  std::vector<int> seen;
  const ObservationSink sink = [&](const Observation& o) {
    seen.push_back(o.index);
  };
  const OptimizationResult res =
      run_optimization(space, Eigen::VectorXd::Constant(2, 0.5),
                       small_settings(12), 21,
                       quadratic_at(Eigen::VectorXd::Constant(2, 0.4)), sink);
  REQUIRE(seen.size() == res.history.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(seen[i] == static_cast<int>(i));
  }
}

TEST_CASE("malformed optimization requests are rejected") {
  const ParameterSpace space = unit_space(2);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(2, 0.5);
  const ExperimentFn f = quadratic_at(x0);

  OptimizerSettings s = small_settings(0);
  CHECK_THROWS_AS(run_optimization(space, x0, s, 1, f), DomainError);

  CHECK_THROWS_AS(
      run_optimization(space, Eigen::VectorXd::Constant(3, 0.5),
                       small_settings(5), 1, f),
      DomainError);
  CHECK_THROWS_AS(
      run_optimization(space, Eigen::VectorXd::Constant(2, 1.5),
                       small_settings(5), 1, f),
      BoundsError);
  CHECK_THROWS_AS(run_optimization(space, x0, small_settings(5), 1, {}),
                  DomainError);

  ParameterSpace degenerate = unit_space(2);
  degenerate.hi[1] = degenerate.lo[1];
  CHECK_THROWS_AS(
      run_optimization(degenerate, Eigen::VectorXd::Zero(2),
                       small_settings(5), 1, f),
      DomainError);
}

TEST_CASE("the loop closes in on a smooth minimum") {
  const ParameterSpace space = unit_space(2);
  Eigen::VectorXd target(2);
  target << 0.3, 0.6;
  const OptimizationResult res =
      run_optimization(space, Eigen::VectorXd::Constant(2, 0.85),
                       small_settings(60), 41, quadratic_at(target));
  CHECK(res.best().report.total < 5e-3);
  CHECK(res.has_surrogate);
  CHECK(res.surrogate.training_count() >= 2);
}

TEST_CASE("surrogates are fitted from the successful observations only") {
  std::vector<Observation> history;
  for (int i = 0; i < 5; ++i) {
    Observation o;
    o.index = i;
    o.unit = Eigen::VectorXd::Constant(2, 0.1 + 0.2 * i);
    o.report = ok_report(std::pow(0.1 + 0.2 * i - 0.4, 2));
    if (i % 2 == 1) {
      o.report.failed = true;
      o.report.total = std::numeric_limits<double>::quiet_NaN();
    }
    history.push_back(o);
  }
  const GpSurrogate gp = fit_observations(history, 5);
  CHECK(gp.training_count() == 3);
  CHECK(gp.dimension() == 2);

  history.resize(2);  // one success, one failure: not enough
  history[1].report.failed = true;
  CHECK_THROWS_AS(fit_observations(history, 5), InsufficientDataError);
}

TEST_CASE("landscape slices pick the two stiffest axes") {
  // Quadratic with per-axis curvatures 8, 2, 18: axes 2 and 0 are stiffest.
  const int n = 4;
  Eigen::MatrixXd x(n * n * n, 3);
  Eigen::VectorXd y(n * n * n);
  int row = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        x(row, 0) = i / 3.0;
        x(row, 1) = j / 3.0;
        x(row, 2) = k / 3.0;
        const double d0 = x(row, 0) - 0.5;
        const double d1 = x(row, 1) - 0.5;
        const double d2 = x(row, 2) - 0.5;
        y[row] = 4.0 * d0 * d0 + 1.0 * d1 * d1 + 9.0 * d2 * d2;
        ++row;
      }
    }
  }
  GpHyper h;
  h.length_scales = Eigen::VectorXd::Constant(3, 0.5);
  h.signal_variance = 1.0;
  h.noise_variance = 1e-6;
  const GpSurrogate gp = GpSurrogate::with_hyper(x, y, h);

  const Eigen::VectorXd center = Eigen::VectorXd::Constant(3, 0.5);
  const LandscapeSlice slice = landscape_slice(gp, center, 7, 0.25);
  CHECK(slice.axis1 == 2);
  CHECK(slice.axis2 == 0);
  CHECK(slice.curvature.size() == 3);
  CHECK(slice.curvature[2] > slice.curvature[0]);
  CHECK(slice.curvature[0] > slice.curvature[1]);
  REQUIRE(slice.grid1.size() == 7);
  REQUIRE(slice.grid2.size() == 7);
  CHECK(slice.grid1.minCoeff() >= 0.0);
  CHECK(slice.grid1.maxCoeff() <= 1.0);
  REQUIRE(slice.values.rows() == 7);
  REQUIRE(slice.values.cols() == 7);
  // Center row/column value at the center equals zero by construction.
  CHECK(slice.values(3, 3) == doctest::Approx(0.0).epsilon(1e-12));

  // Serial and parallel slices agree exactly.
  const LandscapeSlice par = landscape_slice(gp, center, 7, 0.25, Exec::Parallel);
  CHECK(par.values == slice.values);

  CHECK_THROWS_AS(landscape_slice(gp, center, 1, 0.25), DomainError);
  CHECK_THROWS_AS(landscape_slice(gp, center, 7, 0.0), DomainError);
  CHECK_THROWS_AS(landscape_slice(gp, Eigen::VectorXd::Constant(2, 0.5), 7, 0.25),
                  DomainError);
}
