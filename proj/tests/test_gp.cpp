#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "rampopt/errors.hpp"
#include "rampopt/gp.hpp"

using namespace rampopt;

namespace {

GpHyper hyper1d(double ell, double sv, double nv) {
  GpHyper h;
  h.length_scales = Eigen::VectorXd::Constant(1, ell);
  h.signal_variance = sv;
  h.noise_variance = nv;
  return h;
}

}  // namespace

TEST_CASE("conditioning with negligible noise interpolates the data") {
  // Points spaced comfortably apart relative to the length scale keep the
  // kernel matrix well conditioned, so the tiny nugget barely perturbs the
  // posterior mean at the training sites.
  Eigen::MatrixXd x(6, 1);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = 0.2 * i;
    y[i] = std::sin(6.283185307179586 * x(i, 0)) + 0.3 * x(i, 0);
  }
  const GpSurrogate gp = GpSurrogate::with_hyper(x, y, hyper1d(0.15, 1.0, 1e-10));
  CHECK(gp.jitter() == 0.0);
  for (int i = 0; i < 6; ++i) {
    const GpPrediction p = gp.predict(x.row(i).transpose());
    CHECK(std::abs(p.mean - y[i]) < 1e-8);
    CHECK(p.stddev < 1e-4);
  }
}

TEST_CASE("two-point posterior matches the explicit kernel algebra") {
  Eigen::MatrixXd x(2, 1);
  x << 0.2, 0.8;
  Eigen::VectorXd y(2);
  y << 1.0, -0.5;
  const double ell = 0.4, sv = 1.0, nv = 0.01;
  const GpSurrogate gp = GpSurrogate::with_hyper(x, y, hyper1d(ell, sv, nv));

  // Standardization is part of the contract: mean 0.25, spread 0.75.
  const double y_mean = 0.25, y_scale = 0.75;
  const double e = sv * std::exp(-0.5 * std::pow(0.6 / ell, 2));
  const double diag = sv + nv;
  const double det = diag * diag - e * e;

  for (double xs : {0.0, 0.2, 0.35, 0.5, 0.9}) {
    const double k1 = sv * std::exp(-0.5 * std::pow((xs - 0.2) / ell, 2));
    const double k2 = sv * std::exp(-0.5 * std::pow((xs - 0.8) / ell, 2));
    // K^{-1} ys with ys = (1, -1) in standardized units.
    const double a1 = (diag + e) / det;   // first component of K^{-1} ys
    const double mean_std = (k1 - k2) * a1;
    const double quad =
        (diag * (k1 * k1 + k2 * k2) - 2.0 * e * k1 * k2) / det;
    const double expected_mean = y_mean + y_scale * mean_std;
    const double expected_sd = y_scale * std::sqrt(std::max(0.0, sv - quad));

    const GpPrediction p = gp.predict(Eigen::VectorXd::Constant(1, xs));
    CHECK(p.mean == doctest::Approx(expected_mean).epsilon(1e-10));
    CHECK(p.stddev == doctest::Approx(expected_sd).epsilon(1e-10));
  }
}

TEST_CASE("predictions are equivariant under affine target maps") {
  Eigen::MatrixXd x(5, 1);
  x << 0.05, 0.3, 0.5, 0.7, 0.95;
  Eigen::VectorXd y(5);
  y << 0.4, -0.2, 0.1, 0.9, -0.5;
  const GpHyper h = hyper1d(0.3, 1.0, 1e-4);
  const GpSurrogate gp = GpSurrogate::with_hyper(x, y, h);
  const GpSurrogate gp2 =
      GpSurrogate::with_hyper(x, (3.0 * y.array() - 7.0).matrix(), h);

  for (double xs : {0.1, 0.42, 0.88}) {
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, xs);
    const GpPrediction p = gp.predict(q);
    const GpPrediction p2 = gp2.predict(q);
    CHECK(p2.mean == doctest::Approx(3.0 * p.mean - 7.0).epsilon(1e-12));
    CHECK(p2.stddev == doctest::Approx(3.0 * p.stddev).epsilon(1e-12));
  }
}

TEST_CASE("duplicate sites climb the jitter ladder instead of failing") {
  Eigen::MatrixXd x(2, 1);
  x << 0.5, 0.5;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  const GpSurrogate gp = GpSurrogate::with_hyper(x, y, hyper1d(0.3, 1.0, 0.0));
  CHECK(gp.jitter() == doctest::Approx(1e-10).epsilon(1e-12));
  // Coincident points with conflicting targets: the posterior mean at the
  // site is their average.
  const GpPrediction p = gp.predict(Eigen::VectorXd::Constant(1, 0.5));
  CHECK(p.mean == doctest::Approx(0.5).epsilon(1e-6));

  // The boost scales with the signal variance.
  const GpSurrogate gp4 = GpSurrogate::with_hyper(x, y, hyper1d(0.3, 4.0, 0.0));
  CHECK(gp4.jitter() == doctest::Approx(4e-10).epsilon(1e-12));
}

TEST_CASE("an indefinite kernel reports negative-infinite evidence") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 0.1;
  Eigen::VectorXd ys(2);
  ys << 1.0, -1.0;
  GpHyper h = hyper1d(1.0, 1.0, -0.5);  // negative nugget: not a valid kernel
  const double lml = GpSurrogate::log_marginal_likelihood(x, ys, h);
  CHECK(std::isinf(lml));
  CHECK(lml < 0.0);
  CHECK_THROWS_AS(GpSurrogate::with_hyper(x, ys, h), NumericalError);
}

TEST_CASE("fitting refuses degenerate inputs") {
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  Eigen::VectorXd y(1);
  y << 1.0;
  CHECK_THROWS_AS(GpSurrogate::fit(x, y, 1), InsufficientDataError);

  Eigen::MatrixXd x2(2, 1);
  x2 << 0.2, 0.8;
  Eigen::VectorXd y3(3);
  y3 << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(GpSurrogate::fit(x2, y3, 1), DomainError);

  Eigen::VectorXd y2(2);
  y2 << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GpSurrogate::fit(x2, y2, 1), DomainError);

  Eigen::VectorXd good(2);
  good << 1.0, 2.0;
  GpHyper wrong = hyper1d(0.3, 1.0, 1e-4);
  wrong.length_scales = Eigen::VectorXd::Constant(2, 0.3);
  CHECK_THROWS_AS(GpSurrogate::with_hyper(x2, good, wrong), DomainError);

  const GpSurrogate unfitted;
  CHECK(unfitted.empty());
  CHECK_THROWS_AS(unfitted.predict(Eigen::VectorXd::Constant(1, 0.5)), DomainError);

  const GpSurrogate gp = GpSurrogate::with_hyper(x2, good, hyper1d(0.3, 1.0, 1e-4));
  CHECK_THROWS_AS(gp.predict(Eigen::VectorXd::Constant(2, 0.5)), DomainError);
}

TEST_CASE("hyperparameter search is deterministic and policy independent") {
  Eigen::MatrixXd x(9, 1);
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) {
    x(i, 0) = i / 8.0;
    y[i] = std::cos(4.0 * x(i, 0)) + 0.05 * x(i, 0) * x(i, 0);
  }
  const GpSurrogate a = GpSurrogate::fit(x, y, 99, {}, Exec::Serial);
  const GpSurrogate b = GpSurrogate::fit(x, y, 99, {}, Exec::Parallel);
  CHECK(a.hyper().length_scales[0] == b.hyper().length_scales[0]);
  CHECK(a.hyper().signal_variance == b.hyper().signal_variance);
  CHECK(a.hyper().noise_variance == b.hyper().noise_variance);
  for (double xs : {0.11, 0.52, 0.93}) {
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, xs);
    CHECK(a.predict(q).mean == b.predict(q).mean);
    CHECK(a.predict(q).stddev == b.predict(q).stddev);
  }
  CHECK(a.dimension() == 1);
  CHECK(a.training_count() == 9);
}

TEST_CASE("the search never ends below its own starting grid") {
  Eigen::MatrixXd x(8, 1);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i / 7.0;
    y[i] = std::sin(5.0 * x(i, 0));
  }
  double mean, scale;
  mean = y.mean();
  scale = std::sqrt((y.array() - mean).square().mean());
  const Eigen::VectorXd y_std = (y.array() - mean) / scale;

  const GpSurrogate gp = GpSurrogate::fit(x, y, 3);
  const double fitted =
      GpSurrogate::log_marginal_likelihood(x, y_std, gp.hyper());
  // (ell, sv, sn2) = (1.0, 1.0, 1e-2) is one of the fixed starts.
  const double reference =
      GpSurrogate::log_marginal_likelihood(x, y_std, hyper1d(1.0, 1.0, 1e-2));
  CHECK(fitted >= reference - 1e-9);

  // A noise-free fit should track the function closely between the sites.
  for (double xs : {0.2, 0.5, 0.8}) {
    const GpPrediction p = gp.predict(Eigen::VectorXd::Constant(1, xs));
    CHECK(std::abs(p.mean - std::sin(5.0 * xs)) < 0.05);
  }
}
