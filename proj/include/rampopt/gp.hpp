#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>

#include "rampopt/exec.hpp"

namespace rampopt {

// Hyperparameters of the anisotropic squared-exponential kernel
//   k(x, x') = sv * exp(-1/2 sum_k ((x_k - x'_k) / ell_k)^2) + nv * delta.
// Signal and noise variances are expressed in standardized-target units.
struct GpHyper {
  Eigen::VectorXd length_scales;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

struct GpHyperBox {
  double ell_lo = 1e-2, ell_hi = 10.0;
  double sf2_lo = 1e-4, sf2_hi = 1e2;
  double sn2_lo = 1e-8, sn2_hi = 1.0;
};

struct GpFitOptions {
  GpHyperBox box;
  int seeded_starts = 2;  // random restarts on top of the fixed start grid
  int max_iters = 60;
  double tol = 1e-3;
};

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;  // posterior deviation of the latent function
};

// Gaussian-process regressor on the unit cube. Targets are standardized
// internally (mean removed, population deviation scaled out); predictions
// are mapped back. The kernel matrix factorization climbs a jitter ladder
// 1e-10 .. 1e-6 (relative to the signal variance) when the plain Cholesky
// fails; a matrix that is still not positive definite is a NumericalError.
class GpSurrogate {
 public:
  GpSurrogate() = default;

  // Maximizes the log marginal likelihood over (length scales, signal
  // variance, noise variance) inside 'opts.box' by multistart compass search
  // in log space: a fixed grid of starts plus 'seeded_starts' random ones
  // derived from 'seed'. Deterministic for fixed inputs; Exec::Parallel
  // distributes the starts without changing the result. Needs at least two
  // rows (InsufficientDataError).
  static GpSurrogate fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         std::uint64_t seed, const GpFitOptions& opts = {},
                         Exec exec = Exec::Serial);

  // Conditions on the data with the hyperparameters taken as given.
  static GpSurrogate with_hyper(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const GpHyper& hyper);

  GpPrediction predict(const Eigen::VectorXd& x) const;

  const GpHyper& hyper() const { return hyper_; }
  Eigen::Index dimension() const { return x_.cols(); }
  Eigen::Index training_count() const { return x_.rows(); }
  double jitter() const { return jitter_; }
  bool empty() const { return x_.rows() == 0; }

  // Log marginal likelihood of standardized targets under the kernel; the
  // objective maximized by fit(). Returns -infinity when the kernel matrix
  // is not positive definite even with the full jitter ladder.
  static double log_marginal_likelihood(const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y_standardized,
                                        const GpHyper& hyper);

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd chol_lower_;
  GpHyper hyper_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double jitter_ = 0.0;
};

}  // namespace rampopt
