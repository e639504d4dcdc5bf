#include "rampopt/gp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "rampopt/errors.hpp"
#include "rampopt/pattern_search.hpp"
#include "rampopt/rng.hpp"

namespace rampopt {

namespace {

constexpr double k_log_two_pi = 1.8378770664093454836;
constexpr double k_jitter_ladder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& x, const GpHyper& h) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = h.signal_variance + h.noise_variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double q = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double u = (x(i, c) - x(j, c)) / h.length_scales[c];
        q += u * u;
      }
      const double v = h.signal_variance * std::exp(-0.5 * q);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Cholesky with an escalating diagonal boost proportional to the signal
// variance. Returns the jitter that worked, or a negative value on failure.
double robust_cholesky(Eigen::MatrixXd k, double signal_variance,
                       Eigen::LLT<Eigen::MatrixXd>* out) {
  for (double j : k_jitter_ladder) {
    if (j > 0.0) k.diagonal().array() += j * signal_variance;
    out->compute(k);
    if (out->info() == Eigen::Success) return j * signal_variance;
  }
  return -1.0;
}

void validate_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     Eigen::Index min_rows) {
  if (x.rows() != y.size()) throw DomainError("row count mismatch between x and y");
  if (x.rows() < min_rows) {
    throw InsufficientDataError("too few observations for the surrogate");
  }
  if (x.cols() < 1) throw DomainError("surrogate needs at least one input dimension");
  if (!y.allFinite() || !x.allFinite()) {
    throw DomainError("surrogate inputs must be finite");
  }
}

void standardize(const Eigen::VectorXd& y, double* mean, double* scale) {
  *mean = y.mean();
  const double var = (y.array() - *mean).square().mean();
  const double sd = std::sqrt(var);
  *scale = sd > 1e-12 ? sd : 1.0;
}

GpHyper hyper_from_log(const Eigen::VectorXd& theta, Eigen::Index d) {
  GpHyper h;
  h.length_scales = theta.head(d).array().exp();
  h.signal_variance = std::exp(theta[d]);
  h.noise_variance = std::exp(theta[d + 1]);
  return h;
}

}  // namespace

double GpSurrogate::log_marginal_likelihood(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& y_standardized,
                                            const GpHyper& hyper) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  const double jitter =
      robust_cholesky(kernel_matrix(x, hyper), hyper.signal_variance, &llt);
  if (jitter < 0.0) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(y_standardized);
  const double log_det =
      llt.matrixLLT().diagonal().array().log().sum() * 2.0;
  const double n = static_cast<double>(x.rows());
  return -0.5 * y_standardized.dot(alpha) - 0.5 * log_det - 0.5 * n * k_log_two_pi;
}

GpSurrogate GpSurrogate::with_hyper(const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y, const GpHyper& hyper) {
  validate_inputs(x, y, 1);
  if (hyper.length_scales.size() != x.cols()) {
    throw DomainError("length-scale count does not match the input dimension");
  }

  GpSurrogate gp;
  gp.x_ = x;
  gp.hyper_ = hyper;
  standardize(y, &gp.y_mean_, &gp.y_scale_);
  const Eigen::VectorXd y_std = (y.array() - gp.y_mean_) / gp.y_scale_;

  Eigen::LLT<Eigen::MatrixXd> llt;
  gp.jitter_ = robust_cholesky(kernel_matrix(x, hyper), hyper.signal_variance, &llt);
  if (gp.jitter_ < 0.0) {
    throw NumericalError("kernel matrix is not positive definite after jitter");
  }
  gp.alpha_ = llt.solve(y_std);
  gp.chol_lower_ = llt.matrixL();
  return gp;
}

GpSurrogate GpSurrogate::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             std::uint64_t seed, const GpFitOptions& opts,
                             Exec exec) {
  validate_inputs(x, y, 2);
  const Eigen::Index d = x.cols();

  double y_mean = 0.0, y_scale = 1.0;
  standardize(y, &y_mean, &y_scale);
  const Eigen::VectorXd y_std = (y.array() - y_mean) / y_scale;

  BoxBounds box;
  box.lo.resize(d + 2);
  box.hi.resize(d + 2);
  box.lo.head(d).setConstant(std::log(opts.box.ell_lo));
  box.hi.head(d).setConstant(std::log(opts.box.ell_hi));
  box.lo[d] = std::log(opts.box.sf2_lo);
  box.hi[d] = std::log(opts.box.sf2_hi);
  box.lo[d + 1] = std::log(opts.box.sn2_lo);
  box.hi[d + 1] = std::log(opts.box.sn2_hi);

  // Fixed coarse grid over (length scale, noise floor), plus seeded restarts.
  std::vector<Eigen::VectorXd> starts;
  for (double ell : {0.1, 0.3, 1.0}) {
    for (double sn2 : {1e-6, 1e-2}) {
      Eigen::VectorXd t(d + 2);
      t.head(d).setConstant(std::log(ell));
      t[d] = 0.0;  // unit signal variance
      t[d + 1] = std::log(sn2);
      starts.push_back(t.cwiseMax(box.lo).cwiseMin(box.hi));
    }
  }
  for (int s = 0; s < opts.seeded_starts; ++s) {
    auto rng = engine_for(seed, "gp-start", static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd t(d + 2);
    for (Eigen::Index k2 = 0; k2 < d + 2; ++k2) {
      t[k2] = box.lo[k2] + (box.hi[k2] - box.lo[k2]) * u(rng);
    }
    starts.push_back(t);
  }

  const auto objective = [&](const Eigen::VectorXd& theta) {
    return -log_marginal_likelihood(x, y_std, hyper_from_log(theta, d));
  };
  PatternSearchOptions search;
  search.max_iters = opts.max_iters;
  search.tol = opts.tol;
  const MultistartResult best =
      multistart_minimize(objective, starts, box, search, exec);
  if (!std::isfinite(best.value)) {
    throw NumericalError("no hyperparameter setting yields a positive-definite kernel");
  }
  return with_hyper(x, y, hyper_from_log(best.x, d));
}

GpPrediction GpSurrogate::predict(const Eigen::VectorXd& x) const {
  if (empty()) throw DomainError("predict on an unfitted surrogate");
  if (x.size() != x_.cols()) throw DomainError("query dimension mismatch");

  const Eigen::Index n = x_.rows();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double q = 0.0;
    for (Eigen::Index c = 0; c < x_.cols(); ++c) {
      const double u = (x_(i, c) - x[c]) / hyper_.length_scales[c];
      q += u * u;
    }
    k_star[i] = hyper_.signal_variance * std::exp(-0.5 * q);
  }
  const Eigen::VectorXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(k_star);
  const double var = std::max(0.0, hyper_.signal_variance - v.squaredNorm());

  GpPrediction p;
  p.mean = y_mean_ + y_scale_ * k_star.dot(alpha_);
  p.stddev = y_scale_ * std::sqrt(var);
  return p;
}

}  // namespace rampopt
