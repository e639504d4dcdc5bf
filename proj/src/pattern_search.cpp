#include "rampopt/pattern_search.hpp"

#include <cmath>

#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

void validate_box(const BoxBounds& box, Eigen::Index dim) {
  if (box.lo.size() != dim || box.hi.size() != dim) {
    throw DomainError("bounds dimension does not match the start point");
  }
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (!(box.lo[k] < box.hi[k])) throw DomainError("degenerate search box");
  }
}

}  // namespace

LocalResult compass_search(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                           const BoxBounds& box, const PatternSearchOptions& opts) {
  const Eigen::Index d = x0.size();
  if (d == 0) throw DomainError("compass search needs at least one dimension");
  validate_box(box, d);

  const Eigen::VectorXd width = box.hi - box.lo;
  Eigen::VectorXd x = x0.cwiseMax(box.lo).cwiseMin(box.hi);

  LocalResult res;
  double fx = f(x);
  res.evaluations = 1;
  double h = opts.initial_step;

  for (int iter = 0; iter < opts.max_iters && h >= opts.tol; ++iter) {
    double best_val = fx;
    Eigen::Index best_dim = -1;
    double best_coord = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      for (int sign = 0; sign < 2; ++sign) {
        const double delta = (sign == 0 ? h : -h) * width[k];
        const double coord =
            std::min(box.hi[k], std::max(box.lo[k], x[k] + delta));
        if (coord == x[k]) continue;
        Eigen::VectorXd probe = x;
        probe[k] = coord;
        const double val = f(probe);
        ++res.evaluations;
        if (val < best_val) {  // strict: NaN never passes
          best_val = val;
          best_dim = k;
          best_coord = coord;
        }
      }
    }
    if (best_dim >= 0) {
      x[best_dim] = best_coord;
      fx = best_val;
    } else {
      h *= 0.5;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

MultistartResult multistart_minimize(const ObjectiveFn& f,
                                     const std::vector<Eigen::VectorXd>& starts,
                                     const BoxBounds& box,
                                     const PatternSearchOptions& opts, Exec exec) {
  if (starts.empty()) throw DomainError("multistart needs at least one start");
  std::vector<LocalResult> results(starts.size());
  parallel_for(static_cast<std::int64_t>(starts.size()), exec, [&](std::int64_t i) {
    results[static_cast<std::size_t>(i)] =
        compass_search(f, starts[static_cast<std::size_t>(i)], box, opts);
  });

  MultistartResult best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    best.evaluations += results[i].evaluations;
    const bool better =
        best.best_start < 0 ||
        (std::isfinite(results[i].value) && results[i].value < best.value) ||
        (!std::isfinite(best.value) && std::isfinite(results[i].value));
    if (better) {
      best.x = results[i].x;
      best.value = results[i].value;
      best.best_start = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace rampopt
