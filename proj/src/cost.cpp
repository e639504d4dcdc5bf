#include "rampopt/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

double quartic_hinge(double x, double threshold, double scale) {
  if (x <= threshold) return 0.0;
  const double d = x - threshold;
  const double d2 = d * d;
  return scale * d2 * d2;
}

}  // namespace

double width_penalty(double width_norm, const CostWeights& w) {
  return quartic_hinge(width_norm, w.width_threshold, w.width_scale);
}

double range_penalty(double peak_to_peak, const CostWeights& w) {
  return quartic_hinge(peak_to_peak, w.range_threshold, w.range_scale);
}

CostReport robust_cost(const std::vector<DetectionRecord>& records,
                       const CostWeights& w) {
  if (records.empty()) throw InsufficientDataError("no detection records");

  CostReport report;
  for (const DetectionRecord& r : records) report.total_detections += r.count;

  std::vector<const DetectionRecord*> kept;
  kept.reserve(records.size());
  for (const DetectionRecord& r : records) {
    if (r.count > 0) kept.push_back(&r);
  }

  if (report.total_detections < w.min_detections || kept.size() < 2) {
    report.failed = true;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.oscillation_cost = report.range_penalty = report.width_cost =
        report.total = nan;
    return report;
  }

  const double n = static_cast<double>(kept.size());
  double sigma[3];
  double hinge[3];
  for (int a = 0; a < 3; ++a) {
    const std::size_t as = static_cast<std::size_t>(a);
    double sum = 0.0, lo = kept.front()->mean[as], hi = lo;
    for (const DetectionRecord* r : kept) {
      sum += r->mean[as];
      lo = std::min(lo, r->mean[as]);
      hi = std::max(hi, r->mean[as]);
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const DetectionRecord* r : kept) {
      const double d = r->mean[as] - mean;
      ss += d * d;
    }
    sigma[a] = std::sqrt(ss / n);
    hinge[a] = range_penalty(hi - lo, w);
  }

  double width_sum = 0.0;
  for (const DetectionRecord* r : kept) {
    const double wn = std::sqrt(r->stddev[0] * r->stddev[0] +
                                r->stddev[1] * r->stddev[1] +
                                r->stddev[2] * r->stddev[2]);
    width_sum += width_penalty(wn, w);
  }

  const double osc =
      std::sqrt(sigma[0] * sigma[0] + sigma[1] * sigma[1] + sigma[2] * sigma[2]);
  double osc_with_range;
  if (w.range_mode == CostWeights::RangeMode::Componentwise) {
    const double a0 = sigma[0] + hinge[0];
    const double a1 = sigma[1] + hinge[1];
    const double a2 = sigma[2] + hinge[2];
    osc_with_range = std::sqrt(a0 * a0 + a1 * a1 + a2 * a2);
  } else {
    osc_with_range = osc + hinge[0] + hinge[1] + hinge[2];
  }

  report.oscillation_cost = osc;
  report.range_penalty = osc_with_range - osc;
  report.width_cost = width_sum / n;
  report.total = report.oscillation_cost + report.range_penalty + report.width_cost;
  return report;
}

}  // namespace rampopt
