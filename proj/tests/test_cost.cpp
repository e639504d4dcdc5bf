#include <doctest.h>

#include <cmath>
#include <vector>

#include "rampopt/cost.hpp"
#include "rampopt/errors.hpp"

using namespace rampopt;

namespace {

DetectionRecord make_record(long count, std::array<double, 3> mean,
                            std::array<double, 3> stddev = {1e-3, 1e-3, 1e-3}) {
  DetectionRecord r;
  r.count = count;
  r.mean = mean;
  r.stddev = stddev;
  return r;
}

}  // namespace

TEST_CASE("hinge penalties match their pinned calibration points") {
  const CostWeights w;
  // One millimetre over the width threshold costs 6e-4; ten over the range
  // threshold costs 1e-2.
  CHECK(width_penalty(5e-3, w) == doctest::Approx(6e-4).epsilon(1e-12));
  CHECK(range_penalty(57e-3, w) == doctest::Approx(1e-2).epsilon(1e-12));
}

TEST_CASE("hinges vanish at and below their thresholds") {
  const CostWeights w;
  CHECK(width_penalty(0.0, w) == 0.0);
  CHECK(width_penalty(w.width_threshold, w) == 0.0);
  CHECK(width_penalty(0.99 * w.width_threshold, w) == 0.0);
  CHECK(range_penalty(0.0, w) == 0.0);
  CHECK(range_penalty(w.range_threshold, w) == 0.0);
  // Quartic growth: doubling the overshoot multiplies the cost by 16.
  CHECK(range_penalty(w.range_threshold + 2e-3, w) ==
        doctest::Approx(16.0 * range_penalty(w.range_threshold + 1e-3, w))
            .epsilon(1e-12));
}

TEST_CASE("oscillation cost is the population spread of the pulse centroids") {
  const CostWeights w;
  std::vector<DetectionRecord> recs;
  for (double x : {1e-3, 2e-3, 3e-3, 4e-3}) {
    recs.push_back(make_record(1000, {x, 0.0, 0.0}, {1e-3, 1e-3, 1e-3}));
  }
  const CostReport r = robust_cost(recs, w);
  CHECK_FALSE(r.failed);
  CHECK(r.total_detections == 4000);
  CHECK(r.oscillation_cost ==
        doctest::Approx(std::sqrt(5.0 / 4.0) * 1e-3).epsilon(1e-9));
  CHECK(r.range_penalty == 0.0);  // 3 mm peak-to-peak is well inside
  CHECK(r.width_cost == 0.0);     // sqrt(3) mm width norm is below threshold
  CHECK(r.total == r.oscillation_cost + r.range_penalty + r.width_cost);
}

TEST_CASE("empty pulses carry no information but still count for totals") {
  const CostWeights w;
  std::vector<DetectionRecord> recs;
  recs.push_back(make_record(2000, {1e-3, 0.0, 0.0}));
  recs.push_back(make_record(2000, {3e-3, 0.0, 0.0}));
  const CostReport base = robust_cost(recs, w);

  // A zero-count record with an absurd centroid must not move the cost.
  recs.push_back(make_record(0, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}));
  const CostReport with_empty = robust_cost(recs, w);
  CHECK(with_empty.total == base.total);
  CHECK(with_empty.oscillation_cost == base.oscillation_cost);
  CHECK(with_empty.total_detections == base.total_detections);
}

TEST_CASE("starved shots fail without poisoning downstream consumers") {
  const CostWeights w;

  SUBCASE("too few detections in total") {
    std::vector<DetectionRecord> recs = {make_record(200, {0.0, 0.0, 0.0}),
                                         make_record(200, {1e-3, 0.0, 0.0})};
    const CostReport r = robust_cost(recs, w);
    CHECK(r.failed);
    CHECK(r.total_detections == 400);
    CHECK(std::isnan(r.total));
    CHECK(std::isnan(r.oscillation_cost));
    CHECK(std::isnan(r.range_penalty));
    CHECK(std::isnan(r.width_cost));
  }

  SUBCASE("all counts on a single pulse") {
    std::vector<DetectionRecord> recs = {make_record(5000, {0.0, 0.0, 0.0}),
                                         make_record(0, {0.0, 0.0, 0.0})};
    const CostReport r = robust_cost(recs, w);
    CHECK(r.failed);
    CHECK(r.total_detections == 5000);
  }

  SUBCASE("threshold is strict") {
    std::vector<DetectionRecord> recs = {make_record(1250, {0.0, 0.0, 0.0}),
                                         make_record(1250, {1e-3, 0.0, 0.0})};
    CHECK_FALSE(robust_cost(recs, w).failed);
    recs[0].count = 1249;
    CHECK(robust_cost(recs, w).failed);
  }

  SUBCASE("no records at all is a caller error") {
    CHECK_THROWS_AS(robust_cost({}, w), InsufficientDataError);
  }
}

TEST_CASE("range hinge placement differs between the two modes") {
  std::vector<DetectionRecord> recs = {
      make_record(2000, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}),
      make_record(2000, {60e-3, 10e-3, 0.0}, {0.0, 0.0, 0.0})};

  CostWeights w;
  const double sx = 30e-3, sy = 5e-3;  // half-spreads of two-point sets
  const double hinge_x = range_penalty(60e-3, w);
  CHECK(hinge_x > 0.0);
  const double osc = std::sqrt(sx * sx + sy * sy);

  SUBCASE("componentwise folds the hinge into the offending axis") {
    w.range_mode = CostWeights::RangeMode::Componentwise;
    const CostReport r = robust_cost(recs, w);
    const double expected =
        std::sqrt((sx + hinge_x) * (sx + hinge_x) + sy * sy);
    CHECK(r.oscillation_cost == doctest::Approx(osc).epsilon(1e-12));
    CHECK(r.range_penalty == doctest::Approx(expected - osc).epsilon(1e-9));
    CHECK(r.total == r.oscillation_cost + r.range_penalty + r.width_cost);
  }

  SUBCASE("scalar adds the hinges after the norm") {
    w.range_mode = CostWeights::RangeMode::Scalar;
    const CostReport r = robust_cost(recs, w);
    CHECK(r.oscillation_cost == doctest::Approx(osc).epsilon(1e-12));
    CHECK(r.range_penalty == doctest::Approx(hinge_x).epsilon(1e-12));
    CHECK(r.total == r.oscillation_cost + r.range_penalty + r.width_cost);
  }
}

TEST_CASE("width cost averages the per-pulse hinge over informative pulses") {
  const CostWeights w;
  // 3-4-0 mm per-axis widths give a 5 mm norm on every pulse.
  std::vector<DetectionRecord> recs = {
      make_record(2000, {0.0, 0.0, 0.0}, {3e-3, 4e-3, 0.0}),
      make_record(2000, {1e-3, 0.0, 0.0}, {3e-3, 4e-3, 0.0})};
  const CostReport r = robust_cost(recs, w);
  const double wn = std::sqrt(3e-3 * 3e-3 + 4e-3 * 4e-3);
  CHECK(r.width_cost == doctest::Approx(width_penalty(wn, w)).epsilon(1e-12));
  CHECK(r.width_cost == doctest::Approx(6e-4).epsilon(1e-9));
}
