#include "rampopt/atom_laser.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "rampopt/errors.hpp"
#include "rampopt/rng.hpp"

namespace rampopt {

namespace {

constexpr double k_pi = 3.141592653589793238463;

void validate_train(const PulseTrain& train) {
  if (train.pulse_count < 1) throw DomainError("pulse train needs at least one pulse");
  if (!(train.period > 0.0)) throw DomainError("pulse period must be positive");
  if (!(train.fall_distance > 0.0)) throw DomainError("fall distance must be positive");
  if (!(train.outcoupled_fraction > 0.0) || !(train.outcoupled_fraction < 1.0)) {
    throw DomainError("outcoupled fraction must lie in (0, 1)");
  }
  if (!(train.detection_efficiency > 0.0) || train.detection_efficiency > 1.0) {
    throw DomainError("detection efficiency must lie in (0, 1]");
  }
  if (!(train.detector_halfwidth > 0.0)) {
    throw DomainError("detector half-width must be positive");
  }
}

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

double normal_pdf(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * k_pi);
}

// First two moments and acceptance mass of a normal censored to [lo, hi].
// When the window carries (numerically) no mass, the moments degenerate to
// the nearest edge with zero spread.
struct CensoredMoments {
  double mean;
  double stddev;
  double mass;
};

CensoredMoments censor(double mu, double sigma, double lo, double hi) {
  if (!(sigma > 0.0)) {
    if (mu < lo) return {lo, 0.0, 0.0};
    if (mu > hi) return {hi, 0.0, 0.0};
    return {mu, 0.0, 1.0};
  }
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  if (z < 1e-12) return {mu < lo ? lo : hi, 0.0, 0.0};
  const double pa = normal_pdf(a);
  const double pb = normal_pdf(b);
  const double r = (pa - pb) / z;
  const double var =
      sigma * sigma * std::max(0.0, 1.0 + (a * pa - b * pb) / z - r * r);
  return {mu + sigma * r, std::sqrt(var), z};
}

}  // namespace

double FreeFall::fall_time() const { return std::sqrt(2.0 * distance / gravity); }

double FreeFall::detector_velocity() const { return gravity * fall_time(); }

double FreeFall::arrival_time(double z, double v) const {
  // z(T) = z + v T - g T^2 / 2 reaches -distance.
  const double disc = v * v + 2.0 * gravity * (z + distance);
  if (!(disc > 0.0)) throw DomainError("atom never reaches the detector plane");
  return (v + std::sqrt(disc)) / gravity;
}

PulseSimResult simulate_pulses(const Trajectory& traj, const PulseTrain& train,
                               const CloudShape& shape, double max_trap_frequency,
                               std::uint64_t seed, Exec exec) {
  validate_train(train);
  const double t_last =
      train.start_time + train.period * static_cast<double>(train.pulse_count - 1);
  const double tol = 1e-9 * std::max(1.0, std::abs(traj.t_end()));
  if (train.start_time < traj.t0 - tol || t_last > traj.t_end() + tol) {
    std::ostringstream os;
    os << "pulse train [" << train.start_time << ", " << t_last
       << "] s not covered by trajectory [" << traj.t0 << ", " << traj.t_end()
       << "] s";
    throw CoverageError(os.str());
  }

  const FreeFall fall{train.fall_distance, k_gravity};
  const double t_fall = fall.fall_time();
  const double v_det = fall.detector_velocity();
  const int n = train.pulse_count;

  PulseSimResult result;
  result.records.resize(static_cast<std::size_t>(n));
  if (max_trap_frequency > 0.0 && train.period > k_pi / max_trap_frequency) {
    result.aliasing_warning = true;
  }

  std::vector<std::vector<Event>> pulse_events(static_cast<std::size_t>(n));
  const double keep = 1.0 - train.outcoupled_fraction;

  parallel_for(n, exec, [&](std::int64_t p) {
    const std::size_t ps = static_cast<std::size_t>(p);
    const double t_p = train.start_time + train.period * static_cast<double>(p);
    const CondensateState s = traj.state_at(t_p);

    DetectionRecord& rec = result.records[ps];
    rec.pulse_index = static_cast<int>(p);
    // Far-field moments of the falling cloud: the in-plane coordinates map
    // to x + v t_fall, the depth coordinate to the exact arrival-time offset
    // scaled by the detector-plane velocity.
    double mean_full[3];
    double std_full[3];
    mean_full[0] = s.axes[0].position + s.axes[0].velocity * t_fall;
    mean_full[1] = s.axes[1].position + s.axes[1].velocity * t_fall;
    mean_full[2] =
        (fall.arrival_time(s.axes[2].position, s.axes[2].velocity) - t_fall) * v_det;
    for (int a = 0; a < 3; ++a) {
      const std::size_t as = static_cast<std::size_t>(a);
      const double w = shape.width0[as] *
                       (s.axes[as].scale + t_fall * s.axes[as].scale_rate);
      const double res = a == 2 ? train.resolution_z : train.resolution_xy;
      std_full[a] = std::hypot(w, res);
    }

    // The plate only sees atoms inside its in-plane acceptance window, so
    // the reported in-plane moments are those of the censored distribution.
    // The depth coordinate is read off the plate itself and stays untouched.
    const double r_det = train.detector_halfwidth;
    const double lo_x = train.detector_center - r_det;
    const double hi_x = train.detector_center + r_det;
    const CensoredMoments cx = censor(mean_full[0], std_full[0], lo_x, hi_x);
    const CensoredMoments cy = censor(mean_full[1], std_full[1], -r_det, r_det);
    rec.mean = {cx.mean, cy.mean, mean_full[2]};
    rec.stddev = {cx.stddev, cy.stddev, std_full[2]};

    // Earlier pulses have already skimmed their fraction off the cloud.
    const double available =
        s.atom_number * std::pow(keep, static_cast<double>(p));
    const double outcoupled = available * train.outcoupled_fraction;
    const long trials = std::lround(std::max(0.0, outcoupled));

    auto rng = engine_for(seed, "pulse", static_cast<std::uint64_t>(p));
    long arriving = 0;
    if (trials > 0) {
      std::binomial_distribution<long> binom(trials, train.detection_efficiency);
      arriving = binom(rng);
    }

    // Draw arrivals from the full cloud and keep the ones that hit the
    // plate, so the recorded count is the thinned arrival count and the
    // event stream carries exactly the clicks the hardware would log.
    auto& ev = pulse_events[ps];
    ev.reserve(static_cast<std::size_t>(arriving));
    std::normal_distribution<double> unit;
    for (long j = 0; j < arriving; ++j) {
      const double ex = mean_full[0] + std_full[0] * unit(rng);
      const double ey = mean_full[1] + std_full[1] * unit(rng);
      const double ez = mean_full[2] + std_full[2] * unit(rng);
      if (ex < lo_x || ex > hi_x || ey < -r_det || ey > r_det) continue;
      ev.push_back({t_p + t_fall + ez / v_det, ex, ey});
    }
    rec.count = static_cast<long>(ev.size());
  });

  std::size_t total = 0;
  for (const auto& ev : pulse_events) total += ev.size();
  result.events.reserve(total);
  for (auto& ev : pulse_events) {
    result.events.insert(result.events.end(), ev.begin(), ev.end());
  }

  const CondensateState last = traj.state_at(t_last);
  result.atoms_remaining =
      last.atom_number * std::pow(keep, static_cast<double>(n));
  return result;
}

std::vector<DetectionRecord> bin_events(const std::vector<Event>& events,
                                        const PulseTrain& train,
                                        BinDiagnostics* diag) {
  validate_train(train);
  const FreeFall fall{train.fall_distance, k_gravity};
  const double t_fall = fall.fall_time();
  const double v_det = fall.detector_velocity();
  const int n = train.pulse_count;

  struct Accum {
    double sx = 0, sy = 0, sz = 0;
    double sxx = 0, syy = 0, szz = 0;
    long count = 0;
  };
  std::vector<Accum> acc(static_cast<std::size_t>(n));
  long dropped = 0;

  for (const Event& e : events) {
    const double local = e.t - train.start_time - t_fall;
    const double pf = std::round(local / train.period);
    if (pf < 0.0 || pf > static_cast<double>(n - 1)) {
      ++dropped;
      continue;
    }
    const int p = static_cast<int>(pf);
    const double z = (local - static_cast<double>(p) * train.period) * v_det;
    Accum& a = acc[static_cast<std::size_t>(p)];
    a.sx += e.x;
    a.sy += e.y;
    a.sz += z;
    a.sxx += e.x * e.x;
    a.syy += e.y * e.y;
    a.szz += z * z;
    ++a.count;
  }

  std::vector<DetectionRecord> records(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    const Accum& a = acc[static_cast<std::size_t>(p)];
    DetectionRecord& rec = records[static_cast<std::size_t>(p)];
    rec.pulse_index = p;
    rec.count = a.count;
    if (a.count > 0) {
      const double inv = 1.0 / static_cast<double>(a.count);
      rec.mean = {a.sx * inv, a.sy * inv, a.sz * inv};
      // Population variance; guard the subtraction against roundoff.
      rec.stddev = {
          std::sqrt(std::max(0.0, a.sxx * inv - rec.mean[0] * rec.mean[0])),
          std::sqrt(std::max(0.0, a.syy * inv - rec.mean[1] * rec.mean[1])),
          std::sqrt(std::max(0.0, a.szz * inv - rec.mean[2] * rec.mean[2]))};
    }
  }
  if (diag) diag->dropped = dropped;
  return records;
}

void write_events_csv(std::ostream& out, const std::vector<Event>& events) {
  out << "t,x,y\n";
  out.precision(17);
  for (const Event& e : events) out << e.t << ',' << e.x << ',' << e.y << '\n';
  if (!out) throw IoError("failed writing event stream");
}

std::vector<Event> read_events_csv(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty event stream");
  if (line != "t,x,y" && line != "t,x,y\r") {
    throw IoError("event stream must start with the header 't,x,y'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Event e;
    char c1 = 0, c2 = 0;
    if (!(ls >> e.t >> c1 >> e.x >> c2 >> e.y) || c1 != ',' || c2 != ',') {
      std::ostringstream os;
      os << "malformed event at line " << line_no;
      throw IoError(os.str());
    }
    events.push_back(e);
  }
  return events;
}

void write_records_csv(std::ostream& out, const std::vector<DetectionRecord>& records) {
  out << "pulse,count,mean_x,mean_y,mean_z,std_x,std_y,std_z\n";
  out.precision(17);
  for (const DetectionRecord& r : records) {
    out << r.pulse_index << ',' << r.count << ',' << r.mean[0] << ',' << r.mean[1]
        << ',' << r.mean[2] << ',' << r.stddev[0] << ',' << r.stddev[1] << ','
        << r.stddev[2] << '\n';
  }
  if (!out) throw IoError("failed writing record table");
}

}  // namespace rampopt
