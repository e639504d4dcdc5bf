#include "rampopt/config.hpp"

#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return x;
}

long parse_long(const std::string& v) {
  std::size_t pos = 0;
  const long x = std::stol(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return x;
}

int parse_int(const std::string& v) {
  const long x = parse_long(v);
  if (x < INT_MIN || x > INT_MAX) throw std::out_of_range(v);
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t x = 0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  const auto r = std::from_chars(first, last, x);
  if (r.ec != std::errc() || r.ptr != last) throw std::invalid_argument(v);
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(v);
}

std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument(v);
    out.push_back(parse_double(item));
  }
  if (out.empty()) throw std::invalid_argument(v);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto d = [](double RunConfig::*f) {
      return [f](RunConfig& c, const std::string& v) { c.*f = parse_double(v); };
    };
    auto i = [](int RunConfig::*f) {
      return [f](RunConfig& c, const std::string& v) { c.*f = parse_int(v); };
    };
    auto b = [](bool RunConfig::*f) {
      return [f](RunConfig& c, const std::string& v) { c.*f = parse_bool(v); };
    };

    t["run.scenario"] = [](RunConfig& c, const std::string& v) {
      c.scenario = scenario_from_string(v);
    };
    t["run.seed"] = [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); };
    t["run.out"] = [](RunConfig& c, const std::string& v) { c.out_dir = v; };
    t["run.budget"] = i(&RunConfig::budget);

    t["ramp.kind"] = [](RunConfig& c, const std::string& v) {
      c.ramp_kind = ramp_kind_from_string(v);
    };
    t["ramp.duration_ms"] = d(&RunConfig::duration_ms);
    t["ramp.sweep_durations_ms"] = [](RunConfig& c, const std::string& v) {
      c.sweep_durations_ms = parse_double_list(v);
    };
    t["ramp.segments_per_channel"] = i(&RunConfig::segments_per_channel);
    t["ramp.v1_knot_lo"] = d(&RunConfig::v1_knot_lo);
    t["ramp.v1_knot_hi"] = d(&RunConfig::v1_knot_hi);
    t["ramp.v2_knot_lo"] = d(&RunConfig::v2_knot_lo);
    t["ramp.v2_knot_hi"] = d(&RunConfig::v2_knot_hi);
    t["ramp.expo_ratio_lo"] = d(&RunConfig::expo_ratio_lo);
    t["ramp.expo_ratio_hi"] = d(&RunConfig::expo_ratio_hi);

    t["trap.quad_initial_a"] = d(&RunConfig::quad_initial_a);
    t["trap.bias_initial_a"] = d(&RunConfig::bias_initial_a);
    t["trap.axial_initial_hz"] = d(&RunConfig::axial_initial_hz);
    t["trap.radial_initial_hz"] = d(&RunConfig::radial_initial_hz);
    t["trap.quad_final_a"] = d(&RunConfig::quad_final_a);
    t["trap.bias_final_a"] = d(&RunConfig::bias_final_a);
    t["trap.axial_final_hz"] = d(&RunConfig::axial_final_hz);
    t["trap.radial_final_hz"] = d(&RunConfig::radial_final_hz);
    t["trap.displacement_mm"] = d(&RunConfig::displacement_mm);
    t["trap.escape_velocity_initial"] = d(&RunConfig::escape_velocity_initial);
    t["trap.escape_velocity_final"] = d(&RunConfig::escape_velocity_final);
    t["trap.atom_mass_kg"] = d(&RunConfig::atom_mass_kg);
    t["trap.gain_k1"] = d(&RunConfig::gain_k1);
    t["trap.gain_k2"] = d(&RunConfig::gain_k2);
    t["trap.current_noise"] = d(&RunConfig::current_noise);
    t["trap.min_quad_a"] = d(&RunConfig::min_quad_a);
    t["trap.max_current_a"] = d(&RunConfig::max_current_a);

    t["cloud.atom_number"] = d(&RunConfig::atom_number);
    t["cloud.width0_x_um"] = d(&RunConfig::width0_x_um);
    t["cloud.width0_y_um"] = d(&RunConfig::width0_y_um);
    t["cloud.width0_z_um"] = d(&RunConfig::width0_z_um);
    t["cloud.loss_gamma"] = d(&RunConfig::loss_gamma);

    t["pulses.period_ms"] = d(&RunConfig::pulse_period_ms);
    t["pulses.count"] = i(&RunConfig::pulse_count);
    t["pulses.outcoupled_fraction"] = d(&RunConfig::outcoupled_fraction);
    t["pulses.detection_efficiency"] = d(&RunConfig::detection_efficiency);
    t["pulses.fall_distance_m"] = d(&RunConfig::fall_distance_m);
    t["pulses.resolution_xy_um"] = d(&RunConfig::resolution_xy_um);
    t["pulses.resolution_z_um"] = d(&RunConfig::resolution_z_um);
    t["pulses.detector_halfwidth_mm"] = d(&RunConfig::detector_halfwidth_mm);
    t["pulses.settle_ms"] = d(&RunConfig::settle_ms);
    t["pulses.noise"] = b(&RunConfig::detection_noise);

    t["cost.width_threshold_mm"] = d(&RunConfig::width_threshold_mm);
    t["cost.width_scale"] = d(&RunConfig::width_scale);
    t["cost.range_threshold_mm"] = d(&RunConfig::range_threshold_mm);
    t["cost.range_scale"] = d(&RunConfig::range_scale);
    t["cost.min_detections"] = [](RunConfig& c, const std::string& v) {
      c.min_detections = parse_long(v);
    };
    t["cost.range_componentwise"] = b(&RunConfig::range_componentwise);

    t["optimizer.initial_params"] = [](RunConfig& c, const std::string& v) {
      c.initial_params = parse_double_list(v);
    };
    t["optimizer.initial_designs"] = i(&RunConfig::initial_designs);
    t["optimizer.initial_spread"] = d(&RunConfig::initial_spread);
    t["optimizer.refit_interval"] = i(&RunConfig::refit_interval);
    t["optimizer.refit_growth"] = d(&RunConfig::refit_growth);
    t["optimizer.hyper_starts"] = i(&RunConfig::hyper_starts);
    t["optimizer.hyper_iters"] = i(&RunConfig::hyper_iters);
    t["optimizer.hyper_tol"] = d(&RunConfig::hyper_tol);
    t["optimizer.acquisition_starts"] = i(&RunConfig::acquisition_starts);
    t["optimizer.acquisition_iters"] = i(&RunConfig::acquisition_iters);
    t["optimizer.acquisition_tol"] = d(&RunConfig::acquisition_tol);
    t["optimizer.de_mutation"] = d(&RunConfig::de_mutation);
    t["optimizer.de_crossover"] = d(&RunConfig::de_crossover);
    t["optimizer.de_population"] = i(&RunConfig::de_population);
    t["optimizer.parallel"] = b(&RunConfig::parallel);

    t["damping.induce_ms"] = d(&RunConfig::induce_ms);
    t["damping.control_ms"] = d(&RunConfig::control_ms);
    t["damping.quad_a"] = d(&RunConfig::damp_quad_a);
    t["damping.bias_a"] = d(&RunConfig::damp_bias_a);
    t["damping.v1_lo"] = d(&RunConfig::damp_v1_lo);
    t["damping.v1_hi"] = d(&RunConfig::damp_v1_hi);
    t["damping.v2_lo"] = d(&RunConfig::damp_v2_lo);
    t["damping.v2_hi"] = d(&RunConfig::damp_v2_hi);

    t["sphere.dimension"] = i(&RunConfig::sphere_dimension);
    t["sphere.target"] = d(&RunConfig::sphere_target);
    return t;
  }();
  return table;
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Transport: return "transport";
    case Scenario::Damping: return "damping";
    case Scenario::Sphere: return "sphere";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "transport") return Scenario::Transport;
  if (s == "damping") return Scenario::Damping;
  if (s == "sphere") return Scenario::Sphere;
  throw DomainError("unknown scenario '" + s + "'");
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  std::string line;
  std::string section;
  std::map<std::string, int> seen;
  int line_no = 0;

  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line_no << ": " << what;
    throw ConfigError(os.str());
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key '" + key + "' outside any section");

    const std::string full = section + "." + key;
    const auto it = schema().find(full);
    if (it == schema().end()) fail("unknown key '" + full + "'");
    if (seen.count(full)) {
      fail("duplicate key '" + full + "' (first at line " +
           std::to_string(seen[full]) + ")");
    }
    seen[full] = line_no;
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      fail(std::string("bad value for '") + full + "': " + e.what());
    } catch (const std::exception&) {
      fail("bad value '" + value + "' for '" + full + "'");
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

void write_config(std::ostream& out, const RunConfig& c) {
  out.precision(17);
  const auto onoff = [](bool v) { return v ? "on" : "off"; };

  out << "[run]\n";
  out << "scenario = " << to_string(c.scenario) << "\n";
  out << "seed = " << c.seed << "\n";
  if (!c.out_dir.empty()) out << "out = " << c.out_dir << "\n";
  out << "budget = " << c.budget << "\n";

  out << "\n[ramp]\n";
  out << "kind = " << to_string(c.ramp_kind) << "\n";
  out << "duration_ms = " << c.duration_ms << "\n";
  out << "sweep_durations_ms = ";
  for (std::size_t i = 0; i < c.sweep_durations_ms.size(); ++i) {
    out << (i ? "," : "") << c.sweep_durations_ms[i];
  }
  out << "\n";
  out << "segments_per_channel = " << c.segments_per_channel << "\n";
  out << "v1_knot_lo = " << c.v1_knot_lo << "\n";
  out << "v1_knot_hi = " << c.v1_knot_hi << "\n";
  out << "v2_knot_lo = " << c.v2_knot_lo << "\n";
  out << "v2_knot_hi = " << c.v2_knot_hi << "\n";
  out << "expo_ratio_lo = " << c.expo_ratio_lo << "\n";
  out << "expo_ratio_hi = " << c.expo_ratio_hi << "\n";

  out << "\n[trap]\n";
  out << "quad_initial_a = " << c.quad_initial_a << "\n";
  out << "bias_initial_a = " << c.bias_initial_a << "\n";
  out << "axial_initial_hz = " << c.axial_initial_hz << "\n";
  out << "radial_initial_hz = " << c.radial_initial_hz << "\n";
  out << "quad_final_a = " << c.quad_final_a << "\n";
  out << "bias_final_a = " << c.bias_final_a << "\n";
  out << "axial_final_hz = " << c.axial_final_hz << "\n";
  out << "radial_final_hz = " << c.radial_final_hz << "\n";
  out << "displacement_mm = " << c.displacement_mm << "\n";
  out << "escape_velocity_initial = " << c.escape_velocity_initial << "\n";
  out << "escape_velocity_final = " << c.escape_velocity_final << "\n";
  out << "atom_mass_kg = " << c.atom_mass_kg << "\n";
  out << "gain_k1 = " << c.gain_k1 << "\n";
  out << "gain_k2 = " << c.gain_k2 << "\n";
  out << "current_noise = " << c.current_noise << "\n";
  out << "min_quad_a = " << c.min_quad_a << "\n";
  out << "max_current_a = " << c.max_current_a << "\n";

  out << "\n[cloud]\n";
  out << "atom_number = " << c.atom_number << "\n";
  out << "width0_x_um = " << c.width0_x_um << "\n";
  out << "width0_y_um = " << c.width0_y_um << "\n";
  out << "width0_z_um = " << c.width0_z_um << "\n";
  out << "loss_gamma = " << c.loss_gamma << "\n";

  out << "\n[pulses]\n";
  out << "period_ms = " << c.pulse_period_ms << "\n";
  out << "count = " << c.pulse_count << "\n";
  out << "outcoupled_fraction = " << c.outcoupled_fraction << "\n";
  out << "detection_efficiency = " << c.detection_efficiency << "\n";
  out << "fall_distance_m = " << c.fall_distance_m << "\n";
  out << "resolution_xy_um = " << c.resolution_xy_um << "\n";
  out << "resolution_z_um = " << c.resolution_z_um << "\n";
  out << "detector_halfwidth_mm = " << c.detector_halfwidth_mm << "\n";
  out << "settle_ms = " << c.settle_ms << "\n";
  out << "noise = " << onoff(c.detection_noise) << "\n";

  out << "\n[cost]\n";
  out << "width_threshold_mm = " << c.width_threshold_mm << "\n";
  out << "width_scale = " << c.width_scale << "\n";
  out << "range_threshold_mm = " << c.range_threshold_mm << "\n";
  out << "range_scale = " << c.range_scale << "\n";
  out << "min_detections = " << c.min_detections << "\n";
  out << "range_componentwise = " << onoff(c.range_componentwise) << "\n";

  out << "\n[optimizer]\n";
  if (!c.initial_params.empty()) {
    out << "initial_params = ";
    for (std::size_t i = 0; i < c.initial_params.size(); ++i) {
      out << (i ? "," : "") << c.initial_params[i];
    }
    out << "\n";
  }
  out << "initial_designs = " << c.initial_designs << "\n";
  out << "initial_spread = " << c.initial_spread << "\n";
  out << "refit_interval = " << c.refit_interval << "\n";
  out << "refit_growth = " << c.refit_growth << "\n";
  out << "hyper_starts = " << c.hyper_starts << "\n";
  out << "hyper_iters = " << c.hyper_iters << "\n";
  out << "hyper_tol = " << c.hyper_tol << "\n";
  out << "acquisition_starts = " << c.acquisition_starts << "\n";
  out << "acquisition_iters = " << c.acquisition_iters << "\n";
  out << "acquisition_tol = " << c.acquisition_tol << "\n";
  out << "de_mutation = " << c.de_mutation << "\n";
  out << "de_crossover = " << c.de_crossover << "\n";
  out << "de_population = " << c.de_population << "\n";
  out << "parallel = " << onoff(c.parallel) << "\n";

  out << "\n[damping]\n";
  out << "induce_ms = " << c.induce_ms << "\n";
  out << "control_ms = " << c.control_ms << "\n";
  out << "quad_a = " << c.damp_quad_a << "\n";
  out << "bias_a = " << c.damp_bias_a << "\n";
  out << "v1_lo = " << c.damp_v1_lo << "\n";
  out << "v1_hi = " << c.damp_v1_hi << "\n";
  out << "v2_lo = " << c.damp_v2_lo << "\n";
  out << "v2_hi = " << c.damp_v2_hi << "\n";

  out << "\n[sphere]\n";
  out << "dimension = " << c.sphere_dimension << "\n";
  out << "target = " << c.sphere_target << "\n";
  if (!out) throw IoError("failed writing config");
}

void save_config_file(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file '" + path + "'");
  write_config(out, cfg);
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.budget >= 1, "run.budget must be at least 1");
  require(c.duration_ms > 0.0, "ramp.duration_ms must be positive");
  require(!c.sweep_durations_ms.empty(), "ramp.sweep_durations_ms must be non-empty");
  for (std::size_t i = 0; i < c.sweep_durations_ms.size(); ++i) {
    require(c.sweep_durations_ms[i] > 0.0, "sweep durations must be positive");
    if (i > 0) {
      require(c.sweep_durations_ms[i] < c.sweep_durations_ms[i - 1],
              "ramp.sweep_durations_ms must be strictly descending");
    }
  }
  require(c.segments_per_channel >= 1, "ramp.segments_per_channel must be >= 1");
  require(c.v1_knot_lo < c.v1_knot_hi, "ramp.v1 knot bounds must be ordered");
  require(c.v2_knot_lo < c.v2_knot_hi, "ramp.v2 knot bounds must be ordered");
  require(c.expo_ratio_lo > 0.0 && c.expo_ratio_lo < c.expo_ratio_hi,
          "ramp.expo_ratio bounds must be ordered and positive");
  require(c.atom_mass_kg > 0.0, "trap.atom_mass_kg must be positive");
  require(c.current_noise >= 0.0 && c.current_noise < 0.2,
          "trap.current_noise must lie in [0, 0.2)");
  require(c.atom_number > 0.0, "cloud.atom_number must be positive");
  require(c.loss_gamma >= 0.0, "cloud.loss_gamma must be non-negative");
  require(c.width0_x_um > 0.0 && c.width0_y_um > 0.0 && c.width0_z_um > 0.0,
          "cloud widths must be positive");
  require(c.pulse_period_ms > 0.0, "pulses.period_ms must be positive");
  require(c.pulse_count >= 1, "pulses.count must be at least 1");
  require(c.outcoupled_fraction > 0.0 && c.outcoupled_fraction < 1.0,
          "pulses.outcoupled_fraction must lie in (0, 1)");
  require(c.detection_efficiency > 0.0 && c.detection_efficiency <= 1.0,
          "pulses.detection_efficiency must lie in (0, 1]");
  require(c.fall_distance_m > 0.0, "pulses.fall_distance_m must be positive");
  require(c.detector_halfwidth_mm > 0.0,
          "pulses.detector_halfwidth_mm must be positive");
  require(c.settle_ms >= 0.0, "pulses.settle_ms must be non-negative");
  require(c.width_threshold_mm >= 0.0 && c.range_threshold_mm >= 0.0,
          "cost thresholds must be non-negative");
  require(c.width_scale >= 0.0 && c.range_scale >= 0.0,
          "cost scales must be non-negative");
  require(c.min_detections >= 0, "cost.min_detections must be non-negative");
  require(c.initial_designs >= 0, "optimizer.initial_designs must be >= 0");
  require(c.initial_spread > 0.0, "optimizer.initial_spread must be positive");
  require(c.refit_interval >= 1, "optimizer.refit_interval must be >= 1");
  require(c.refit_growth >= 0.0, "optimizer.refit_growth must be >= 0");
  require(c.hyper_starts >= 0, "optimizer.hyper_starts must be >= 0");
  require(c.hyper_iters >= 1 && c.acquisition_iters >= 1,
          "optimizer iteration caps must be >= 1");
  require(c.hyper_tol > 0.0 && c.acquisition_tol > 0.0,
          "optimizer tolerances must be positive");
  require(c.acquisition_starts >= 1, "optimizer.acquisition_starts must be >= 1");
  require(c.de_mutation >= 0.0, "optimizer.de_mutation must be >= 0");
  require(c.de_crossover >= 0.0 && c.de_crossover <= 1.0,
          "optimizer.de_crossover must lie in [0, 1]");
  require(c.de_population == 0 || c.de_population >= 4,
          "optimizer.de_population must be 0 (auto) or >= 4");
  require(c.induce_ms > 0.0 && c.control_ms > 0.0,
          "damping phase durations must be positive");
  require(c.damp_v1_lo < c.damp_v1_hi && c.damp_v2_lo < c.damp_v2_hi,
          "damping knot bounds must be ordered");
  require(c.sphere_dimension >= 1, "sphere.dimension must be >= 1");
}

}  // namespace rampopt
