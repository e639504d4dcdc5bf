#include "rampopt/runlog.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "rampopt/errors.hpp"

namespace rampopt {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

// JSON has no NaN literal; failed costs are stored as null.
json finite_or_null(double x) {
  if (std::isfinite(x)) return json(x);
  return json(nullptr);
}

double double_or_nan(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

std::string observation_to_json(const Observation& obs) {
  json j;
  j["index"] = obs.index;
  j["source"] = to_string(obs.source);
  j["unit"] = vector_to_json(obs.unit);
  j["raw"] = vector_to_json(obs.raw);
  j["failed"] = obs.report.failed;
  j["total"] = finite_or_null(obs.report.total);
  j["oscillation"] = finite_or_null(obs.report.oscillation_cost);
  j["range"] = finite_or_null(obs.report.range_penalty);
  j["width"] = finite_or_null(obs.report.width_cost);
  j["detections"] = obs.report.total_detections;
  j["eval_seed"] = obs.eval_seed;
  j["wall_ms"] = obs.wall_ms;
  return j.dump();
}

Observation observation_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed log line: ") + e.what());
  }
  try {
    Observation obs;
    obs.index = j.at("index").get<int>();
    obs.source = source_from_string(j.at("source").get<std::string>());
    obs.unit = vector_from_json(j.at("unit"));
    obs.raw = vector_from_json(j.at("raw"));
    obs.report.failed = j.at("failed").get<bool>();
    obs.report.total = double_or_nan(j.at("total"));
    obs.report.oscillation_cost = double_or_nan(j.at("oscillation"));
    obs.report.range_penalty = double_or_nan(j.at("range"));
    obs.report.width_cost = double_or_nan(j.at("width"));
    obs.report.total_detections = j.at("detections").get<long>();
    obs.eval_seed = j.at("eval_seed").get<std::uint64_t>();
    obs.wall_ms = j.at("wall_ms").get<double>();
    return obs;
  } catch (const json::exception& e) {
    throw IoError(std::string("log line missing field: ") + e.what());
  }
}

RunLogWriter::RunLogWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw IoError("cannot open run log '" + path + "' for writing");
}

void RunLogWriter::append(const Observation& obs) {
  out_ << observation_to_json(obs) << '\n';
  out_.flush();
  if (!out_) throw IoError("failed appending to run log '" + path_ + "'");
}

std::vector<Observation> read_run_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run log '" + path + "'");
  std::vector<Observation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(observation_from_json(line));
  }
  return out;
}

void write_convergence_csv(const std::string& path,
                           const std::vector<Observation>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(17);
  out << "index,source,failed,total,best_so_far\n";
  double best = std::numeric_limits<double>::infinity();
  for (const Observation& o : history) {
    if (!o.report.failed) best = std::min(best, o.report.total);
    out << o.index << ',' << to_string(o.source) << ',' << (o.report.failed ? 1 : 0)
        << ',';
    if (o.report.failed) {
      out << "nan";
    } else {
      out << o.report.total;
    }
    out << ',' << best << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_best_json(const std::string& path, const Observation& best,
                     const LandscapeSlice* slice) {
  nlohmann::json j;
  j["index"] = best.index;
  j["source"] = to_string(best.source);
  j["unit"] = vector_to_json(best.unit);
  j["raw"] = vector_to_json(best.raw);
  j["total"] = finite_or_null(best.report.total);
  j["oscillation"] = finite_or_null(best.report.oscillation_cost);
  j["range"] = finite_or_null(best.report.range_penalty);
  j["width"] = finite_or_null(best.report.width_cost);
  j["detections"] = best.report.total_detections;
  j["eval_seed"] = best.eval_seed;
  if (slice) {
    j["stiff_axes"] = {slice->axis1, slice->axis2};
    j["curvature"] = vector_to_json(slice->curvature);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_landscape_json(const std::string& path, const LandscapeSlice& slice) {
  nlohmann::json j;
  j["axis1"] = slice.axis1;
  j["axis2"] = slice.axis2;
  j["curvature"] = vector_to_json(slice.curvature);
  j["grid1"] = vector_to_json(slice.grid1);
  j["grid2"] = vector_to_json(slice.grid2);
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < slice.values.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < slice.values.cols(); ++k) {
      row.push_back(slice.values(i, k));
    }
    rows.push_back(std::move(row));
  }
  j["values"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace rampopt
