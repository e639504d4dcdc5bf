#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "rampopt/optimizer.hpp"

namespace rampopt {

// Append-only evaluation log, one JSON object per line, flushed after every
// observation so a crashed run keeps everything it measured.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::string& path);
  void append(const Observation& obs);

 private:
  std::ofstream out_;
  std::string path_;
};

std::string observation_to_json(const Observation& obs);
Observation observation_from_json(const std::string& line);

std::vector<Observation> read_run_log(const std::string& path);

// index,source,failed,total,best_so_far per line; best_so_far is the lowest
// successful total seen up to that row (inf until the first success).
void write_convergence_csv(const std::string& path,
                           const std::vector<Observation>& history);

void write_best_json(const std::string& path, const Observation& best,
                     const LandscapeSlice* slice = nullptr);

void write_landscape_json(const std::string& path, const LandscapeSlice& slice);

}  // namespace rampopt
