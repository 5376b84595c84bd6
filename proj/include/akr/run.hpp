#pragma once

// Batch experiments over the builtin models: configuration, tasks and the
// exit-code contract (nonzero iff a certified invariant failed).

#include "akr/records.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace akr {

struct ExperimentConfig {
  std::string task;   // validate | certify | disc | metric | scale | sweep | verify
  std::string model = "unit-ball";
  ModelParams params;
  int grid = 0;       // certificate samples per axis, 0 = task default
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = 0;    // 0 = hardware concurrency
  std::map<std::string, std::string> options;  // task specific, see README
};

const std::vector<std::string>& task_names();

// [experiment] task/model/grid/tol/seed/out/threads, [params] and [options] sections.
// The task may be left out and supplied later; run() validates the whole config.
ExperimentConfig parse_config(const std::string& text);
void validate_config(const ExperimentConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  std::vector<std::string> failures;  // one line per failed invariant
  double max_lower_over_upper = 0.0;  // sandwich diagnostic over all samples
  std::string summary;
};

RunResult run(const ExperimentConfig& cfg, std::ostream& log);

std::string list_models();

// Runs f(0..count-1) on a pool of `threads` workers; rethrows the first exception.
void parallel_for(int count, int threads, const std::function<void(int)>& f);

}  // namespace akr
