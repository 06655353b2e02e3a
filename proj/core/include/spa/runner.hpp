#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spa/attractor.hpp"
#include "spa/config.hpp"
#include "spa/table.hpp"

namespace spa {

struct RunOptions {
  std::optional<std::string> out_dir;  ///< overrides `out` from the config
  std::optional<std::uint64_t> seed;   ///< overrides `seed` from the config
  std::ostream* log = nullptr;         ///< progress lines, if set
};

struct CheckResult {
  std::string name;
  bool verdict = false;
  double tol = 0.0;
  std::string csv;  ///< file name relative to the output directory, if any
  std::vector<std::pair<std::string, double>> summary;
};

struct RunResult {
  int exit_code = 1;  ///< 0 all verdicts pass, 2 some verdict fails, 1 execution error
  std::string out_dir;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;  ///< written files, relative to out_dir
  std::string error;
};

RunResult run(const std::string& config_path, const RunOptions& opts = {});
RunResult run_experiment(ExperimentConfig cfg, const RunOptions& opts = {});

/// One block per experiment: name, config keys, statement verified.
std::string list_experiments();

/// Columns t, point_index, x0, x1, ...
void write_family_csv(std::ostream& os, const AttractorFamily& family);
void write_cloud_csv(std::ostream& os, const SetCloud& cloud);

}  // namespace spa
