#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spa/attractor.hpp"
#include "spa/models.hpp"
#include "spa/plap.hpp"

namespace spa {

/// Flat `key = value` text with `[section]` headers and `#` comments.
/// Keys before the first header belong to the section "".
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<Entry> find(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const { return sections_.count(section) != 0; }

  std::string get_string(const std::string& section, const std::string& key, std::optional<std::string> fallback = {}) const;
  double get_double(const std::string& section, const std::string& key, std::optional<double> fallback = {}) const;
  long long get_int(const std::string& section, const std::string& key, std::optional<long long> fallback = {}) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::optional<std::uint64_t> fallback = {}) const;
  bool get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback = {}) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               std::optional<std::vector<double>> fallback = {}) const;

  /// Throws ConfigError at the first key of `section` not in `allowed`.
  void require_known(const std::string& section, const std::vector<std::string>& allowed) const;
  /// Throws ConfigError at the first section not in `allowed`.
  void require_sections(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::map<std::string, Entry>>& sections() const noexcept { return sections_; }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

enum class Experiment { attract, continuity, limits, autonomy, assumptions, plap_suite };

std::string experiment_name(Experiment e);
std::optional<Experiment> experiment_from_name(const std::string& name);

/// Experiment-specific keys of the [params] section. Unset optionals fall
/// back to per-experiment defaults chosen by the runner.
struct ExperimentParams {
  // attract
  std::optional<double> oracle_tol;
  std::optional<double> quasi_depth;
  double quasi_tol = 1e-2;
  // continuity
  double t = 0.0;
  std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  std::optional<double> slope_bound;
  // limits
  std::string direction = "forward";
  std::vector<double> fractions{1.0, 0.5, 0.25};
  std::optional<double> limit_tol;
  std::optional<double> oracle_lo;
  std::optional<double> oracle_hi;
  // autonomy, plap-suite
  double absorb_radius = 2.0;
  double settle_time = 20.0;
  std::optional<double> tracking_tol;
  std::optional<std::vector<double>> taus;
  std::vector<double> offsets{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  double autonomy_tol = 1e-2;
  // assumptions
  std::vector<double> b_grid;  ///< from b_start/b_stop/b_step, default 0..50 step 1
  double s_max = 10.0;
  double tail_tol = 1e-6;
  // plap-suite
  double gronwall_span = 5.0;
  double c = 1.0;
  double alpha_sup = 0.0;
};

/// Fully validated experiment description; nothing is computed while building it.
struct ExperimentConfig {
  Experiment experiment = Experiment::attract;
  std::uint64_t seed = 1;
  std::string out_dir = "spalab-out";

  bool model_is_plap = false;
  BenchmarkSpec model;
  PLapConfig plap;
  std::optional<BenchmarkSpec> reference;  ///< autonomous comparison model

  PullbackConfig pullback;
  std::vector<double> grid;
  ExperimentParams params;
  ConfigFile source;  ///< parsed file, echoed into the manifest
};

ExperimentConfig build_config(const ConfigFile& file);
ExperimentConfig load_config(const std::string& path);

}  // namespace spa
