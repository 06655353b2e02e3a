#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace spa {

struct Column {
  std::string name;
  std::vector<double> values;
};

/// Result of one limit/continuity check: one row per abscissa.
struct ConvergenceTable {
  std::string name;
  std::string abscissa_name = "t";
  std::string value_name = "distance";
  std::vector<double> abscissae;
  std::vector<double> distances;
  std::vector<Column> extra;  ///< additional per-row columns
  std::optional<double> rate; ///< fitted slope or decay rate, when one applies
  double tol = 0.0;
  bool verdict = false;
  std::vector<std::pair<std::string, double>> summary;  ///< scalar side results (proxies, maxima)
  std::string note;

  std::size_t rows() const noexcept { return abscissae.size(); }
  /// Abscissae strictly monotone, distances finite, columns aligned.
  void validate() const;
  void write_csv(std::ostream& os) const;
};

/// Shortest round-trip-safe rendering with 17 significant digits.
std::string format_double(double x);

/// last value < tol and the last three values nonincreasing (slack 0.1 tol).
bool eventually_below(const std::vector<double>& values, double tol);

/// Least-squares rate lambda of values ~ C e^{-lambda x} over positive values.
std::optional<double> fit_decay_rate(const std::vector<double>& x, const std::vector<double>& values);

}  // namespace spa
