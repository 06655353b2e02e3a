#include "spa/table.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "spa/errors.hpp"

namespace spa {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void ConvergenceTable::validate() const {
  if (distances.size() != abscissae.size()) throw ContractViolation("table " + name + ": column length mismatch");
  for (const auto& c : extra)
    if (c.values.size() != abscissae.size()) throw ContractViolation("table " + name + ": column " + c.name + " misaligned");
  if (abscissae.size() >= 2) {
    const bool up = abscissae[1] > abscissae[0];
    for (std::size_t i = 1; i < abscissae.size(); ++i)
      if (up ? !(abscissae[i] > abscissae[i - 1]) : !(abscissae[i] < abscissae[i - 1]))
        throw ContractViolation("table " + name + ": abscissae must be strictly monotone");
  }
  for (double d : distances)
    if (!std::isfinite(d)) throw ContractViolation("table " + name + ": distances must be finite");
}

void ConvergenceTable::write_csv(std::ostream& os) const {
  os << abscissa_name << ',' << value_name;
  for (const auto& c : extra) os << ',' << c.name;
  os << '\n';
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    os << format_double(abscissae[i]) << ',' << format_double(distances[i]);
    for (const auto& c : extra) os << ',' << format_double(c.values[i]);
    os << '\n';
  }
}

bool eventually_below(const std::vector<double>& values, double tol) {
  if (values.empty()) return false;
  if (!(values.back() < tol)) return false;
  const std::size_t n = values.size();
  for (std::size_t i = n >= 3 ? n - 2 : 1; i < n; ++i)
    if (values[i] > values[i - 1] + 0.1 * tol) return false;
  return true;
}

std::optional<double> fit_decay_rate(const std::vector<double>& x, const std::vector<double>& values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < values.size(); ++i) {
    if (!(values[i] > 0.0)) continue;
    const double y = std::log(values[i]);
    sx += x[i];
    sy += y;
    sxx += x[i] * x[i];
    sxy += x[i] * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return -(static_cast<double>(n) * sxy - sx * sy) / den;
}

}  // namespace spa
