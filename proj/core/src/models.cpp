#include "spa/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spa/errors.hpp"

namespace spa {

ForcingSpec ForcingSpec::constant(double level) {
  ForcingSpec f;
  f.kind = Kind::constant;
  f.level = level;
  return f;
}

ForcingSpec ForcingSpec::sine(double amplitude, double frequency) {
  ForcingSpec f;
  f.kind = Kind::sine;
  f.amplitude = amplitude;
  f.frequency = frequency;
  return f;
}

ForcingSpec ForcingSpec::decaying(double level, double amplitude, double rate) {
  ForcingSpec f;
  f.kind = Kind::decaying;
  f.level = level;
  f.amplitude = amplitude;
  f.rate = rate;
  return f;
}

ForcingSpec ForcingSpec::exponential(double amplitude, double rate) {
  ForcingSpec f;
  f.kind = Kind::exponential;
  f.amplitude = amplitude;
  f.rate = rate;
  return f;
}

double ForcingSpec::operator()(double t) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return level;
    case Kind::sine:
      return level + amplitude * std::sin(frequency * t + phase);
    case Kind::decaying:
      return level + amplitude * std::exp(-rate * std::max(t, 0.0));
    case Kind::exponential:
      return level + amplitude * std::exp(rate * t);
  }
  return 0.0;
}

double ForcingSpec::forward_limit() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
    case Kind::decaying:
      return level;
    case Kind::exponential:
      if (rate < 0.0) return level;
      break;
    case Kind::sine:
      if (amplitude == 0.0) return level;
      break;
  }
  return std::nan("");
}

std::string ForcingSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::zero:
      os << "zero";
      break;
    case Kind::constant:
      os << "const(" << level << ")";
      break;
    case Kind::sine:
      os << "sine(" << level << "," << amplitude << "," << frequency << "," << phase << ")";
      break;
    case Kind::decaying:
      os << "decay(" << level << "," << amplitude << "," << rate << ")";
      break;
    case Kind::exponential:
      os << "exp(" << level << "," << amplitude << "," << rate << ")";
      break;
  }
  return os.str();
}

void ForcingSpec::validate() const {
  for (double v : {level, amplitude, rate, frequency, phase})
    if (!std::isfinite(v)) throw ContractViolation("forcing parameters must be finite");
  if (kind == Kind::decaying && !(rate > 0.0)) throw ContractViolation("decaying forcing needs rate > 0");
}

void BenchmarkSpec::validate() const {
  forcing.validate();
  if (kind == Kind::inclusion && !(eps >= 0.0)) throw ContractViolation("inclusion radius must be >= 0");
  if (!(dt > 0.0)) throw ContractViolation("benchmark dt must be positive");
}

ProcessModel make_linear(const ForcingSpec& b, double dt) {
  b.validate();
  ProcessModel m;
  m.id = "linear:" + b.describe();
  m.dimension = 1;
  m.rhs = [b](double t, std::span<const double> x, double, std::span<double> dxdt) { dxdt[0] = -x[0] + b(t); };
  m.dt = dt;
  m.autonomous = b.time_independent();
  m.validate();
  return m;
}

ProcessModel make_cubic(const ForcingSpec& g, double dt) {
  g.validate();
  ProcessModel m;
  m.id = "cubic:" + g.describe();
  m.dimension = 1;
  m.rhs = [g](double t, std::span<const double> x, double, std::span<double> dxdt) {
    dxdt[0] = -x[0] * x[0] * x[0] + g(t);
  };
  m.dt = dt;
  m.autonomous = g.time_independent();
  m.validate();
  return m;
}

ProcessModel make_inclusion(double eps, double dt) {
  if (!(eps >= 0.0)) throw ContractViolation("inclusion radius must be >= 0");
  ProcessModel m;
  std::ostringstream id;
  id.precision(17);
  id << "inclusion:" << eps;
  m.id = id.str();
  m.dimension = 1;
  m.rhs = [](double, std::span<const double> x, double u, std::span<double> dxdt) { dxdt[0] = -x[0] + u; };
  m.selection = SelectionSpace::interval(-eps, eps);
  m.dt = dt;
  m.autonomous = true;
  m.validate();
  return m;
}

ProcessModel make_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case BenchmarkSpec::Kind::linear:
      return make_linear(spec.forcing, spec.dt);
    case BenchmarkSpec::Kind::cubic:
      return make_cubic(spec.forcing, spec.dt);
    case BenchmarkSpec::Kind::inclusion:
      return make_inclusion(spec.eps, spec.dt);
    case BenchmarkSpec::Kind::plap:
      break;
  }
  throw ContractViolation("make_benchmark: the p-Laplacian model is built by make_plap_model");
}

OracleValue linear_pullback_oracle(const ForcingSpec& b, double t) {
  QuadratureOptions opts;
  if (b.kind == ForcingSpec::Kind::decaying) opts.breakpoints = {0.0};
  opts.increment_tol = 1e-13;
  // substitute s = t - r, r in [0, inf)
  const auto res = integrate_to_infinity([&](double r) { return std::exp(-r) * b(t - r); }, 0.0, opts);
  return {res.value, !res.diverged};
}

SetCloud inclusion_bruteforce_oracle(double eps, double horizon, int n_switches) {
  if (n_switches < 0 || n_switches > 16) throw ContractViolation("n_switches must lie in [0, 16]");
  if (!(eps >= 0.0) || !(horizon > 0.0)) throw ContractViolation("need eps >= 0 and horizon > 0");
  const int n = n_switches;
  const double spacing = std::min(horizon / (n + 1), std::log(2.0));
  // piece lengths, earliest first
  std::vector<double> lengths;
  lengths.push_back(horizon - n * spacing);
  for (int k = 0; k < n; ++k) lengths.push_back(spacing);

  std::vector<double> ends;
  const std::size_t branches = std::size_t{1} << (n + 1);
  ends.reserve(branches);
  for (std::size_t mask = 0; mask < branches; ++mask) {
    double x = 0.0;
    for (std::size_t piece = 0; piece < lengths.size(); ++piece) {
      const double u = (mask >> piece) & 1U ? eps : -eps;
      x = u + (x - u) * std::exp(-lengths[piece]);
    }
    ends.push_back(x);
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  return SetCloud::scalars(ends);
}

}  // namespace spa
