#pragma once

#include <string>

#include "spa/metric.hpp"
#include "spa/process.hpp"
#include "spa/quadrature.hpp"

namespace spa {

/// Scalar forcing b(t).
///   zero:        0
///   constant:    level
///   sine:        level + amplitude * sin(frequency * t + phase)
///   decaying:    level + amplitude * exp(-rate * max(t, 0))   (frozen for t < 0)
///   exponential: level + amplitude * exp(rate * t)
struct ForcingSpec {
  enum class Kind { zero, constant, sine, decaying, exponential };

  Kind kind = Kind::zero;
  double level = 0.0;
  double amplitude = 1.0;
  double rate = 1.0;
  double frequency = 1.0;
  double phase = 0.0;

  static ForcingSpec zero() { return {}; }
  static ForcingSpec constant(double level);
  static ForcingSpec sine(double amplitude = 1.0, double frequency = 1.0);
  static ForcingSpec decaying(double level, double amplitude, double rate = 1.0);
  static ForcingSpec exponential(double amplitude, double rate);

  double operator()(double t) const;
  bool time_independent() const noexcept { return kind == Kind::zero || kind == Kind::constant; }
  /// Value approached as t -> +inf, when there is one.
  double forward_limit() const;
  std::string describe() const;
  void validate() const;
};

struct BenchmarkSpec {
  enum class Kind { linear, cubic, inclusion, plap };

  Kind kind = Kind::linear;
  ForcingSpec forcing;
  double eps = 1.0;  ///< inclusion radius
  double dt = 1e-3;

  void validate() const;
};

/// x' = -x + b(t), single-valued.
ProcessModel make_linear(const ForcingSpec& b, double dt = 1e-3);
/// x' = -x^3 + g(t), single-valued.
ProcessModel make_cubic(const ForcingSpec& g, double dt = 1e-3);
/// x' = -x + u, u(t) in [-eps, eps].
ProcessModel make_inclusion(double eps, double dt = 1e-3);
/// ODE benchmarks only; the p-Laplacian model is built from its own config.
ProcessModel make_benchmark(const BenchmarkSpec& spec);

struct OracleValue {
  double value = 0.0;
  bool converged = true;
};

/// x*(t) = int_{-inf}^t e^{-(t-s)} b(s) ds by truncated quadrature.
OracleValue linear_pullback_oracle(const ForcingSpec& b, double t);

/// Endpoints x(h) from x(0) = 0 of x' = -x + u over every bang-bang
/// selection u = +-eps switching at n_switches points spaced
/// min(h / (n_switches + 1), ln 2) apart and ending at h. Exact (closed form
/// per constant piece); duplicates removed.
SetCloud inclusion_bruteforce_oracle(double eps, double horizon, int n_switches);

}  // namespace spa
