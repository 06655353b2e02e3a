#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spa {

struct QuadratureOptions {
  double chunk = 1.0;               ///< truncation chunk length
  double increment_tol = 1e-12;     ///< stop once a chunk contributes less than this
  std::size_t max_chunks = 4000;    ///< give up (divergence flag) after this many chunks
  std::vector<double> breakpoints;  ///< kinks of the integrand; never stop before passing them
};

struct QuadratureResult {
  double value = 0.0;
  bool diverged = false;
  std::size_t chunks = 0;
  double last_increment = 0.0;
};

using Integrand = std::function<double(double)>;

/// Integral over a finite interval, split at the breakpoints that fall inside.
double integrate(const Integrand& f, double a, double b, const std::vector<double>& breakpoints = {});

/// Integral over [a, inf) by adaptive truncation: chunks are appended until
/// two consecutive chunk contributions fall below increment_tol.
QuadratureResult integrate_to_infinity(const Integrand& f, double a, const QuadratureOptions& opts = {});

/// Integral over (-inf, b], mirror of integrate_to_infinity.
QuadratureResult integrate_from_minus_infinity(const Integrand& f, double b,
                                               const QuadratureOptions& opts = {});

}  // namespace spa
