#include "spa/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spa/errors.hpp"

namespace spa {

namespace {

// Integrands of the form |g(s) - g~|^q carry cancellation noise far above
// machine epsilon once g(s) is close to g~; a tighter tolerance only buys
// deep bisection of that noise.
double piece(const Integrand& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-11);
}

double last_breakpoint_after(const std::vector<double>& bps, double a) {
  double last = a;
  for (double b : bps)
    if (b > last) last = b;
  return last;
}

}  // namespace

double integrate(const Integrand& f, double a, double b, const std::vector<double>& breakpoints) {
  if (!(a <= b)) throw ContractViolation("integrate: interval must satisfy a <= b");
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += piece(f, cuts[i], cuts[i + 1]);
  return sum;
}

QuadratureResult integrate_to_infinity(const Integrand& f, double a, const QuadratureOptions& opts) {
  if (!(opts.chunk > 0.0)) throw ContractViolation("quadrature chunk must be positive");
  QuadratureResult out;
  const double must_pass = last_breakpoint_after(opts.breakpoints, a);
  double lo = a;
  int small_in_a_row = 0;
  while (out.chunks < opts.max_chunks) {
    const double hi = lo + opts.chunk;
    const double inc = integrate(f, lo, hi, opts.breakpoints);
    if (!std::isfinite(inc)) {
      out.diverged = true;
      return out;
    }
    out.value += inc;
    out.last_increment = inc;
    ++out.chunks;
    const bool past = lo >= must_pass;
    lo = hi;
    // only chunks past the last breakpoint count toward stopping
    if (past)
      small_in_a_row = std::abs(inc) < opts.increment_tol ? small_in_a_row + 1 : 0;
    if (small_in_a_row >= 2) return out;
  }
  out.diverged = true;
  return out;
}

QuadratureResult integrate_from_minus_infinity(const Integrand& f, double b, const QuadratureOptions& opts) {
  QuadratureOptions mirrored = opts;
  for (double& p : mirrored.breakpoints) p = -p;
  return integrate_to_infinity([&f](double s) { return f(-s); }, -b, mirrored);
}

}  // namespace spa
