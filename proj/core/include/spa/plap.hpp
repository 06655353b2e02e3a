#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "spa/metric.hpp"
#include "spa/process.hpp"
#include "spa/quadrature.hpp"
#include "spa/table.hpp"

namespace spa {

// 1-D p-Laplacian on (0,1) with dynamic boundary conditions at x = 0 and
// x = 1. Nodes x_j = j h, j = 0..N+1, h = 1 / (N + 1). The state vector is
// laid out as [u(0), u_1, ..., u_N, u(1)]: the two traces are state entries.

struct Nonlinearity {
  std::function<double(double t, double s)> f;
  std::function<double(double t)> a;  ///< lower coefficient in a|s|^r_i - k <= f s
  std::function<double(double t)> k;
  std::function<double(double t)> C;  ///< growth constant in |f| <= C(|s|^{r_i-1} + 1)
  double r = 4.0;                     ///< r_i

  static Nonlinearity cubic();  ///< f = s^3, a = 1, k = 1, C = 1, r_i = 4
};

struct PLapConfig {
  double p = 3.0;
  double r = 3.0;
  int N = 17;
  double theta = 1.0;
  double eps_reg = 1e-8;
  double a0 = 0.5;
  double dt = 1e-3;
  double C0 = 1.0;
  double C = 1.0;

  Nonlinearity f1 = Nonlinearity::cubic();
  Nonlinearity f2 = Nonlinearity::cubic();
  /// Autonomous limits used by the frozen problem.
  std::function<double(double s)> f1_limit = [](double s) { return s * s * s; };
  std::function<double(double s)> f2_limit = [](double s) { return s * s * s; };

  std::function<double(double t, double x)> g1;  ///< interior forcing
  std::function<double(double t, double x)> g2;  ///< boundary forcing, x in {0, 1}
  std::function<double(double x)> g1_limit;
  std::function<double(double x)> g2_limit;
  std::vector<double> forcing_breakpoints{0.0};
  bool autonomous = false;  ///< forcing and nonlinearities independent of t

  /// Solver variants: eps_reg values x {1, 2} substeps. With
  /// use_variants = false the model is single-valued with eps_reg.
  std::vector<double> eps_variants{1e-6, 1e-8, 1e-10};
  bool use_variants = true;

  PLapConfig();  ///< default data: g_i = 1 + e^{-max(t,0)} h_i, h_1 = sin(pi x), h_2 = (0.5, -0.5)

  double h() const { return 1.0 / (N + 1); }
  double node(int j) const { return j * h(); }
  std::size_t dimension() const { return static_cast<std::size_t>(N) + 2; }
  /// Trapezoid weights on all nodes plus unit point masses on the traces.
  MetricDescriptor metric() const;
  void validate() const;
};

/// Same geometry with g_i = g~_i and f_i = f~_i.
PLapConfig frozen_limit(const PLapConfig& cfg);

struct DiscreteField {
  std::vector<double> interior;
  std::array<double, 2> boundary{0.0, 0.0};

  State to_state() const;
  static DiscreteField from_state(std::span<const double> x);
  static DiscreteField constant(int N, double c);
  /// Nodal values of u on the interior, traces from u(0), u(1).
  static DiscreteField sample(int N, const std::function<double(double)>& u);
};

double x2_norm(const DiscreteField& u, const PLapConfig& cfg);
double x2_norm(std::span<const double> x, const PLapConfig& cfg);
/// (sum_j h |u_x|^p + ||U||^p_X2)^{1/p}: discrete stand-in for the V^p norm.
double vp_norm(std::span<const double> x, const PLapConfig& cfg);

/// Regularized flux (w^2 + eps)^{(p-2)/2} w.
double plap_flux(double w, double p, double eps);

DiscreteField plap_rhs(const DiscreteField& u, double t, const PLapConfig& cfg);
void plap_rhs(std::span<const double> x, double t, const PLapConfig& cfg, double eps, std::span<double> out);

/// Semi-implicit Euler: flux coefficients frozen at (t, x), diffusion
/// implicit, f_i and forcing explicit; tridiagonal solve.
DiscreteField plap_step(const DiscreteField& u, double t, double dt, const PLapConfig& cfg);
void plap_step(std::span<const double> x, double t, double dt, const PLapConfig& cfg, double eps,
               std::span<double> out);

/// Process model of the semi-discrete problem. The selection indexes the
/// solver variants (eps = eps_variants[v % 3], 2^{v / 3} substeps).
ProcessModel make_plap_model(const PLapConfig& cfg);

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

struct DissipativityReport {
  bool passed = false;
  double worst_lower_margin = 0.0;   ///< min of f s - (a |s|^r - k)
  double worst_growth_margin = 0.0;  ///< min of C (|s|^{r-1} + 1) - |f|
  int witness_component = 0;         ///< 1 or 2 for the worst margin overall
  double witness_t = 0.0;
  double witness_s = 0.0;
};

DissipativityReport dissipativity_check(const PLapConfig& cfg, const std::vector<double>& t_grid,
                                        const std::vector<double>& s_grid);

/// Discrete ||v||_{q,Omega}^q (trapezoid on all nodes) and ||v||_{q,Gamma}^q.
double omega_power(const std::function<double(double x)>& v, const PLapConfig& cfg, double q);
double gamma_power(const std::function<double(double x)>& v, double q);

/// int_tau^inf ||g1(s) - g~1||^{2r-2}_{2r-2,Omega} + ||g2(s) - g~2||^{2r-2}_{2r-2,Gamma} ds.
QuadratureResult assumption_a_tail(const PLapConfig& cfg, double tau);

struct AssumptionBReport {
  std::vector<double> t_grid;
  std::vector<double> h41;  ///< int_{-inf}^t e^{theta(s-t)} (k1 + k2) ds
  std::vector<double> h42;  ///< same with k_i^{r-1}
  std::vector<bool> diverged;
  double sup_h41 = 0.0;
  double sup_h42 = 0.0;
  /// Sup over the grid extended to twice its span (both sides) within 1% of the grid sup.
  bool bounded_on_extension = false;
  bool finite = false;
};

AssumptionBReport assumption_b_sup(const PLapConfig& cfg, const std::vector<double>& t_grid);

struct RadiusValue {
  double value = 0.0;
  bool diverged = false;
};

RadiusValue absorbing_radius(const PLapConfig& cfg, double t);

struct RadiusSup {
  double sup = 0.0;
  bool diverged = false;
  std::vector<double> values;
};

RadiusSup absorbing_radius_sup(const PLapConfig& cfg, const std::vector<double>& t_grid);

struct TrajectoryPair {
  double tau = 0.0;
  Trajectory u;  ///< solution of the full problem from time tau
  Trajectory v;  ///< solution of the frozen problem from time 0
};

struct AssumptionCReport {
  std::vector<double> taus;
  std::vector<double> worst_margin;  ///< per tau: min over t of inner + alpha (both components)
  bool passed = false;
  bool improving = false;  ///< worst margins nondecreasing in tau
};

/// <f1(t+tau, u) - f~1(v), u - v>_Omega >= -alpha_tau(t) and the boundary
/// analog, evaluated on aligned grid points of each pair.
AssumptionCReport assumption_c_check(const PLapConfig& cfg,
                                     const std::function<double(double tau, double t)>& alpha,
                                     const std::vector<TrajectoryPair>& pairs);

/// Rows (t, ||U(t + tau) - V(t)||_X2) with column bound =
/// sqrt(e^{ct} (||U_tau - V_0||^2 + (4t/c) alpha_sup + int_0^inf e^{-cs} ||g(s + tau) - g~||_2^2 ds)).
ConvergenceTable gronwall_bound(const PLapConfig& cfg, const Trajectory& u, const Trajectory& v, double tau,
                                double c = 1.0, double alpha_sup = 0.0);

/// int_0^inf e^{-cs} (||g1(s + tau) - g~1||^2_{2,Omega} + ||g2(s + tau) - g~2||^2_{2,Gamma}) ds.
QuadratureResult forcing_l2_tail(const PLapConfig& cfg, double tau, double c);

}  // namespace spa
