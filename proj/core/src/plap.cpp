#include "spa/plap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spa/errors.hpp"

namespace spa {

namespace {

double trapezoid_weight(const PLapConfig& cfg, int j) {
  return (j == 0 || j == cfg.N + 1) ? 0.5 * cfg.h() : cfg.h();
}

// Tridiagonal solve (Thomas); sub[0] and sup[n-1] are ignored.
void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
            std::vector<double>& rhs, std::span<double> out) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300) throw SolverError("plap step: singular tridiagonal system");
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-300) throw SolverError("plap step: singular tridiagonal system");
  out[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = (rhs[i] - sup[i] * out[i + 1]) / diag[i];
}

double difference_power_omega(const std::function<double(double, double)>& g,
                              const std::function<double(double)>& limit, double s, const PLapConfig& cfg,
                              double q) {
  return omega_power([&](double x) { return g(s, x) - limit(x); }, cfg, q);
}

double difference_power_gamma(const std::function<double(double, double)>& g,
                              const std::function<double(double)>& limit, double s, double q) {
  return gamma_power([&](double x) { return g(s, x) - limit(x); }, q);
}

}  // namespace

Nonlinearity Nonlinearity::cubic() {
  Nonlinearity n;
  n.f = [](double, double s) { return s * s * s; };
  n.a = [](double) { return 1.0; };
  n.k = [](double) { return 1.0; };
  n.C = [](double) { return 1.0; };
  n.r = 4.0;
  return n;
}

PLapConfig::PLapConfig() {
  g1 = [](double t, double x) { return 1.0 + std::exp(-std::max(t, 0.0)) * std::sin(std::numbers::pi * x); };
  g2 = [](double t, double x) { return 1.0 + std::exp(-std::max(t, 0.0)) * (x < 0.5 ? 0.5 : -0.5); };
  g1_limit = [](double) { return 1.0; };
  g2_limit = [](double) { return 1.0; };
}

MetricDescriptor PLapConfig::metric() const {
  std::vector<double> w(dimension(), h());
  w.front() = 1.0 + 0.5 * h();
  w.back() = 1.0 + 0.5 * h();
  return MetricDescriptor(std::move(w));
}

void PLapConfig::validate() const {
  if (!(p > 2.0)) throw ContractViolation("plap: p must exceed 2");
  if (!(r > 2.0)) throw ContractViolation("plap: r must exceed 2");
  if (N < 1) throw ContractViolation("plap: N must be positive");
  if (!(theta > 0.0)) throw ContractViolation("plap: theta must be positive");
  if (!(eps_reg > 0.0)) throw ContractViolation("plap: eps_reg must be positive");
  if (!(a0 > 0.0)) throw ContractViolation("plap: a0 must be positive");
  if (!(dt > 0.0)) throw ContractViolation("plap: dt must be positive");
  if (!(C0 > 0.0) || !(C >= 0.0)) throw ContractViolation("plap: need C0 > 0 and C >= 0");
  if (!g1 || !g2 || !g1_limit || !g2_limit) throw ContractViolation("plap: forcing must be set");
  for (const auto* n : {&f1, &f2})
    if (!n->f || !n->a || !n->k || !n->C) throw ContractViolation("plap: nonlinearity descriptors must be set");
  if (!f1_limit || !f2_limit) throw ContractViolation("plap: limit nonlinearities must be set");
  if (use_variants && eps_variants.empty()) throw ContractViolation("plap: variant list is empty");
  for (double e : eps_variants)
    if (!(e > 0.0)) throw ContractViolation("plap: variant eps must be positive");
}

PLapConfig frozen_limit(const PLapConfig& cfg) {
  PLapConfig out = cfg;
  auto l1 = cfg.g1_limit;
  auto l2 = cfg.g2_limit;
  out.g1 = [l1](double, double x) { return l1(x); };
  out.g2 = [l2](double, double x) { return l2(x); };
  auto fl1 = cfg.f1_limit;
  auto fl2 = cfg.f2_limit;
  out.f1.f = [fl1](double, double s) { return fl1(s); };
  out.f2.f = [fl2](double, double s) { return fl2(s); };
  out.forcing_breakpoints.clear();
  out.autonomous = true;
  return out;
}

State DiscreteField::to_state() const {
  State x;
  x.reserve(interior.size() + 2);
  x.push_back(boundary[0]);
  x.insert(x.end(), interior.begin(), interior.end());
  x.push_back(boundary[1]);
  return x;
}

DiscreteField DiscreteField::from_state(std::span<const double> x) {
  if (x.size() < 3) throw ContractViolation("DiscreteField: state too short");
  DiscreteField u;
  u.boundary = {x.front(), x.back()};
  u.interior.assign(x.begin() + 1, x.end() - 1);
  return u;
}

DiscreteField DiscreteField::constant(int N, double c) {
  DiscreteField u;
  u.interior.assign(static_cast<std::size_t>(N), c);
  u.boundary = {c, c};
  return u;
}

DiscreteField DiscreteField::sample(int N, const std::function<double(double)>& f) {
  DiscreteField u;
  const double h = 1.0 / (N + 1);
  for (int j = 1; j <= N; ++j) u.interior.push_back(f(j * h));
  u.boundary = {f(0.0), f(1.0)};
  return u;
}

double x2_norm(std::span<const double> x, const PLapConfig& cfg) {
  if (x.size() != cfg.dimension()) throw ContractViolation("x2_norm: dimension mismatch");
  double acc = 0.0;
  for (int j = 0; j <= cfg.N + 1; ++j) acc += trapezoid_weight(cfg, j) * x[j] * x[j];
  acc += x.front() * x.front() + x.back() * x.back();
  return std::sqrt(acc);
}

double x2_norm(const DiscreteField& u, const PLapConfig& cfg) {
  if (u.interior.size() != static_cast<std::size_t>(cfg.N)) throw ContractViolation("x2_norm: dimension mismatch");
  return x2_norm(u.to_state(), cfg);
}

double vp_norm(std::span<const double> x, const PLapConfig& cfg) {
  if (x.size() != cfg.dimension()) throw ContractViolation("vp_norm: dimension mismatch");
  const double h = cfg.h();
  double acc = 0.0;
  for (int j = 0; j <= cfg.N; ++j) acc += h * std::pow(std::abs((x[j + 1] - x[j]) / h), cfg.p);
  acc += std::pow(x2_norm(x, cfg), cfg.p);
  return std::pow(acc, 1.0 / cfg.p);
}

double plap_flux(double w, double p, double eps) { return std::pow(w * w + eps, 0.5 * (p - 2.0)) * w; }

void plap_rhs(std::span<const double> x, double t, const PLapConfig& cfg, double eps, std::span<double> out) {
  const int n = cfg.N;
  if (x.size() != cfg.dimension() || out.size() != cfg.dimension())
    throw ContractViolation("plap_rhs: dimension mismatch");
  const double h = cfg.h();
  double left = plap_flux((x[1] - x[0]) / h, cfg.p, eps);
  out[0] = left - cfg.f2.f(t, x[0]) + cfg.g2(t, 0.0);
  for (int j = 1; j <= n; ++j) {
    const double right = plap_flux((x[j + 1] - x[j]) / h, cfg.p, eps);
    out[j] = (right - left) / h - cfg.f1.f(t, x[j]) + cfg.g1(t, j * h);
    left = right;
  }
  out[n + 1] = -left - cfg.f2.f(t, x[n + 1]) + cfg.g2(t, 1.0);
}

DiscreteField plap_rhs(const DiscreteField& u, double t, const PLapConfig& cfg) {
  const State x = u.to_state();
  State out(x.size());
  plap_rhs(x, t, cfg, cfg.eps_reg, out);
  return DiscreteField::from_state(out);
}

void plap_step(std::span<const double> x, double t, double dt, const PLapConfig& cfg, double eps,
               std::span<double> out) {
  if (!(dt > 0.0)) throw ContractViolation("plap_step: dt must be positive");
  const int n = cfg.N;
  const std::size_t dim = cfg.dimension();
  if (x.size() != dim || out.size() != dim) throw ContractViolation("plap_step: dimension mismatch");
  const double h = cfg.h();
  const double e = 0.5 * (cfg.p - 2.0);

  std::vector<double> kappa(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    const double w = (x[j + 1] - x[j]) / h;
    kappa[j] = std::pow(w * w + eps, e);
  }

  std::vector<double> sub(dim, 0.0), diag(dim), sup(dim, 0.0), rhs(dim);
  const double bh = dt / h;
  const double ih = dt / (h * h);
  diag[0] = 1.0 + bh * kappa[0];
  sup[0] = -bh * kappa[0];
  rhs[0] = x[0] + dt * (-cfg.f2.f(t, x[0]) + cfg.g2(t, 0.0));
  for (int j = 1; j <= n; ++j) {
    sub[j] = -ih * kappa[j - 1];
    sup[j] = -ih * kappa[j];
    diag[j] = 1.0 + ih * (kappa[j - 1] + kappa[j]);
    rhs[j] = x[j] + dt * (-cfg.f1.f(t, x[j]) + cfg.g1(t, j * h));
  }
  diag[n + 1] = 1.0 + bh * kappa[n];
  sub[n + 1] = -bh * kappa[n];
  rhs[n + 1] = x[n + 1] + dt * (-cfg.f2.f(t, x[n + 1]) + cfg.g2(t, 1.0));
  thomas(sub, diag, sup, rhs, out);
}

DiscreteField plap_step(const DiscreteField& u, double t, double dt, const PLapConfig& cfg) {
  const State x = u.to_state();
  State out(x.size());
  plap_step(x, t, dt, cfg, cfg.eps_reg, out);
  return DiscreteField::from_state(out);
}

ProcessModel make_plap_model(const PLapConfig& cfg) {
  cfg.validate();
  ProcessModel m;
  std::ostringstream id;
  id.precision(17);
  id << "plap:p=" << cfg.p << ",r=" << cfg.r << ",N=" << cfg.N << ",theta=" << cfg.theta << ",dt=" << cfg.dt
     << (cfg.use_variants ? ",variants" : ",eps=");
  if (!cfg.use_variants) id << cfg.eps_reg;
  if (cfg.autonomous) id << ",frozen";
  m.id = id.str();
  m.dimension = cfg.dimension();
  m.metric = cfg.metric();
  m.dt = cfg.dt;
  m.theta = cfg.theta;
  m.autonomous = cfg.autonomous;
  m.scheme = Scheme::semi_implicit_euler;
  const std::size_t n_eps = cfg.eps_variants.size();
  m.selection = cfg.use_variants ? SelectionSpace::variants(static_cast<int>(2 * n_eps)) : SelectionSpace::single();
  m.rhs = [cfg](double t, std::span<const double> x, double, std::span<double> out) {
    plap_rhs(x, t, cfg, cfg.eps_reg, out);
  };
  m.stepper = [cfg, n_eps](double t, double dt, double u, std::span<const double> x, std::span<double> out) {
    double eps = cfg.eps_reg;
    int substeps = 1;
    if (cfg.use_variants) {
      const auto v = static_cast<std::size_t>(std::max(0.0, u));
      eps = cfg.eps_variants[v % n_eps];
      substeps = v / n_eps == 0 ? 1 : 2;
    }
    if (substeps == 1) {
      plap_step(x, t, dt, cfg, eps, out);
      return;
    }
    State mid(x.size());
    plap_step(x, t, 0.5 * dt, cfg, eps, mid);
    plap_step(mid, t + 0.5 * dt, 0.5 * dt, cfg, eps, out);
  };
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------

DissipativityReport dissipativity_check(const PLapConfig& cfg, const std::vector<double>& t_grid,
                                        const std::vector<double>& s_grid) {
  if (t_grid.empty() || s_grid.empty()) throw ContractViolation("dissipativity_check: grids must be nonempty");
  DissipativityReport rep;
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  rep.worst_growth_margin = std::numeric_limits<double>::infinity();
  double worst_scaled = std::numeric_limits<double>::infinity();
  bool ok = true;
  int component = 1;
  for (const Nonlinearity* nl : {&cfg.f1, &cfg.f2}) {
    for (double t : t_grid) {
      const double a = nl->a(t), k = nl->k(t), c = nl->C(t);
      if (a < cfg.a0 || k < 0.0) ok = false;
      for (double s : s_grid) {
        const double f = nl->f(t, s);
        const double lower_rhs = a * std::pow(std::abs(s), nl->r) - k;
        const double lower = f * s - lower_rhs;
        const double growth_rhs = c * (std::pow(std::abs(s), nl->r - 1.0) + 1.0);
        const double growth = growth_rhs - std::abs(f);
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, lower);
        rep.worst_growth_margin = std::min(rep.worst_growth_margin, growth);
        // round-off allowance relative to the size of the compared terms
        const double slack_l = 1e-12 * (1.0 + std::abs(f * s) + std::abs(lower_rhs));
        const double slack_g = 1e-12 * (1.0 + std::abs(f) + std::abs(growth_rhs));
        if (lower < -slack_l || growth < -slack_g) ok = false;
        const double scaled = std::min(lower + slack_l, growth + slack_g);
        if (scaled < worst_scaled) {
          worst_scaled = scaled;
          rep.witness_component = component;
          rep.witness_t = t;
          rep.witness_s = s;
        }
      }
    }
    ++component;
  }
  rep.passed = ok;
  return rep;
}

double omega_power(const std::function<double(double x)>& v, const PLapConfig& cfg, double q) {
  double acc = 0.0;
  for (int j = 0; j <= cfg.N + 1; ++j) acc += trapezoid_weight(cfg, j) * std::pow(std::abs(v(cfg.node(j))), q);
  return acc;
}

double gamma_power(const std::function<double(double x)>& v, double q) {
  return std::pow(std::abs(v(0.0)), q) + std::pow(std::abs(v(1.0)), q);
}

QuadratureResult assumption_a_tail(const PLapConfig& cfg, double tau) {
  const double q = 2.0 * cfg.r - 2.0;
  QuadratureOptions opts;
  opts.breakpoints = cfg.forcing_breakpoints;
  return integrate_to_infinity(
      [&](double s) {
        return difference_power_omega(cfg.g1, cfg.g1_limit, s, cfg, q) +
               difference_power_gamma(cfg.g2, cfg.g2_limit, s, q);
      },
      tau, opts);
}

AssumptionBReport assumption_b_sup(const PLapConfig& cfg, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ContractViolation("assumption_b_sup: grid must be nonempty");
  QuadratureOptions opts;
  opts.breakpoints = cfg.forcing_breakpoints;
  const double th = cfg.theta;
  const double rm1 = cfg.r - 1.0;
  auto eval = [&](double t, double& v41, double& v42) {
    const auto a = integrate_from_minus_infinity(
        [&](double s) { return std::exp(th * (s - t)) * (cfg.f1.k(s) + cfg.f2.k(s)); }, t, opts);
    const auto b = integrate_from_minus_infinity(
        [&](double s) { return std::exp(th * (s - t)) * (std::pow(cfg.f1.k(s), rm1) + std::pow(cfg.f2.k(s), rm1)); },
        t, opts);
    v41 = a.value;
    v42 = b.value;
    return !(a.diverged || b.diverged);
  };

  AssumptionBReport rep;
  rep.t_grid = t_grid;
  rep.finite = true;
  for (double t : t_grid) {
    double v41 = 0, v42 = 0;
    const bool ok = eval(t, v41, v42);
    rep.h41.push_back(v41);
    rep.h42.push_back(v42);
    rep.diverged.push_back(!ok);
    rep.finite = rep.finite && ok && std::isfinite(v41) && std::isfinite(v42);
  }
  rep.sup_h41 = *std::max_element(rep.h41.begin(), rep.h41.end());
  rep.sup_h42 = *std::max_element(rep.h42.begin(), rep.h42.end());

  const auto [lo, hi] = std::minmax_element(t_grid.begin(), t_grid.end());
  const double first = *lo, last = *hi;
  double ext41 = rep.sup_h41, ext42 = rep.sup_h42;
  bool ext_ok = true;
  for (double t : t_grid) {
    for (double te : {last + (t - first), first - (last - t)}) {
      double v41 = 0, v42 = 0;
      ext_ok = eval(te, v41, v42) && ext_ok;
      ext41 = std::max(ext41, v41);
      ext42 = std::max(ext42, v42);
    }
  }
  rep.bounded_on_extension = ext_ok && ext41 <= 1.01 * rep.sup_h41 + 1e-12 && ext42 <= 1.01 * rep.sup_h42 + 1e-12;
  return rep;
}

RadiusValue absorbing_radius(const PLapConfig& cfg, double t) {
  const double q = 2.0 * cfg.r - 2.0;
  const double th = cfg.theta;
  const double top = t + 1.0;
  QuadratureOptions opts;
  opts.breakpoints = cfg.forcing_breakpoints;
  const auto high = integrate_from_minus_infinity(
      [&](double s) {
        return std::exp(th * (s - top)) *
               (omega_power([&](double x) { return cfg.g1(s, x); }, cfg, q) +
                gamma_power([&](double x) { return cfg.g2(s, x); }, q));
      },
      top, opts);
  const auto low = integrate_from_minus_infinity(
      [&](double s) {
        return std::exp(th * (s - top)) *
               (omega_power([&](double x) { return cfg.g1(s, x); }, cfg, 2.0) +
                gamma_power([&](double x) { return cfg.g2(s, x); }, 2.0));
      },
      top, opts);
  RadiusValue out;
  out.diverged = high.diverged || low.diverged;
  out.value = std::pow(cfg.C0 + cfg.C * (high.value + std::exp(th) * low.value), 1.0 / cfg.p);
  return out;
}

RadiusSup absorbing_radius_sup(const PLapConfig& cfg, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ContractViolation("absorbing_radius_sup: grid must be nonempty");
  RadiusSup out;
  for (double t : t_grid) {
    const auto r = absorbing_radius(cfg, t);
    out.values.push_back(r.value);
    out.diverged = out.diverged || r.diverged || !std::isfinite(r.value);
    out.sup = std::max(out.sup, r.value);
  }
  return out;
}

AssumptionCReport assumption_c_check(const PLapConfig& cfg, const std::function<double(double, double)>& alpha,
                                     const std::vector<TrajectoryPair>& pairs) {
  AssumptionCReport rep;
  rep.passed = true;
  rep.improving = true;
  const int n = cfg.N;
  for (const auto& pair : pairs) {
    if (pair.u.dimension() != cfg.dimension() || pair.v.dimension() != cfg.dimension())
      throw ContractViolation("assumption_c_check: trajectory dimension mismatch");
    const std::size_t m = std::min(pair.u.size(), pair.v.size());
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double t = pair.v.time(i);
      const auto u = pair.u.state(i);
      const auto v = pair.v.state(i);
      double omega = 0.0;
      for (int j = 0; j <= n + 1; ++j)
        omega += trapezoid_weight(cfg, j) * (cfg.f1.f(t + pair.tau, u[j]) - cfg.f1_limit(v[j])) * (u[j] - v[j]);
      double gamma = 0.0;
      for (std::size_t b : {std::size_t{0}, static_cast<std::size_t>(n + 1)})
        gamma += (cfg.f2.f(t + pair.tau, u[b]) - cfg.f2_limit(v[b])) * (u[b] - v[b]);
      const double a = alpha(pair.tau, t);
      worst = std::min({worst, omega + a, gamma + a});
    }
    if (worst < -1e-12) rep.passed = false;
    if (!rep.worst_margin.empty() && worst < rep.worst_margin.back() - 1e-12) rep.improving = false;
    rep.taus.push_back(pair.tau);
    rep.worst_margin.push_back(worst);
  }
  return rep;
}

QuadratureResult forcing_l2_tail(const PLapConfig& cfg, double tau, double c) {
  QuadratureOptions opts;
  for (double b : cfg.forcing_breakpoints) opts.breakpoints.push_back(b - tau);
  return integrate_to_infinity(
      [&](double s) {
        return std::exp(-c * s) * (difference_power_omega(cfg.g1, cfg.g1_limit, s + tau, cfg, 2.0) +
                                   difference_power_gamma(cfg.g2, cfg.g2_limit, s + tau, 2.0));
      },
      0.0, opts);
}

ConvergenceTable gronwall_bound(const PLapConfig& cfg, const Trajectory& u, const Trajectory& v, double tau,
                                double c, double alpha_sup) {
  if (!(c > 0.0)) throw ContractViolation("gronwall_bound: c must be positive");
  if (u.dimension() != cfg.dimension() || v.dimension() != cfg.dimension())
    throw ContractViolation("gronwall_bound: trajectory dimension mismatch");
  const std::size_t m = std::min(u.size(), v.size());
  const auto tail = forcing_l2_tail(cfg, tau, c);

  State diff(cfg.dimension());
  auto gap = [&](std::size_t i) {
    const auto a = u.state(i);
    const auto b = v.state(i);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = a[k] - b[k];
    return x2_norm(diff, cfg);
  };
  const double w0 = gap(0);

  ConvergenceTable table;
  std::ostringstream name;
  name.precision(17);
  name << "gronwall_tau_" << tau;
  table.name = name.str();
  table.abscissa_name = "t";
  table.value_name = "measured";
  table.tol = 0.0;
  Column bound{"bound", {}};
  table.verdict = !tail.diverged;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = v.time(i) - v.start_time();
    const double measured = gap(i);
    const double b = std::sqrt(std::exp(c * t) * (w0 * w0 + 4.0 * t / c * alpha_sup + tail.value));
    table.abscissae.push_back(t);
    table.distances.push_back(measured);
    bound.values.push_back(b);
    if (measured > b * (1.0 + 1e-12) + 1e-15) table.verdict = false;
  }
  table.extra.push_back(std::move(bound));
  table.summary.emplace_back("tau", tau);
  table.summary.emplace_back("initial_gap", w0);
  table.summary.emplace_back("forcing_tail", tail.value);
  table.validate();
  return table;
}

}  // namespace spa
