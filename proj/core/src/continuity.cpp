#include "spa/continuity.hpp"

#include <algorithm>
#include <cmath>

#include "spa/errors.hpp"

namespace spa {

namespace {

SetCloud section_at(const ProcessModel& model, const AttractorFamily& family, double t) {
  if (auto i = family.index_of(t)) return family.sections[*i];
  return pullback_section(model, t, family.config).cloud;
}

void add_proxy(ConvergenceTable& table, const CompactnessProxy& p) {
  table.summary.emplace_back("proxy_diameter", p.diameter);
  table.summary.emplace_back("proxy_radius_early", p.radius_early);
  table.summary.emplace_back("proxy_radius_late", p.radius_late);
  table.summary.emplace_back("proxy_refinement_gap", p.refinement_gap);
  table.summary.emplace_back("proxy_bounded", p.bounded ? 1.0 : 0.0);
  table.summary.emplace_back("proxy_stable", p.stable ? 1.0 : 0.0);
  table.summary.emplace_back("proxy_passed", p.passed ? 1.0 : 0.0);
}

ConvergenceTable distance_table(const AttractorFamily& family, const SetCloud& target, double tol,
                                bool forward, const char* name) {
  ConvergenceTable table;
  table.name = name;
  table.abscissa_name = "t";
  table.value_name = "semidist";
  table.tol = tol;
  const std::size_t n = family.grid.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = forward ? k : n - 1 - k;
    table.abscissae.push_back(family.grid[i]);
    table.distances.push_back(semidist(family.sections[i], target));
  }
  const auto proxy = compactness_proxy(family, forward ? Tail::forward : Tail::backward);
  add_proxy(table, proxy);
  table.verdict = eventually_below(table.distances, tol) && proxy.passed;
  table.validate();
  return table;
}

}  // namespace

ConvergenceTable continuity_modulus(const ProcessModel& model, const AttractorFamily& family, double t,
                                    const std::vector<double>& deltas, std::optional<double> slope_bound) {
  if (deltas.empty()) throw ContractViolation("continuity_modulus: deltas must be nonempty");
  std::vector<double> mags = deltas;
  for (double d : mags) {
    if (!(d > 0.0)) throw ContractViolation("continuity_modulus: deltas must be positive");
    if (t - d < family.grid.front() - 1e-9 || t + d > family.grid.back() + 1e-9)
      throw ContractViolation("continuity_modulus: t +- delta leaves the family's grid range");
  }
  std::sort(mags.begin(), mags.end());
  mags.erase(std::unique(mags.begin(), mags.end()), mags.end());

  std::vector<double> offsets;
  for (auto it = mags.rbegin(); it != mags.rend(); ++it) offsets.push_back(-*it);
  for (double d : mags) offsets.push_back(d);

  const SetCloud centre = section_at(model, family, t);
  ConvergenceTable table;
  table.name = "continuity";
  table.abscissa_name = "delta";
  table.value_name = "hausdorff";
  for (double off : offsets) {
    table.abscissae.push_back(off);
    table.distances.push_back(hausdorff(section_at(model, family, t + off), centre));
  }

  const double slack = 2.0 * family.config.section_tol;
  double slope = 0.0;
  if (slope_bound) {
    slope = *slope_bound;
  } else {
    slope = std::max(table.distances.front(), table.distances.back()) / mags.back();
  }
  table.rate = slope;
  table.tol = slack;
  table.verdict = true;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    if (table.distances[i] > slope * std::abs(offsets[i]) + slack) table.verdict = false;

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    num += std::abs(offsets[i]) * table.distances[i];
    den += offsets[i] * offsets[i];
  }
  table.summary.emplace_back("t", t);
  table.summary.emplace_back("slope_used", slope);
  table.summary.emplace_back("lsq_slope", num / den);
  table.validate();
  return table;
}

ConvergenceTable forward_convergence(const AttractorFamily& family, const SetCloud& limit, std::optional<double> tol) {
  return distance_table(family, limit, tol.value_or(2.0 * family.config.section_tol), true, "forward_convergence");
}

ConvergenceTable backward_convergence(const AttractorFamily& family, const SetCloud& limit, std::optional<double> tol) {
  return distance_table(family, limit, tol.value_or(2.0 * family.config.section_tol), false, "backward_convergence");
}

ConvergenceTable autonomous_tracking(const AttractorFamily& family, const SetCloud& a_inf, std::optional<double> tol) {
  return distance_table(family, a_inf, tol.value_or(2.0 * family.config.section_tol), true, "autonomous_tracking");
}

ConvergenceTable backward_autonomous_tracking(const AttractorFamily& family, const SetCloud& a_inf,
                                              std::optional<double> tol) {
  return distance_table(family, a_inf, tol.value_or(2.0 * family.config.section_tol), false,
                        "backward_autonomous_tracking");
}

ConvergenceTable asymptotic_autonomy_check(const ProcessModel& model, const ProcessModel& autonomous_model,
                                           const AttractorFamily& family, const std::vector<double>& t_offsets,
                                           const std::vector<double>& tau_list, double tol) {
  if (!autonomous_model.autonomous)
    throw ContractViolation("asymptotic_autonomy_check: reference model must be autonomous");
  if (tau_list.empty() || t_offsets.empty())
    throw ContractViolation("asymptotic_autonomy_check: need offsets and start times");
  if (model.dimension != autonomous_model.dimension)
    throw ContractViolation("asymptotic_autonomy_check: model dimensions differ");
  std::vector<double> offsets = t_offsets;
  std::sort(offsets.begin(), offsets.end());
  if (offsets.front() < 0.0) throw ContractViolation("asymptotic_autonomy_check: offsets must be >= 0");
  const double span = offsets.back();

  // matched chain through the sections
  std::vector<State> chain;
  for (double tau : tau_list) {
    const SetCloud sec = section_at(model, family, tau);
    if (chain.empty()) {
      chain.push_back(sec[0]);
      continue;
    }
    std::size_t best = 0;
    double best_d = model.metric.distance(sec[0], chain.back());
    for (std::size_t j = 1; j < sec.size(); ++j) {
      const double d = model.metric.distance(sec[j], chain.back());
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    chain.push_back(sec[best]);
  }

  ConvergenceTable table;
  table.name = "asymptotic_autonomy";
  table.abscissa_name = "tau";
  table.value_name = "max_deviation";
  table.tol = tol;
  Column initial_gap{"initial_gap", {}};
  for (std::size_t k = 0; k < tau_list.size(); ++k) {
    const double tau = tau_list[k];
    const State& x = chain[k];
    double dev = 0.0;
    if (span > 0.0) {
      const Trajectory u = solve(model, tau, x, tau + span);
      const Trajectory v = solve(autonomous_model, 0.0, x, span);
      for (double off : offsets) {
        const auto iu = u.index_of(tau + off, 1e-6);
        const auto iv = v.index_of(off, 1e-6);
        const State a = iu ? u.state_copy(*iu) : advance(model, tau, x, tau + off);
        const State b = iv ? v.state_copy(*iv) : advance(autonomous_model, 0.0, x, off);
        dev = std::max(dev, model.metric.distance(a, b));
      }
    }
    table.abscissae.push_back(tau);
    table.distances.push_back(dev);
    initial_gap.values.push_back(model.metric.distance(x, chain.back()));
  }
  table.extra.push_back(std::move(initial_gap));
  table.verdict = eventually_below(table.distances, tol);
  table.rate = fit_decay_rate(table.abscissae, table.distances);
  table.validate();
  return table;
}

}  // namespace spa
