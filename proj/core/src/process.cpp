#include "spa/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spa/errors.hpp"
#include "spa/seeding.hpp"

namespace spa {

namespace {

constexpr double kTimeTol = 1e-9;

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double interval_draw(const SelectionSpace& space, double fraction) {
  return space.lower + fraction * (space.upper - space.lower);
}

double variant_draw(const SelectionSpace& space, double fraction) {
  const int m = space.variant_count;
  return static_cast<double>(std::clamp(static_cast<int>(std::floor(fraction * m)), 0, m - 1));
}

double draw(const SelectionSpace& space, double fraction) {
  return space.kind == SelectionKind::variants ? variant_draw(space, fraction)
                                               : interval_draw(space, fraction);
}

// Scratch buffers for the RK4 stages.
struct Workspace {
  explicit Workspace(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
  std::vector<double> k1, k2, k3, k4, tmp;
};

void rk4_step(const ProcessModel& m, double t, double dt, double u, std::span<const double> x,
              std::span<double> out, Workspace& w) {
  const std::size_t n = x.size();
  m.rhs(t, x, u, w.k1);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * dt * w.k1[i];
  m.rhs(t + 0.5 * dt, w.tmp, u, w.k2);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + 0.5 * dt * w.k2[i];
  m.rhs(t + 0.5 * dt, w.tmp, u, w.k3);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + dt * w.k3[i];
  m.rhs(t + dt, w.tmp, u, w.k4);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = x[i] + dt / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
}

void step_with(const ProcessModel& m, double t, double dt, double u, std::span<const double> x,
               std::span<double> out, Workspace& w) {
  if (m.scheme == Scheme::rk4)
    rk4_step(m, t, dt, u, x, out, w);
  else
    m.stepper(t, dt, u, x, out);
}

// Shared stepping loop of solve/advance; `emit` sees every grid state.
template <typename Emit>
State integrate(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
                const SelectionSchedule& selection, Emit&& emit) {
  if (z.size() != model.dimension) throw ContractViolation("solve: initial state dimension mismatch");
  if (!(t_end >= tau)) throw ContractViolation("solve: t_end must not precede tau");
  if (!all_finite(z)) throw DivergenceError("solve: non-finite initial state", tau);

  const double span = t_end - tau;
  const std::size_t n = step_count(span, model.dt);
  const double h = n == 0 ? model.dt : span / static_cast<double>(n);

  Workspace w(model.dimension);
  State x(z.begin(), z.end());
  State next(model.dimension);
  emit(tau, x, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = tau + static_cast<double>(i) * h;
    const double mid = t + 0.5 * h;
    const double u = selection_value(model.selection, selection.rule_at(mid), mid);
    step_with(model, t, h, u, x, next, w);
    if (!all_finite(next)) {
      std::ostringstream msg;
      msg << "solve: non-finite state after t=" << t << " (model " << model.id << ")";
      throw DivergenceError(msg.str(), t);
    }
    x.swap(next);
    emit(i + 1 == n ? t_end : tau + static_cast<double>(i + 1) * h, x, h);
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

SelectionSpace SelectionSpace::interval(double lower, double upper) {
  if (!(lower <= upper)) throw ContractViolation("selection interval must satisfy lower <= upper");
  SelectionSpace s;
  s.kind = SelectionKind::interval;
  s.lower = lower;
  s.upper = upper;
  return s;
}

SelectionSpace SelectionSpace::variants(int count) {
  if (count < 1) throw ContractViolation("selection variant count must be positive");
  SelectionSpace s;
  s.kind = SelectionKind::variants;
  s.variant_count = count;
  return s;
}

bool SelectionSpace::multivalued() const noexcept {
  switch (kind) {
    case SelectionKind::singleton:
      return false;
    case SelectionKind::interval:
      return upper > lower;
    case SelectionKind::variants:
      return variant_count > 1;
  }
  return false;
}

double selection_value(const SelectionSpace& space, const SelectionRule& rule, double t) {
  if (space.kind == SelectionKind::singleton) return rule.level.value_or(0.0);

  switch (rule.strategy) {
    case SelectionStrategy::constant:
      if (rule.level) {
        if (space.kind == SelectionKind::variants)
          return std::clamp(std::round(*rule.level), 0.0, static_cast<double>(space.variant_count - 1));
        return std::clamp(*rule.level, space.lower, space.upper);
      }
      return draw(space, unit_double(mix64(rule.seed)));
    case SelectionStrategy::piecewise_constant_random: {
      const double period = rule.switch_period > 0.0 ? rule.switch_period : 1.0;
      const auto k = static_cast<std::int64_t>(std::floor(t / period));
      return draw(space, unit_double(mix64(rule.seed ^ mix64(static_cast<std::uint64_t>(k)))));
    }
    case SelectionStrategy::extremal: {
      const bool upper = (rule.seed & 1U) != 0;
      if (space.kind == SelectionKind::variants) return upper ? space.variant_count - 1 : 0.0;
      return upper ? space.upper : space.lower;
    }
  }
  return 0.0;
}

SelectionSchedule::SelectionSchedule() : SelectionSchedule(SelectionRule{}) {}

SelectionSchedule::SelectionSchedule(SelectionRule rule)
    : segments_{{-std::numeric_limits<double>::infinity(), rule}} {}

const SelectionRule& SelectionSchedule::rule_at(double t) const {
  const SelectionRule* active = &segments_.front().rule;
  for (const auto& seg : segments_) {
    if (seg.from < t)
      active = &seg.rule;
    else
      break;
  }
  return *active;
}

SelectionSchedule SelectionSchedule::spliced(double s, const SelectionSchedule& after) const {
  SelectionSchedule out = *this;
  std::erase_if(out.segments_, [s](const SelectionSegment& seg) { return seg.from >= s; });
  // `after` restricted to (s, inf): its rule active at s carries over from s.
  out.segments_.push_back({s, after.rule_at(s + 0.0)});
  for (const auto& seg : after.segments_)
    if (seg.from > s) out.segments_.push_back(seg);
  if (out.segments_.front().from != -std::numeric_limits<double>::infinity())
    out.segments_.front().from = -std::numeric_limits<double>::infinity();
  return out;
}

SelectionRule ensemble_rule(const SelectionSpace& space, std::uint64_t seed, std::size_t index,
                            std::size_t count, double switch_period) {
  SelectionRule rule;
  rule.seed = seed;
  rule.switch_period = switch_period;
  if (!space.multivalued()) return rule;

  if (index == 0 || index == 1) {
    rule.strategy = SelectionStrategy::extremal;
    rule.seed = index == 0 ? (seed | 1U) : (seed & ~std::uint64_t{1});
    return rule;
  }
  if (index % 2 == 1) {
    const std::size_t strata = std::max<std::size_t>(1, (count - 2) / 2);
    const std::size_t stratum = (index - 3) / 2;
    const double fraction =
        (static_cast<double>(stratum) + unit_double(mix64(seed))) / static_cast<double>(strata);
    rule.strategy = SelectionStrategy::constant;
    rule.level = draw(space, std::min(fraction, 1.0));
    return rule;
  }
  rule.strategy = SelectionStrategy::piecewise_constant_random;
  return rule;
}

std::vector<SelectionRule> candidate_selections(const SelectionSpace& space, std::size_t levels) {
  std::vector<SelectionRule> out;
  switch (space.kind) {
    case SelectionKind::singleton:
      out.push_back(SelectionRule{});
      break;
    case SelectionKind::interval:
      if (!space.multivalued() || levels < 2) {
        out.push_back(SelectionRule::pinned(space.lower));
      } else {
        for (std::size_t i = 0; i < levels; ++i)
          out.push_back(SelectionRule::pinned(
              interval_draw(space, static_cast<double>(i) / static_cast<double>(levels - 1))));
      }
      break;
    case SelectionKind::variants:
      for (int v = 0; v < space.variant_count; ++v) out.push_back(SelectionRule::pinned(v));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

void ProcessModel::validate() const {
  if (dimension == 0) throw ContractViolation("model " + id + ": dimension must be positive");
  if (!(dt > 0.0)) throw ContractViolation("model " + id + ": dt must be positive");
  if (metric.dimension() != dimension) throw ContractViolation("model " + id + ": metric dimension mismatch");
  if (scheme == Scheme::rk4 && !rhs) throw ContractViolation("model " + id + ": rk4 scheme needs a vector field");
  if (scheme == Scheme::semi_implicit_euler && !stepper)
    throw ContractViolation("model " + id + ": semi-implicit scheme needs a stepper");
  if (selection.kind == SelectionKind::interval && !(selection.lower <= selection.upper))
    throw ContractViolation("model " + id + ": empty selection interval");
  if (selection.kind == SelectionKind::variants && selection.variant_count < 1)
    throw ContractViolation("model " + id + ": empty selection variant set");
  if (!(theta > 0.0)) throw ContractViolation("model " + id + ": theta must be positive");
}

Trajectory::Trajectory(double start_time, double dt, std::size_t dimension, SelectionSchedule selection)
    : start_time_(start_time), dt_(dt), dimension_(dimension), selection_(std::move(selection)) {}

std::optional<std::size_t> Trajectory::index_of(double t, double tol) const {
  if (times_.empty()) return std::nullopt;
  auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
  if (it != times_.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - times_.begin());
  return std::nullopt;
}

void Trajectory::push(double t, std::span<const double> x) {
  if (x.size() != dimension_) throw ContractViolation("trajectory: state dimension mismatch");
  if (!times_.empty() && !(t > times_.back()))
    throw ContractViolation("trajectory: times must be strictly increasing");
  times_.push_back(t);
  data_.insert(data_.end(), x.begin(), x.end());
}

std::size_t step_count(double span, double dt) {
  if (span <= 0.0) return 0;
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (rounded >= 1.0 && std::abs(rounded * dt - span) <= kTimeTol * std::max(1.0, span))
    return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(ratio - 1e-12));
}

void step_once(const ProcessModel& model, double t, double dt, double u, std::span<const double> x,
               std::span<double> out) {
  Workspace w(model.dimension);
  step_with(model, t, dt, u, x, out, w);
}

Trajectory solve(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
                 const SelectionSchedule& selection) {
  std::optional<Trajectory> tr;
  integrate(model, tau, z, t_end, selection, [&](double t, const State& x, double h) {
    if (!tr) tr.emplace(tau, h, model.dimension, selection);
    tr->push(t, x);
  });
  return std::move(*tr);
}

Trajectory solve(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
                 const SelectionRule& selection) {
  return solve(model, tau, z, t_end, SelectionSchedule(selection));
}

State advance(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
              const SelectionSchedule& selection) {
  return integrate(model, tau, z, t_end, selection, [](double, const State&, double) {});
}

State advance(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
              const SelectionRule& selection) {
  return advance(model, tau, z, t_end, SelectionSchedule(selection));
}

Trajectory translate(const Trajectory& tr, double s) {
  if (!(s >= 0.0)) throw ContractViolation("translate: shift must be nonnegative");
  const auto idx = tr.index_of(tr.start_time() + s, 1e-12 * std::max(1.0, std::abs(tr.start_time() + s)) + 1e-12);
  if (!idx) {
    if (tr.start_time() + s > tr.end_time() + 1e-12)
      throw ContractViolation("translate: shift beyond trajectory span");
    throw ContractViolation("translate: shift is not a multiple of the step");
  }
  Trajectory out(tr.time(*idx), tr.dt(), tr.dimension(), tr.selection());
  for (std::size_t i = *idx; i < tr.size(); ++i) out.push(tr.time(i), tr.state(i));
  return out;
}

Trajectory concatenate(const MetricDescriptor& metric, const Trajectory& phi, const Trajectory& psi,
                       double s, double junction_tol) {
  const auto i_phi = phi.index_of(s);
  const auto i_psi = psi.index_of(s);
  if (!i_phi || !i_psi) throw ContractViolation("concatenate: both trajectories must be defined at s");
  if (s < phi.start_time()) throw ContractViolation("concatenate: s precedes phi's start");
  const double gap = metric.distance(phi.state(*i_phi), psi.state(*i_psi));
  if (gap > junction_tol) {
    std::ostringstream msg;
    msg << "concatenate: junction mismatch " << gap << " exceeds " << junction_tol;
    throw ConcatenationError(msg.str(), gap);
  }
  Trajectory out(phi.start_time(), phi.dt(), phi.dimension(), phi.selection().spliced(s, psi.selection()));
  for (std::size_t i = 0; i <= *i_phi; ++i) out.push(phi.time(i), phi.state(i));
  for (std::size_t i = *i_psi + 1; i < psi.size(); ++i) out.push(psi.time(i), psi.state(i));
  return out;
}

std::vector<Trajectory> sample_solution_set(const ProcessModel& model, double tau,
                                            std::span<const double> z, double t_end, std::size_t n,
                                            std::uint64_t seed, double switch_period) {
  if (n == 0) throw ContractViolation("sample_solution_set: n must be positive");
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto rule = ensemble_rule(model.selection, derive_seed(seed, {j}), j, n, switch_period);
    out.push_back(solve(model, tau, z, t_end, rule));
  }
  return out;
}

double reintegration_residual(const ProcessModel& model, const Trajectory& tr) {
  Workspace w(model.dimension);
  State next(model.dimension);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double t = tr.time(i);
    const double h = tr.time(i + 1) - t;
    const double mid = t + 0.5 * h;
    const double u = selection_value(model.selection, tr.selection().rule_at(mid), mid);
    step_with(model, t, h, u, tr.state(i), next, w);
    worst = std::max(worst, model.metric.distance(next, tr.state(i + 1)));
  }
  return worst;
}

LuusReport luus_check(const ProcessModel& model, double tau, const std::vector<State>& z_seq,
                      std::span<const double> z, double horizon, double tol,
                      const SelectionRule& selection, double lipschitz) {
  if (z_seq.empty()) throw ContractViolation("luus_check: sequence must be nonempty");
  const Trajectory limit = solve(model, tau, z, tau + horizon, selection);

  LuusReport report;
  double max_offset = 0.0;
  for (const auto& zj : z_seq) max_offset = std::max(max_offset, model.metric.distance(zj, z));
  report.bound = tol + lipschitz * max_offset;

  for (std::size_t j = 0; j < z_seq.size(); ++j) {
    const Trajectory tr = solve(model, tau, z_seq[j], tau + horizon, selection);
    double dev = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
      dev = std::max(dev, model.metric.distance(tr.state(i), limit.state(i)));
    report.deviations.push_back(dev);
    if (dev <= tol + lipschitz * model.metric.distance(z_seq[j], z)) {
      report.selected_indices.push_back(j);
      report.sup_deviation = std::max(report.sup_deviation, dev);
    }
  }
  report.passed = !report.selected_indices.empty() &&
                  report.selected_indices.back() == z_seq.size() - 1 &&
                  report.sup_deviation <= report.bound;
  return report;
}

CompleteOrbit extend_backward(const ProcessModel& model, double tau, std::span<const double> x,
                              std::span<const double> grid, std::span<const SetCloud> sections,
                              double depth, double tol) {
  if (grid.size() != sections.size() || grid.empty())
    throw ContractViolation("extend_backward: grid and sections must match and be nonempty");
  if (!(depth > 0.0) || !(tol > 0.0)) throw ContractViolation("extend_backward: depth and tol must be positive");
  const auto it = std::find_if(grid.begin(), grid.end(), [&](double g) { return std::abs(g - tau) <= kTimeTol; });
  if (it == grid.end()) throw ContractViolation("extend_backward: tau is not a grid time");
  if (grid.front() > tau - depth + kTimeTol)
    throw ContractViolation("extend_backward: family does not cover [tau - depth, tau]");
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (sections[k].distance_to(x) > tol)
    throw ContractViolation("extend_backward: anchor point is not within tol of the section");

  const auto candidates = candidate_selections(model.selection);

  struct Link {
    std::size_t grid_index;
    State start;
    SelectionRule rule;
  };
  std::vector<Link> links;  // latest first
  State current(x.begin(), x.end());
  double max_gap = 0.0;

  while (grid[k] > tau - depth + kTimeTol) {
    const std::size_t j = k - 1;
    double best = std::numeric_limits<double>::infinity();
    const State* best_point = nullptr;
    const SelectionRule* best_rule = nullptr;
    for (const auto& p : sections[j].points()) {
      for (const auto& c : candidates) {
        const State image = advance(model, grid[j], p, grid[k], c);
        const double d = model.metric.distance(image, current);
        if (d < best) {
          best = d;
          best_point = &p;
          best_rule = &c;
        }
      }
    }
    if (!(best <= tol)) {
      std::ostringstream msg;
      msg << "extend_backward: no predecessor within " << tol << " at t=" << grid[j] << " (nearest " << best << ")";
      throw NoPredecessorError(msg.str(), grid[j]);
    }
    max_gap = std::max(max_gap, best);
    links.push_back({j, *best_point, *best_rule});
    current = *best_point;
    k = j;
  }

  std::reverse(links.begin(), links.end());
  SelectionSchedule schedule(links.front().rule);
  for (std::size_t l = 1; l < links.size(); ++l)
    schedule = schedule.spliced(grid[links[l].grid_index], SelectionSchedule(links[l].rule));

  std::optional<Trajectory> path;
  for (const auto& link : links) {
    const Trajectory seg = solve(model, grid[link.grid_index], link.start, grid[link.grid_index + 1], link.rule);
    if (!path) path.emplace(seg.start_time(), seg.dt(), model.dimension, schedule);
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) path->push(seg.time(i), seg.state(i));
  }
  path->push(tau, x);

  CompleteOrbit orbit{std::move(*path), grid[links.front().grid_index], tau, max_gap};
  return orbit;
}

}  // namespace spa
