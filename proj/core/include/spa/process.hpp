#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spa/metric.hpp"

namespace spa {

// ---------------------------------------------------------------------------
// Selections
//
// A multivalued process is made executable by an explicit selection input u:
// the solution set through (tau, z) is the set of trajectories over all
// admissible selection functions t -> u(t).
// ---------------------------------------------------------------------------

enum class SelectionKind {
  singleton,  ///< unique dynamics; u is ignored
  interval,   ///< u(t) in [lower, upper] (differential inclusion)
  variants,   ///< u(t) in {0, ..., variant_count-1} (solver-variant family)
};

struct SelectionSpace {
  SelectionKind kind = SelectionKind::singleton;
  double lower = 0.0;
  double upper = 0.0;
  int variant_count = 1;

  static SelectionSpace single() { return {}; }
  static SelectionSpace interval(double lower, double upper);
  static SelectionSpace variants(int count);

  bool multivalued() const noexcept;
};

enum class SelectionStrategy {
  constant,                   ///< u fixed for all t (pinned level, or drawn from the seed)
  piecewise_constant_random,  ///< fresh seeded draw on every switch period
  extremal,                   ///< u pinned to the upper bound for odd seeds, lower for even
};

struct SelectionRule {
  std::uint64_t seed = 0;
  SelectionStrategy strategy = SelectionStrategy::constant;
  double switch_period = 0.5;
  std::optional<double> level;

  static SelectionRule pinned(double level) {
    SelectionRule r;
    r.level = level;
    return r;
  }
  static SelectionRule extremal(bool upper) {
    SelectionRule r;
    r.strategy = SelectionStrategy::extremal;
    r.seed = upper ? 1 : 0;
    return r;
  }

  bool operator==(const SelectionRule&) const = default;
};

/// Value of the selection at absolute time t. Piecewise rules switch on the
/// absolute grid floor(t / switch_period), so a rule restricted to a later
/// start time is the same function of time.
double selection_value(const SelectionSpace& space, const SelectionRule& rule, double t);

struct SelectionSegment {
  double from;  ///< rule is active for t > from
  SelectionRule rule;

  bool operator==(const SelectionSegment&) const = default;
};

/// Piecewise selection: what a concatenated trajectory carries.
class SelectionSchedule {
 public:
  SelectionSchedule();
  explicit SelectionSchedule(SelectionRule rule);

  const SelectionRule& rule_at(double t) const;
  /// This schedule on t <= s, `after` on t > s.
  SelectionSchedule spliced(double s, const SelectionSchedule& after) const;
  const std::vector<SelectionSegment>& segments() const noexcept { return segments_; }

  bool operator==(const SelectionSchedule&) const = default;

 private:
  std::vector<SelectionSegment> segments_;
};

/// Selection for member `index` of an ensemble of `count`: members 0 and 1
/// are the extremal selections, odd members are constants stratified over
/// the selection space, even members switch randomly every `switch_period`.
SelectionRule ensemble_rule(const SelectionSpace& space, std::uint64_t seed, std::size_t index,
                            std::size_t count, double switch_period = 0.5);

/// Finite candidate set used by orbit searches: evenly spaced pinned levels
/// (including both bounds) for intervals, every variant for variant spaces.
std::vector<SelectionRule> candidate_selections(const SelectionSpace& space, std::size_t levels = 17);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

using VectorField =
    std::function<void(double t, std::span<const double> x, double u, std::span<double> dxdt)>;
using Stepper = std::function<void(double t, double dt, double u, std::span<const double> x,
                                   std::span<double> out)>;

enum class Scheme { rk4, semi_implicit_euler };

struct ProcessModel {
  std::string id;
  std::size_t dimension = 1;
  VectorField rhs;  ///< used by rk4
  Stepper stepper;  ///< used by semi_implicit_euler
  SelectionSpace selection;
  MetricDescriptor metric = MetricDescriptor::euclidean(1);
  double dt = 1e-3;
  Scheme scheme = Scheme::rk4;
  bool autonomous = false;
  /// Rate of the tempered family the model's pullback sampler must respect.
  double theta = 1.0;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

class Trajectory {
 public:
  Trajectory(double start_time, double dt, std::size_t dimension, SelectionSchedule selection);

  double start_time() const noexcept { return start_time_; }
  double end_time() const noexcept { return times_.back(); }
  double dt() const noexcept { return dt_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  std::span<const double> state(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }
  State state_copy(std::size_t i) const {
    auto s = state(i);
    return State(s.begin(), s.end());
  }
  std::span<const double> back() const { return state(size() - 1); }
  const SelectionSchedule& selection() const noexcept { return selection_; }

  /// Grid index of time t (within tol), if any.
  std::optional<std::size_t> index_of(double t, double tol = 1e-9) const;

  void push(double t, std::span<const double> x);
  void set_selection(SelectionSchedule s) { selection_ = std::move(s); }

 private:
  double start_time_;
  double dt_;
  std::size_t dimension_;
  std::vector<double> times_;
  std::vector<double> data_;
  SelectionSchedule selection_;
};

/// Orbit on a bounded window standing in for a complete orbit psi: R -> X.
struct CompleteOrbit {
  Trajectory path;
  double t_min = 0.0;
  double t_max = 0.0;
  /// Largest distance between a segment's endpoint and the next segment's start.
  double max_junction_gap = 0.0;
};

/// Number of uniform steps used to cover [tau, t_end] with the model step.
std::size_t step_count(double span, double dt);

/// One step of the model's scheme from (t, x) with the selection held fixed.
void step_once(const ProcessModel& model, double t, double dt, double u, std::span<const double> x,
               std::span<double> out);

Trajectory solve(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
                 const SelectionSchedule& selection);
Trajectory solve(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
                 const SelectionRule& selection = {});

/// Endpoint of `solve` without storing the path (bitwise identical to it).
State advance(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
              const SelectionSchedule& selection);
State advance(const ProcessModel& model, double tau, std::span<const double> z, double t_end,
              const SelectionRule& selection = {});

/// Restriction to [tau + s, end]. s must be a multiple of the step.
Trajectory translate(const Trajectory& tr, double s);

/// phi on [tau, s], psi on (s, end]. Requires d(phi(s), psi(s)) <= junction_tol.
Trajectory concatenate(const MetricDescriptor& metric, const Trajectory& phi, const Trajectory& psi,
                       double s, double junction_tol = 1e-9);

std::vector<Trajectory> sample_solution_set(const ProcessModel& model, double tau,
                                            std::span<const double> z, double t_end, std::size_t n,
                                            std::uint64_t seed, double switch_period = 0.5);

/// Largest one-step residual: each stored step re-integrated from the
/// previous stored state with the recorded selection.
double reintegration_residual(const ProcessModel& model, const Trajectory& tr);

struct LuusReport {
  bool passed = false;
  std::vector<std::size_t> selected_indices;
  double sup_deviation = 0.0;
  std::vector<double> deviations;  ///< sup-in-time deviation per sequence member
  double bound = 0.0;              ///< tol + lipschitz * max_j d(z_j, z)
};

/// Empirical LUUS check: trajectories from z_j (same selection) against the
/// trajectory from z, uniformly on [tau, tau + horizon]. Members within
/// tol + lipschitz * d(z_j, z) form the reported subsequence.
LuusReport luus_check(const ProcessModel& model, double tau, const std::vector<State>& z_seq,
                      std::span<const double> z, double horizon, double tol,
                      const SelectionRule& selection = {}, double lipschitz = 1.0);

/// Greedy backward matching through a family of sections on `grid`.
/// Starting from x in (near) the section at tau, each earlier grid time is
/// searched for a section point and candidate selection whose image at the
/// later grid time is nearest to the current point (lowest index on ties).
CompleteOrbit extend_backward(const ProcessModel& model, double tau, std::span<const double> x,
                              std::span<const double> grid, std::span<const SetCloud> sections,
                              double depth, double tol);

}  // namespace spa
