#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spa/metric.hpp"
#include "spa/process.hpp"

namespace spa {

struct PullbackConfig {
  std::vector<double> horizons{5.0, 10.0, 20.0, 40.0};
  std::size_t ensemble_size = 16;
  /// D(s) is the ball of radius sampler_radius * (1 + |s|)^sampler_growth.
  double sampler_radius = 2.0;
  double sampler_growth = 0.0;
  double prune_tol = 1e-3;
  double section_tol = 1e-3;
  std::uint64_t seed = 1;
  double switch_period = 0.5;
  unsigned workers = 0;  ///< 0 = hardware concurrency

  double sampler_radius_at(double s) const;
  /// e^{theta s} [D(s)] -> 0 as s -> -inf: polynomial growth against theta > 0.
  bool tempered(double theta) const;
  void validate(double theta = 1.0) const;
};

struct SectionResult {
  SetCloud cloud;
  double horizon = 0.0;     ///< horizon whose cloud was returned
  double gap = 0.0;         ///< Cauchy gap to the next horizon
  std::vector<double> gaps; ///< gaps computed before stopping
};

/// Cloud obtained by evolving the sampled family D(t - h) to time t under
/// the ensemble's selections, pruned with cfg.prune_tol.
SetCloud pullback_cloud(const ProcessModel& model, double t, double horizon, const PullbackConfig& cfg,
                        unsigned workers = 1);

/// Pullback section with the Cauchy stopping rule over cfg.horizons. Throws
/// HorizonExhaustedError carrying every gap if no successive pair agrees.
SectionResult pullback_section(const ProcessModel& model, double t, const PullbackConfig& cfg);

/// Cauchy gaps hausdorff(cloud(h_k), cloud(h_{k+1})) for every pair.
std::vector<double> pullback_gaps(const ProcessModel& model, double t, const PullbackConfig& cfg);

struct AttractorFamily {
  std::string model_id;
  std::vector<double> grid;
  std::vector<SetCloud> sections;
  PullbackConfig config;
  std::vector<double> gaps;      ///< achieved Cauchy gap per section
  std::vector<double> horizons;  ///< horizon used per section

  std::optional<std::size_t> index_of(double t, double tol = 1e-9) const;
  /// Largest hausdorff distance between consecutive sections.
  double resolution() const;
};

AttractorFamily attractor_family(const ProcessModel& model, const std::vector<double>& grid,
                                 const PullbackConfig& cfg);

/// Family with prescribed sections (candidate K families, test fixtures).
AttractorFamily make_family(std::string model_id, std::vector<double> grid, std::vector<SetCloud> sections,
                            PullbackConfig cfg = {});

struct LimitResult {
  SetCloud cloud;
  std::vector<double> window_starts;  ///< first (forward) or last (backward) time of each window
  std::vector<double> gaps;           ///< hausdorff between successive window unions
  double tol = 0.0;
  bool stable = false;
};

/// A(+inf) as the pruned union over the latest tail window. Fractions give
/// the share of the grid kept in each window (need at least 3 distinct).
LimitResult forward_limit(const AttractorFamily& family, std::vector<double> tail_fractions = {1.0, 0.5, 0.25});
LimitResult backward_limit(const AttractorFamily& family, std::vector<double> tail_fractions = {1.0, 0.5, 0.25});

/// Finite-data stand-in for forward/backward compactness of a tail union.
struct CompactnessProxy {
  double diameter = 0.0;
  double radius_early = 0.0;  ///< radius of the union over the outer half of the tail
  double radius_late = 0.0;   ///< radius of the union over the inner half
  double refinement_gap = 0.0;
  bool bounded = false;
  bool stable = false;
  bool passed = false;
};

enum class Tail { forward, backward };

/// Tail = later (forward) or earlier (backward) half of the grid. Bounded:
/// radius does not grow toward the limit. Stable: the pruned union over all
/// tail sections matches the one over every other section.
CompactnessProxy compactness_proxy(const AttractorFamily& family, Tail tail);

/// Attractor of an autonomous model: ensemble from the absorbing ball run to
/// settle_time and to 2 * settle_time; the two clouds must agree within
/// section_tol (else NonSettlingError). Returns the later cloud.
SetCloud autonomous_attractor(const ProcessModel& model, double absorb_radius, double settle_time,
                              const PullbackConfig& cfg);

struct QuasiInvarianceReport {
  double fraction_certified = 0.0;
  double worst_excursion = 0.0;
  std::size_t checked = 0;
  std::size_t certified = 0;
  std::vector<CompleteOrbit> orbits;  ///< certified orbits, in check order
};

/// Every point of every section at grid times >= grid.front() + depth is
/// extended backward by `depth` and forward to grid.back() (greedy selection
/// per grid interval). Certified when both stay within tol of the sections.
QuasiInvarianceReport quasi_invariance_check(const ProcessModel& model, const AttractorFamily& family,
                                             double depth, double tol);

CompleteOrbit extend_backward(const ProcessModel& model, double tau, std::span<const double> x,
                              const AttractorFamily& family, double depth, double tol);

struct KFamilyReport {
  std::vector<double> grid;
  std::vector<double> horizons;
  std::vector<std::vector<double>> eps;  ///< eps[i][k]: time grid[i], horizon k (tau = t - h)
  double tol = 0.0;
  bool verdict = false;
};

KFamilyReport k_property_check(const ProcessModel& model, const AttractorFamily& candidate,
                               const PullbackConfig& cfg);

}  // namespace spa
