#include "spa/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spa/errors.hpp"
#include "spa/parallel.hpp"
#include "spa/seeding.hpp"

namespace spa {

namespace {

constexpr std::uint64_t kRuleSalt = 0x5e1ec7105eedULL;
constexpr std::uint64_t kAutonomousSalt = 0xa070c0ULL;

State sample_ball(const MetricDescriptor& metric, double radius, Sampler& rng) {
  const std::size_t d = metric.dimension();
  if (d == 1) return {rng.uniform(-radius, radius)};
  State x(d);
  double n = 0.0;
  while (!(n > 0.0)) {
    for (auto& v : x) v = rng.normal();
    n = metric.norm(x);
  }
  const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / n;
  for (auto& v : x) v *= scale;
  return x;
}

SetCloud union_of(const std::vector<SetCloud>& sections, std::size_t first, std::size_t last,
                  std::size_t stride = 1) {
  std::vector<State> pts;
  for (std::size_t i = first; i < last; i += stride)
    pts.insert(pts.end(), sections[i].points().begin(), sections[i].points().end());
  return SetCloud(std::move(pts), sections[first].metric());
}

double resolution_of(const std::vector<SetCloud>& sections, std::size_t first, std::size_t last) {
  double r = 0.0;
  for (std::size_t i = first; i + 1 < last; ++i) r = std::max(r, hausdorff(sections[i], sections[i + 1]));
  return r;
}

std::vector<std::size_t> window_sizes(std::size_t n, std::vector<double> fractions) {
  std::sort(fractions.begin(), fractions.end(), std::greater<>());
  std::vector<std::size_t> sizes;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ContractViolation("tail fractions must lie in (0, 1]");
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9)));
    if (sizes.empty() || sizes.back() != m) sizes.push_back(m);
  }
  if (sizes.size() < 3) throw ContractViolation("limit needs at least 3 distinct tail windows");
  return sizes;
}

LimitResult tail_limit(const AttractorFamily& family, const std::vector<double>& fractions, bool forward) {
  const std::size_t n = family.sections.size();
  const auto sizes = window_sizes(n, fractions);
  LimitResult out{family.sections.front(), {}, {}, family.config.section_tol + family.resolution(), true};
  std::optional<SetCloud> previous;
  for (std::size_t m : sizes) {
    const std::size_t first = forward ? n - m : 0;
    const std::size_t last = forward ? n : m;
    SetCloud cloud = prune(union_of(family.sections, first, last), family.config.prune_tol);
    out.window_starts.push_back(forward ? family.grid[first] : family.grid[last - 1]);
    if (previous) out.gaps.push_back(hausdorff(*previous, cloud));
    previous = std::move(cloud);
  }
  out.cloud = std::move(*previous);
  out.stable = std::all_of(out.gaps.begin(), out.gaps.end(), [&](double g) { return g <= out.tol; });
  return out;
}

}  // namespace

double PullbackConfig::sampler_radius_at(double s) const {
  return sampler_radius * std::pow(1.0 + std::abs(s), sampler_growth);
}

bool PullbackConfig::tempered(double theta) const {
  return theta > 0.0 && std::isfinite(sampler_growth) && std::isfinite(sampler_radius);
}

void PullbackConfig::validate(double theta) const {
  if (horizons.size() < 2) throw ContractViolation("pullback: need at least two horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw ContractViolation("pullback: horizons must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) throw ContractViolation("pullback: horizons must increase");
  }
  if (ensemble_size == 0) throw ContractViolation("pullback: ensemble_size must be positive");
  if (!(sampler_radius >= 0.0)) throw ContractViolation("pullback: sampler radius must be nonnegative");
  if (!(prune_tol > 0.0)) throw ContractViolation("pullback: prune_tol must be positive");
  if (!(section_tol > 0.0)) throw ContractViolation("pullback: section_tol must be positive");
  if (!(switch_period > 0.0)) throw ContractViolation("pullback: switch_period must be positive");
  if (!tempered(theta)) throw ContractViolation("pullback: sampled family is not tempered");
}

SetCloud pullback_cloud(const ProcessModel& model, double t, double horizon, const PullbackConfig& cfg,
                        unsigned workers) {
  const double tau = t - horizon;
  const double radius = cfg.sampler_radius_at(tau);
  const std::uint64_t model_hash = fnv1a(model.id);
  std::vector<State> ends(cfg.ensemble_size);
  parallel_for(
      cfg.ensemble_size,
      [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, {model_hash, double_bits(t), double_bits(horizon), i});
        Sampler rng(seed);
        const State z = sample_ball(model.metric, radius, rng);
        const auto rule = ensemble_rule(model.selection, mix64(seed ^ kRuleSalt), i, cfg.ensemble_size,
                                        cfg.switch_period);
        ends[i] = advance(model, tau, z, t, rule);
      },
      workers);
  return prune(SetCloud(std::move(ends), model.metric), cfg.prune_tol);
}

SectionResult pullback_section(const ProcessModel& model, double t, const PullbackConfig& cfg) {
  cfg.validate(model.theta);
  std::vector<double> gaps;
  SetCloud current = pullback_cloud(model, t, cfg.horizons[0], cfg, cfg.workers);
  for (std::size_t k = 0; k + 1 < cfg.horizons.size(); ++k) {
    SetCloud next = pullback_cloud(model, t, cfg.horizons[k + 1], cfg, cfg.workers);
    const double gap = hausdorff(current, next);
    gaps.push_back(gap);
    if (gap < cfg.section_tol) return {std::move(current), cfg.horizons[k], gap, std::move(gaps)};
    current = std::move(next);
  }
  std::ostringstream msg;
  msg << "pullback at t=" << t << " for " << model.id << " did not settle; gaps:";
  for (double g : gaps) msg << ' ' << g;
  throw HorizonExhaustedError(msg.str(), std::move(gaps));
}

std::vector<double> pullback_gaps(const ProcessModel& model, double t, const PullbackConfig& cfg) {
  cfg.validate(model.theta);
  std::vector<double> gaps;
  SetCloud current = pullback_cloud(model, t, cfg.horizons[0], cfg, cfg.workers);
  for (std::size_t k = 1; k < cfg.horizons.size(); ++k) {
    SetCloud next = pullback_cloud(model, t, cfg.horizons[k], cfg, cfg.workers);
    gaps.push_back(hausdorff(current, next));
    current = std::move(next);
  }
  return gaps;
}

std::optional<std::size_t> AttractorFamily::index_of(double t, double tol) const {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - t) <= tol) return i;
  return std::nullopt;
}

double AttractorFamily::resolution() const { return resolution_of(sections, 0, sections.size()); }

AttractorFamily attractor_family(const ProcessModel& model, const std::vector<double>& grid,
                                 const PullbackConfig& cfg) {
  if (grid.empty()) throw ContractViolation("attractor_family: grid must be nonempty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("attractor_family: grid must increase");
  cfg.validate(model.theta);

  PullbackConfig inner = cfg;
  inner.workers = 1;  // parallelism is spent across grid times
  std::vector<std::optional<SectionResult>> results(grid.size());
  parallel_for(
      grid.size(), [&](std::size_t i) { results[i] = pullback_section(model, grid[i], inner); }, cfg.workers);

  AttractorFamily fam;
  fam.model_id = model.id;
  fam.grid = grid;
  fam.config = cfg;
  for (auto& r : results) {
    fam.gaps.push_back(r->gap);
    fam.horizons.push_back(r->horizon);
    fam.sections.push_back(std::move(r->cloud));
  }
  return fam;
}

AttractorFamily make_family(std::string model_id, std::vector<double> grid, std::vector<SetCloud> sections,
                            PullbackConfig cfg) {
  if (grid.empty() || grid.size() != sections.size())
    throw ContractViolation("make_family: grid and sections must match and be nonempty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ContractViolation("make_family: grid must increase");
  for (const auto& s : sections)
    if (!(s.metric() == sections.front().metric())) throw ContractViolation("make_family: sections must share a metric");
  AttractorFamily fam;
  fam.model_id = std::move(model_id);
  fam.grid = std::move(grid);
  fam.sections = std::move(sections);
  fam.config = std::move(cfg);
  fam.gaps.assign(fam.grid.size(), 0.0);
  fam.horizons.assign(fam.grid.size(), 0.0);
  return fam;
}

LimitResult forward_limit(const AttractorFamily& family, std::vector<double> tail_fractions) {
  return tail_limit(family, tail_fractions, true);
}

LimitResult backward_limit(const AttractorFamily& family, std::vector<double> tail_fractions) {
  return tail_limit(family, tail_fractions, false);
}

CompactnessProxy compactness_proxy(const AttractorFamily& family, Tail tail) {
  const std::size_t n = family.sections.size();
  if (n < 4) throw ContractViolation("compactness proxy needs at least 4 sections");
  const std::size_t half = n / 2;
  const std::size_t quarter = half / 2;
  // [outer_first, outer_last) is the half of the tail away from the limit end
  std::size_t tail_first, tail_last, outer_first, outer_last, inner_first, inner_last;
  if (tail == Tail::forward) {
    tail_first = n - half;
    tail_last = n;
    outer_first = tail_first;
    outer_last = tail_first + quarter;
    inner_first = outer_last;
    inner_last = n;
  } else {
    tail_first = 0;
    tail_last = half;
    inner_first = 0;
    inner_last = half - quarter;
    outer_first = inner_last;
    outer_last = half;
  }

  const auto& cfg = family.config;
  const SetCloud full = prune(union_of(family.sections, tail_first, tail_last), cfg.prune_tol);
  const SetCloud coarse = prune(union_of(family.sections, tail_first, tail_last, 2), cfg.prune_tol);
  const SetCloud outer = union_of(family.sections, outer_first, outer_last);
  const SetCloud inner = union_of(family.sections, inner_first, inner_last);

  CompactnessProxy p;
  p.diameter = full.diameter();
  p.radius_early = outer.radius();
  p.radius_late = inner.radius();
  p.refinement_gap = hausdorff(full, coarse);
  const double resolution = resolution_of(family.sections, tail_first, tail_last);
  p.bounded = std::isfinite(p.diameter) &&
              p.radius_late <= p.radius_early + 0.5 * outer.diameter() + cfg.section_tol;
  p.stable = p.refinement_gap <= cfg.section_tol + resolution;
  p.passed = p.bounded && p.stable;
  return p;
}

SetCloud autonomous_attractor(const ProcessModel& model, double absorb_radius, double settle_time,
                              const PullbackConfig& cfg) {
  if (!model.autonomous) throw ContractViolation("autonomous_attractor: model " + model.id + " is time-dependent");
  if (!(absorb_radius > 0.0) || !(settle_time > 0.0))
    throw ContractViolation("autonomous_attractor: radius and settle_time must be positive");
  const std::uint64_t model_hash = fnv1a(model.id);
  const std::size_t n = cfg.ensemble_size;
  std::vector<State> at_t(n), at_2t(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, {model_hash, kAutonomousSalt, i});
        Sampler rng(seed);
        const State z = sample_ball(model.metric, absorb_radius, rng);
        const auto rule = ensemble_rule(model.selection, mix64(seed ^ kRuleSalt), i, n, cfg.switch_period);
        at_t[i] = advance(model, 0.0, z, settle_time, rule);
        at_2t[i] = advance(model, settle_time, at_t[i], 2.0 * settle_time, rule);
      },
      cfg.workers);
  const SetCloud first = prune(SetCloud(std::move(at_t), model.metric), cfg.prune_tol);
  SetCloud second = prune(SetCloud(std::move(at_2t), model.metric), cfg.prune_tol);
  const double gap = hausdorff(first, second);
  if (!(gap < cfg.section_tol)) {
    std::ostringstream msg;
    msg << "autonomous attractor of " << model.id << " did not settle by " << settle_time << " (gap " << gap << ")";
    throw NonSettlingError(msg.str(), gap);
  }
  return second;
}

CompleteOrbit extend_backward(const ProcessModel& model, double tau, std::span<const double> x,
                              const AttractorFamily& family, double depth, double tol) {
  return extend_backward(model, tau, x, family.grid, family.sections, depth, tol);
}

QuasiInvarianceReport quasi_invariance_check(const ProcessModel& model, const AttractorFamily& family,
                                             double depth, double tol) {
  const auto& grid = family.grid;
  const auto candidates = candidate_selections(model.selection);
  QuasiInvarianceReport report;

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < grid.front() + depth - 1e-9) continue;
    for (const auto& z : family.sections[k].points()) {
      ++report.checked;
      double excursion = 0.0;
      bool ok = true;
      std::optional<CompleteOrbit> orbit;
      try {
        orbit = extend_backward(model, grid[k], z, grid, family.sections, depth, tol);
        excursion = orbit->max_junction_gap;
      } catch (const NoPredecessorError&) {
        ok = false;
        excursion = std::numeric_limits<double>::infinity();
      }
      if (ok) {
        State current = z;
        for (std::size_t m = k + 1; m < grid.size(); ++m) {
          double best = std::numeric_limits<double>::infinity();
          State best_image;
          for (const auto& c : candidates) {
            State image = advance(model, grid[m - 1], current, grid[m], c);
            const double d = family.sections[m].distance_to(image);
            if (d < best) {
              best = d;
              best_image = std::move(image);
            }
          }
          excursion = std::max(excursion, best);
          current = std::move(best_image);
        }
        ok = excursion <= tol;
      }
      report.worst_excursion = std::max(report.worst_excursion, excursion);
      if (ok) {
        ++report.certified;
        report.orbits.push_back(std::move(*orbit));
      }
    }
  }
  if (report.checked == 0)
    throw ContractViolation("quasi_invariance_check: family does not cover any grid time by depth");
  report.fraction_certified = static_cast<double>(report.certified) / static_cast<double>(report.checked);
  return report;
}

KFamilyReport k_property_check(const ProcessModel& model, const AttractorFamily& candidate,
                               const PullbackConfig& cfg) {
  cfg.validate(model.theta);
  KFamilyReport rep;
  rep.grid = candidate.grid;
  rep.horizons = cfg.horizons;
  rep.tol = cfg.section_tol;
  rep.eps.resize(candidate.grid.size());
  parallel_for(
      candidate.grid.size(),
      [&](std::size_t i) {
        for (double h : cfg.horizons)
          rep.eps[i].push_back(semidist(pullback_cloud(model, candidate.grid[i], h, cfg, 1), candidate.sections[i]));
      },
      cfg.workers);
  rep.verdict = std::all_of(rep.eps.begin(), rep.eps.end(),
                            [&](const std::vector<double>& e) { return e.back() < rep.tol; });
  return rep;
}

}  // namespace spa
