#include <doctest.h>

#include <cmath>
#include <cstring>

#include "generators.hpp"
#include "oracles.hpp"
#include "spa/attractor.hpp"
#include "spa/errors.hpp"
#include "spa/models.hpp"

using namespace spa;

namespace {

PullbackConfig quick(std::vector<double> horizons = {20.0, 40.0}, std::size_t ensemble = 8) {
  PullbackConfig cfg;
  cfg.horizons = std::move(horizons);
  cfg.ensemble_size = ensemble;
  cfg.workers = 1;
  return cfg;
}

SetCloud interval_cloud(double lo, double hi, int n = 2001) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return SetCloud::scalars(v);
}

std::vector<double> uniform(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::llround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) g.push_back(lo + i * step);
  return g;
}

AttractorFamily constant_family(const std::vector<double>& grid, const SetCloud& section) {
  return make_family("const", grid, std::vector<SetCloud>(grid.size(), section));
}

AttractorFamily linear_oracle_family(const std::vector<double>& grid, double shift = 0.0) {
  std::vector<SetCloud> s;
  for (double t : grid) s.push_back(SetCloud::scalars({oracle::linear_sine(t) + shift}));
  return make_family("linear-oracle", grid, s);
}

bool same_points(const SetCloud& a, const SetCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a.dimension()) != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("pullback config") {
  PullbackConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sampler_growth = 2.0;
  CHECK(cfg.tempered(1.0));
  CHECK(cfg.sampler_radius_at(-3.0) == doctest::Approx(2.0 * 16.0));
  cfg.horizons = {5.0};
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  cfg.horizons = {5.0, 5.0};
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
  cfg.horizons = {5.0, 10.0};
  cfg.section_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}

TEST_CASE("pullback_section") {
  SUBCASE("x' = -x: {0}") {
    const auto s = pullback_section(make_linear(ForcingSpec::zero()), 1.5, quick());
    CHECK(hausdorff(s.cloud, SetCloud::scalars({0.0})) < 1e-6);
  }
  SUBCASE("linear benchmark at t = 0") {
    const auto s = pullback_section(make_linear(ForcingSpec::sine()), 0.0, quick({30.0, 60.0}, 64));
    CHECK(hausdorff(s.cloud, SetCloud::scalars({-0.5})) < 1e-3);
    CHECK(s.horizon == 30.0);
    CHECK(s.gap < 1e-3);
    CHECK(s.gaps.size() == 1);
  }
  SUBCASE("inclusion, ensemble 256") {
    auto cfg = quick({10.0, 20.0}, 256);
    cfg.section_tol = 0.05;
    cfg.prune_tol = 0.005;
    const auto s = pullback_section(make_inclusion(1.0, 1e-2), 0.0, cfg);
    CHECK(hausdorff(s.cloud, inclusion_bruteforce_oracle(1.0, 10.0, 10)) < 0.05);
    CHECK(hausdorff(s.cloud, interval_cloud(-1.0, 1.0)) < 0.05);
  }
  SUBCASE("no settling: every gap is reported") {
    auto cfg = quick({1.0, 2.0, 3.0});
    cfg.section_tol = 1e-6;
    try {
      pullback_section(make_cubic(ForcingSpec::zero(), 1e-2), 0.0, cfg);
      FAIL("expected HorizonExhaustedError");
    } catch (const HorizonExhaustedError& e) {
      CHECK(e.gaps().size() == 2);
      CHECK(e.gaps()[0] > 1e-6);
    }
  }
}

TEST_CASE("attractor_family") {
  SUBCASE("x' = -x on {0,1,2}") {
    const auto fam = attractor_family(make_linear(ForcingSpec::zero()), {0.0, 1.0, 2.0}, quick());
    REQUIRE(fam.sections.size() == 3);
    for (const auto& s : fam.sections) CHECK(hausdorff(s, SetCloud::scalars({0.0})) < 1e-6);
  }
  SUBCASE("linear benchmark on [0, 2 pi]") {
    const auto grid = uniform(0.0, 2.0 * std::numbers::pi, std::numbers::pi / 8);
    const auto fam = attractor_family(make_linear(ForcingSpec::sine()), grid, quick({30.0, 60.0}, 4));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CAPTURE(grid[i]);
      CHECK(hausdorff(fam.sections[i], SetCloud::scalars({oracle::linear_sine(grid[i])})) < 1e-3);
    }
    CHECK(fam.gaps.size() == grid.size());
    CHECK(fam.horizons.size() == grid.size());
    CHECK(fam.index_of(grid[3]) == 3u);
  }
  SUBCASE("inclusion: time-constant sections") {
    auto cfg = quick({10.0, 20.0}, 128);
    cfg.section_tol = 0.05;
    cfg.prune_tol = 0.005;
    const auto fam = attractor_family(make_inclusion(1.0, 1e-2), {-1.0, 0.0, 2.5}, cfg);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(hausdorff(fam.sections[i], fam.sections[j]) < 0.05);
  }
  SUBCASE("sections do not depend on the grid or the worker count") {
    const auto m = make_inclusion(1.0, 1e-2);
    auto cfg = quick({5.0, 10.0}, 16);
    cfg.section_tol = 0.5;
    const auto a = attractor_family(m, {0.0, 1.0, 2.0}, cfg);
    cfg.workers = 3;
    const auto b = attractor_family(m, {-4.0, 1.0}, cfg);
    CHECK(same_points(a.sections[1], b.sections[1]));
  }
}

TEST_CASE("forward_limit") {
  SUBCASE("constant family") {
    const auto lim = forward_limit(constant_family(uniform(0.0, 10.0, 1.0), SetCloud::scalars({0.0})));
    CHECK(hausdorff(lim.cloud, SetCloud::scalars({0.0})) == 0.0);
    CHECK(lim.stable);
    CHECK(lim.gaps.size() == 2);
  }
  SUBCASE("linear benchmark over [0, 8 pi]") {
    const auto grid = uniform(0.0, 8.0 * std::numbers::pi, 8.0 * std::numbers::pi / 400);
    auto cfg = quick({8.0, 16.0}, 1);
    cfg.prune_tol = 1e-4;
    const auto fam = attractor_family(make_linear(ForcingSpec::sine()), grid, cfg);
    const auto lim = forward_limit(fam);
    const double r = std::sqrt(0.5);
    CHECK(hausdorff(lim.cloud, interval_cloud(-r, r)) < 0.05);
    CHECK(lim.stable);
  }
  SUBCASE("decaying forcing: {1}") {
    const auto fam = attractor_family(make_linear(ForcingSpec::decaying(1.0, 1.0)), uniform(0.0, 30.0, 1.0), quick());
    CHECK(hausdorff(forward_limit(fam).cloud, SetCloud::scalars({1.0})) < 1e-2);
  }
  CHECK_THROWS_AS(forward_limit(constant_family({0.0, 1.0}, SetCloud::scalars({0.0}))), ContractViolation);
  CHECK_THROWS_AS(forward_limit(constant_family(uniform(0.0, 10.0, 1.0), SetCloud::scalars({0.0})), {1.0, 0.5}),
                  ContractViolation);
}

TEST_CASE("backward_limit") {
  SUBCASE("constant family") {
    const auto lim = backward_limit(constant_family(uniform(-10.0, 0.0, 1.0), SetCloud::scalars({0.0})));
    CHECK(hausdorff(lim.cloud, SetCloud::scalars({0.0})) == 0.0);
  }
  SUBCASE("linear benchmark over [-8 pi, 0]") {
    const auto grid = uniform(-8.0 * std::numbers::pi, 0.0, 8.0 * std::numbers::pi / 400);
    const auto lim = backward_limit(linear_oracle_family(grid));
    const double r = std::sqrt(0.5);
    CHECK(hausdorff(lim.cloud, interval_cloud(-r, r)) < 0.05);
  }
  SUBCASE("forcing frozen for t <= 0: the autonomous attractor") {
    const auto fam = attractor_family(make_linear(ForcingSpec::decaying(1.0, 1.0)), uniform(-10.0, 0.0, 1.0), quick());
    const auto a_inf = autonomous_attractor(make_linear(ForcingSpec::constant(2.0)), 3.0, 20.0, quick());
    CHECK(hausdorff(backward_limit(fam).cloud, a_inf) < 1e-3);
  }
}

TEST_CASE("autonomous_attractor") {
  CHECK(hausdorff(autonomous_attractor(make_linear(ForcingSpec::zero()), 2.0, 20.0, quick()), SetCloud::scalars({0.0})) <
        1e-6);
  CHECK(hausdorff(autonomous_attractor(make_cubic(ForcingSpec::constant(1.0), 1e-2), 2.0, 20.0, quick()),
                  SetCloud::scalars({1.0})) < 1e-3);
  // algebraic decay x0 / sqrt(1 + 2 x0^2 t): needs a long settle time
  const double T = 5e5;
  const auto slow = autonomous_attractor(make_cubic(ForcingSpec::zero(), 0.1), 2.0, T, quick());
  CHECK(hausdorff(slow, SetCloud::scalars({0.0})) < 1e-3);
  CHECK(slow.radius() <= oracle::cubic_free(2.0, 2.0 * T) + 1e-9);

  try {
    autonomous_attractor(make_cubic(ForcingSpec::zero(), 1e-2), 2.0, 10.0, quick());
    FAIL("expected NonSettlingError");
  } catch (const NonSettlingError& e) {
    CHECK(e.gap() > 1e-3);
  }
  CHECK_THROWS_AS(autonomous_attractor(make_linear(ForcingSpec::sine()), 2.0, 20.0, quick()), ContractViolation);
}

TEST_CASE("compactness proxy") {
  const auto grid = uniform(0.0, 10.0, 0.5);
  const auto flat = compactness_proxy(constant_family(grid, SetCloud::scalars({0.3})), Tail::forward);
  CHECK(flat.passed);
  CHECK(flat.diameter == 0.0);

  std::vector<SetCloud> growing;
  for (double t : grid) growing.push_back(SetCloud::scalars({t * t}));
  const auto grows = compactness_proxy(make_family("grow", grid, growing), Tail::forward);
  CHECK_FALSE(grows.bounded);
  CHECK_FALSE(grows.passed);

  CHECK_THROWS_AS(compactness_proxy(constant_family({0.0, 1.0, 2.0}, SetCloud::scalars({0.0})), Tail::backward),
                  ContractViolation);
}

TEST_CASE("quasi_invariance_check") {
  SUBCASE("equilibrium family") {
    const auto m = make_linear(ForcingSpec::zero());
    const auto rep = quasi_invariance_check(m, constant_family(uniform(-5.0, 2.0, 0.5), SetCloud::scalars({0.0})), 5.0,
                                            1e-6);
    CHECK(rep.fraction_certified == 1.0);
    CHECK(rep.worst_excursion < 1e-12);
  }
  SUBCASE("linear benchmark and a shifted copy") {
    const auto m = make_linear(ForcingSpec::sine());
    const auto grid = uniform(-10.0, 2.0, 0.1);
    const auto rep = quasi_invariance_check(m, linear_oracle_family(grid), 10.0, 1e-2);
    CHECK(rep.fraction_certified >= 0.95);
    CHECK(rep.checked > 0);
    for (const auto& orbit : rep.orbits) CHECK(reintegration_residual(m, orbit.path) < 1e-2);

    const auto bad = quasi_invariance_check(m, linear_oracle_family(grid, 1.0), 10.0, 1e-2);
    CHECK(bad.fraction_certified == 0.0);
  }
}

TEST_CASE("k_property_check") {
  const auto grid = std::vector<double>{0.0, 1.0};
  auto cfg = quick({1.0, 2.0, 4.0, 8.0, 16.0}, 8);
  cfg.sampler_radius = 1.0;
  const auto m = make_linear(ForcingSpec::zero());
  SUBCASE("K = {0} for x' = -x: R e^{-h}") {
    const auto rep = k_property_check(m, constant_family(grid, SetCloud::scalars({0.0})), cfg);
    CHECK(rep.verdict);
    for (const auto& eps : rep.eps) {
      REQUIRE(eps.size() == cfg.horizons.size());
      for (std::size_t k = 0; k < eps.size(); ++k) {
        CHECK(eps[k] <= cfg.sampler_radius * std::exp(-cfg.horizons[k]) + 1e-12);
        if (k > 0) CHECK(eps[k] <= eps[k - 1]);
      }
    }
  }
  SUBCASE("K = computed linear sections") {
    const auto lin = make_linear(ForcingSpec::sine());
    auto kcfg = quick({10.0, 20.0, 40.0}, 8);
    const auto fam = attractor_family(lin, grid, quick({30.0, 60.0}, 8));
    const auto rep = k_property_check(lin, fam, kcfg);
    CHECK(rep.verdict);
    for (const auto& eps : rep.eps) CHECK(eps.back() <= eps.front());
  }
  SUBCASE("K = {10}: distance tends to 10") {
    const auto rep = k_property_check(m, constant_family(grid, SetCloud::scalars({10.0})), cfg);
    CHECK_FALSE(rep.verdict);
    for (const auto& eps : rep.eps) CHECK(std::abs(eps.back() - 10.0) < 1e-6);
  }
}

// ---------------------------------------------------------------------------
// properties
// ---------------------------------------------------------------------------

TEST_CASE("property: Cauchy gaps do not grow with the horizon") {
  gen::Rng rng(41);
  for (int i = 0; i < 6; ++i) {
    const double t = rng.uniform(-3.0, 3.0);
    CAPTURE(t);
    const auto m = i % 2 ? make_linear(ForcingSpec::sine()) : make_cubic(ForcingSpec::constant(rng.uniform(0.5, 2.0)), 1e-2);
    const auto gaps = pullback_gaps(m, t, quick({1.0, 2.0, 4.0, 8.0}, 8));
    for (std::size_t k = 1; k < gaps.size(); ++k) CHECK(gaps[k] <= gaps[k - 1] + 1e-3);
  }
}

TEST_CASE("property: sections forget the sampler radius") {
  gen::Rng rng(42);
  const auto m = make_cubic(ForcingSpec::sine(), 1e-2);
  for (int i = 0; i < 4; ++i) {
    const double t = rng.uniform(-2.0, 2.0);
    CAPTURE(t);
    auto a = quick({10.0, 20.0}, 8);
    auto b = a;
    a.sampler_radius = 2.0;
    b.sampler_radius = rng.uniform(3.0, 6.0);
    CHECK(hausdorff(pullback_section(m, t, a).cloud, pullback_section(m, t, b).cloud) <= 2.0 * a.section_tol);
  }
}

TEST_CASE("property: forward limit of a time-constant family is any section") {
  gen::Rng rng(43);
  for (int i = 0; i < 30; ++i) {
    CAPTURE(i);
    const auto m = MetricDescriptor::euclidean(rng.index(1, 2));
    const auto section = gen::cloud(rng, m, 20, 1.0);
    const auto fam = make_family("const", uniform(0.0, 5.0, 0.5), std::vector<SetCloud>(11, section));
    CHECK(hausdorff(forward_limit(fam).cloud, section) <= fam.config.prune_tol);
  }
}
