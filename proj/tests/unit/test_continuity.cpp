#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "spa/continuity.hpp"
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

std::vector<double> uniform(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::llround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) g.push_back(lo + i * step);
  return g;
}

SetCloud interval_cloud(double lo, double hi, int n = 2001) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return SetCloud::scalars(v);
}

AttractorFamily constant_family(const std::vector<double>& grid, const SetCloud& section) {
  return make_family("const", grid, std::vector<SetCloud>(grid.size(), section));
}

/// x' = -x^3 + e^{-max(t,0)}: equal to 1 for t <= 0, then plain RK4 with a fine step.
double cubic_decaying_reference(double t) {
  if (t <= 0.0) return 1.0;
  auto f = [](double s, double x) { return -x * x * x + std::exp(-s); };
  const int n = static_cast<int>(std::ceil(t / 1e-3));
  const double h = t / n;
  double x = 1.0;
  for (int i = 0; i < n; ++i) {
    const double s = i * h;
    const double k1 = f(s, x), k2 = f(s + h / 2, x + h / 2 * k1), k3 = f(s + h / 2, x + h / 2 * k2),
                 k4 = f(s + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST_CASE("continuity_modulus") {
  SUBCASE("x' = -x: flat") {
    const auto m = make_linear(ForcingSpec::zero());
    const auto fam = attractor_family(m, uniform(-0.4, 0.4, 0.2), quick());
    const auto t = continuity_modulus(m, fam, 0.0, {0.4, 0.2, 0.1});
    for (double d : t.distances) CHECK(d < 2.0 * fam.config.section_tol);
    CHECK(t.verdict);
    CHECK(t.rows() == 6);
  }
  SUBCASE("linear benchmark: slope bounded by the oracle derivative") {
    const auto m = make_linear(ForcingSpec::sine());
    const auto fam = attractor_family(m, uniform(-0.4, 0.4, 0.05), quick({30.0, 60.0}, 4));
    const auto t = continuity_modulus(m, fam, 0.0, {0.4, 0.2, 0.1, 0.05}, 0.8);
    CHECK(t.verdict);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      CAPTURE(t.abscissae[i]);
      CHECK(t.distances[i] <= 0.8 * std::abs(t.abscissae[i]));
      const double exact = std::abs(oracle::linear_sine(t.abscissae[i]) - oracle::linear_sine(0.0));
      CHECK(std::abs(t.distances[i] - exact) < 2e-3);
    }
    // abscissae are signed and sorted
    CHECK(t.abscissae.front() == -0.4);
    CHECK(t.abscissae.back() == 0.4);
    // without a bound the envelope slope is used
    CHECK(continuity_modulus(m, fam, 0.0, {0.4, 0.2, 0.1, 0.05}).verdict);
  }
  SUBCASE("inclusion: time-constant attractor") {
    const auto m = make_inclusion(1.0, 1e-2);
    auto cfg = quick({10.0, 20.0}, 128);
    cfg.section_tol = 0.05;
    cfg.prune_tol = 0.005;
    const auto fam = attractor_family(m, {-0.2, 0.0, 0.2}, cfg);
    const auto t = continuity_modulus(m, fam, 0.0, {0.2, 0.1});  // 0.1 offsets computed on demand
    for (double d : t.distances) CHECK(d < 2.0 * cfg.section_tol);
  }
  SUBCASE("offsets outside the grid") {
    const auto m = make_linear(ForcingSpec::zero());
    const auto fam = constant_family({-0.1, 0.0, 0.1}, SetCloud::scalars({0.0}));
    CHECK_THROWS_AS(continuity_modulus(m, fam, 0.0, {0.5}), ContractViolation);
    CHECK_THROWS_AS(continuity_modulus(m, fam, 0.0, {}), ContractViolation);
  }
}

TEST_CASE("forward_convergence") {
  SUBCASE("constant family") {
    const auto t = forward_convergence(constant_family(uniform(0.0, 5.0, 1.0), SetCloud::scalars({1.0})),
                                       SetCloud::scalars({1.0}));
    for (double d : t.distances) CHECK(d == 0.0);
    CHECK(t.verdict);
  }
  SUBCASE("decaying forcing against {1}") {
    const auto fam = attractor_family(make_linear(ForcingSpec::decaying(1.0, 1.0)), uniform(0.0, 12.0, 1.0), quick());
    const auto t = forward_convergence(fam, SetCloud::scalars({1.0}), 0.01);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      CAPTURE(t.abscissae[i]);
      // exact distance (1 + t) e^{-t}
      CHECK(std::abs(t.distances[i] - (oracle::linear_decaying(t.abscissae[i]) - 1.0)) < 1e-3);
      if (t.abscissae[i] >= 7.0) CHECK(t.distances[i] < 0.01);
    }
    CHECK(t.verdict);
  }
  SUBCASE("linear benchmark against its interval") {
    const auto grid = uniform(0.0, 2.0 * std::numbers::pi, 0.25);
    const auto fam = attractor_family(make_linear(ForcingSpec::sine()), grid, quick({30.0, 60.0}, 2));
    const double r = std::sqrt(0.5);
    const auto t = forward_convergence(fam, interval_cloud(-r, r));
    for (double d : t.distances) CHECK(d < 2.0 * fam.config.section_tol);
  }
}

TEST_CASE("backward_convergence") {
  SUBCASE("constant family") {
    const auto t = backward_convergence(constant_family(uniform(-5.0, 0.0, 1.0), SetCloud::scalars({0.0})),
                                        SetCloud::scalars({0.0}));
    for (double d : t.distances) CHECK(d == 0.0);
    CHECK(t.abscissae.front() == 0.0);
    CHECK(t.abscissae.back() == -5.0);
  }
  SUBCASE("autonomous for t <= 0") {
    const auto fam = attractor_family(make_linear(ForcingSpec::decaying(1.0, 1.0)), uniform(-8.0, 2.0, 1.0), quick());
    const auto a_inf = autonomous_attractor(make_linear(ForcingSpec::constant(2.0)), 3.0, 20.0, quick());
    const auto t = backward_convergence(fam, a_inf);
    for (std::size_t i = 0; i < t.rows(); ++i)
      if (t.abscissae[i] <= -2.0) CHECK(t.distances[i] < 0.01);
    CHECK(t.verdict);
  }
  SUBCASE("linear benchmark against its backward interval") {
    const auto grid = uniform(-2.0 * std::numbers::pi, 0.0, 0.25);
    const auto fam = attractor_family(make_linear(ForcingSpec::sine()), grid, quick({30.0, 60.0}, 2));
    const double r = std::sqrt(0.5);
    for (double d : backward_convergence(fam, interval_cloud(-r, r)).distances) CHECK(d < 2.0 * fam.config.section_tol);
  }
}

TEST_CASE("asymptotic_autonomy_check") {
  const std::vector<double> offsets{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  SUBCASE("already autonomous") {
    const auto m = make_cubic(ForcingSpec::constant(1.0), 1e-2);
    const auto fam = attractor_family(m, {5.0, 10.0, 20.0}, quick());
    const auto t = asymptotic_autonomy_check(m, m, fam, offsets, {5.0, 10.0, 20.0}, 1e-2);
    for (double d : t.distances) CHECK(d < 1e-12);
    CHECK(t.verdict);
  }
  SUBCASE("cubic with decaying forcing against x' = -x^3") {
    const auto m = make_cubic(ForcingSpec::decaying(0.0, 1.0), 1e-2);
    const auto a = make_cubic(ForcingSpec::zero(), 1e-2);
    const auto fam = attractor_family(m, {5.0, 10.0, 20.0}, quick({40.0, 80.0}));
    const auto t = asymptotic_autonomy_check(m, a, fam, offsets, {5.0, 10.0, 20.0}, 1e-2);
    CHECK(t.distances[1] < 1e-2);
    CHECK(t.distances[2] < t.distances[1]);
    CHECK(t.distances[1] < t.distances[0]);
    CHECK(t.verdict);
    REQUIRE(t.extra.size() == 1);
    CHECK(t.extra[0].name == "initial_gap");
  }
  SUBCASE("linear benchmark against x' = -x: no convergence") {
    const auto m = make_linear(ForcingSpec::sine());
    const auto a = make_linear(ForcingSpec::zero());
    const std::vector<double> taus{5.0, 10.0, 20.0, 40.0};
    const auto fam = attractor_family(m, taus, quick({30.0, 60.0}, 2));
    const auto t = asymptotic_autonomy_check(m, a, fam, offsets, taus, 1e-2);
    CHECK_FALSE(t.verdict);
    for (double d : t.distances) CHECK(d > 0.1);
  }
  SUBCASE("contract") {
    const auto m = make_linear(ForcingSpec::sine());
    const auto fam = constant_family({0.0, 1.0}, SetCloud::scalars({0.0}));
    CHECK_THROWS_AS(asymptotic_autonomy_check(m, m, fam, offsets, {0.0}, 1e-2), ContractViolation);
  }
}

TEST_CASE("autonomous_tracking") {
  SUBCASE("autonomous model against its own attractor") {
    const auto m = make_cubic(ForcingSpec::constant(1.0), 1e-2);
    const auto fam = attractor_family(m, uniform(0.0, 3.0, 1.0), quick());
    const auto a_inf = autonomous_attractor(m, 2.0, 20.0, quick());
    const auto t = autonomous_tracking(fam, a_inf);
    for (double d : t.distances) CHECK(d < 2.0 * fam.config.section_tol);
    CHECK(t.verdict);
  }
  SUBCASE("cubic with decaying forcing against {0}: slow algebraic approach") {
    // the distance follows the bounded solution, which decays like 1/sqrt(2t)
    const auto m = make_cubic(ForcingSpec::decaying(0.0, 1.0), 1e-2);
    const auto fam = attractor_family(m, uniform(0.0, 40.0, 4.0), quick({60.0, 120.0}));
    const auto t = autonomous_tracking(fam, SetCloud::scalars({0.0}), 0.01);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      CAPTURE(t.abscissae[i]);
      CHECK(std::abs(t.distances[i] - cubic_decaying_reference(t.abscissae[i])) < 1e-3);
      if (i > 0) CHECK(t.distances[i] < t.distances[i - 1]);
    }
    CHECK(t.distances[t.rows() - 1] > 0.01);
    CHECK_FALSE(t.verdict);
  }
}

TEST_CASE("backward_autonomous_tracking") {
  SUBCASE("autonomous model") {
    const auto m = make_linear(ForcingSpec::constant(1.0));
    const auto fam = attractor_family(m, uniform(-3.0, 0.0, 1.0), quick());
    for (double d : backward_autonomous_tracking(fam, SetCloud::scalars({1.0})).distances) CHECK(d < 1e-6);
  }
  SUBCASE("forcing frozen for t <= 0") {
    const auto fam = attractor_family(make_linear(ForcingSpec::decaying(1.0, 1.0)), uniform(-4.0, 0.0, 1.0), quick());
    const auto t = backward_autonomous_tracking(fam, SetCloud::scalars({2.0}));
    for (double d : t.distances) CHECK(d < 2.0 * fam.config.section_tol);
    CHECK(t.verdict);
  }
  SUBCASE("linear benchmark against {0}") {
    const auto grid = uniform(-2.0 * std::numbers::pi, 0.0, 0.5);
    const auto fam = attractor_family(make_linear(ForcingSpec::sine()), grid, quick({30.0, 60.0}, 2));
    CHECK_FALSE(backward_autonomous_tracking(fam, SetCloud::scalars({0.0})).verdict);
  }
}

// ---------------------------------------------------------------------------
// properties
// ---------------------------------------------------------------------------

TEST_CASE("property: time-constant families give distances within 2 section_tol") {
  gen::Rng rng(51);
  for (int i = 0; i < 40; ++i) {
    CAPTURE(i);
    const auto metric = MetricDescriptor::euclidean(rng.index(1, 3));
    const auto section = gen::cloud(rng, metric, 12, 1.0);
    const auto grid = uniform(0.0, 6.0, 0.5);
    const auto fam = constant_family(grid, section);
    const double bound = 2.0 * fam.config.section_tol;
    for (double d : forward_convergence(fam, section).distances) CHECK(d <= bound);
    for (double d : backward_convergence(fam, section).distances) CHECK(d <= bound);
    for (double d : autonomous_tracking(fam, section).distances) CHECK(d <= bound);
  }
}

TEST_CASE("property: autonomous continuity tables are symmetric in delta") {
  gen::Rng rng(52);
  for (int i = 0; i < 3; ++i) {
    const double level = rng.uniform(0.5, 2.0);
    CAPTURE(level);
    const auto m = make_cubic(ForcingSpec::constant(level), 1e-2);
    const auto fam = attractor_family(m, uniform(-0.4, 0.4, 0.2), quick());
    const auto t = continuity_modulus(m, fam, 0.0, {0.4, 0.2});
    const std::size_t n = t.rows();
    for (std::size_t k = 0; k < n / 2; ++k)
      CHECK(std::abs(t.distances[k] - t.distances[n - 1 - k]) <= 2.0 * fam.config.section_tol);
  }
}

TEST_CASE("property: a passing forward verdict implies the compactness proxy") {
  gen::Rng rng(53);
  for (int i = 0; i < 60; ++i) {
    CAPTURE(i);
    const auto grid = uniform(0.0, 10.0, 0.5);
    std::vector<SetCloud> sections;
    const double rate = rng.uniform(-0.5, 1.5);
    for (double t : grid) sections.push_back(SetCloud::scalars({std::exp(-rate * t) * rng.uniform(0.9, 1.1)}));
    const auto fam = make_family("random", grid, sections);
    const auto t = forward_convergence(fam, SetCloud::scalars({0.0}), 0.05);
    if (t.verdict) CHECK(compactness_proxy(fam, Tail::forward).passed);
  }
}

TEST_CASE("property: tables are deterministic") {
  const auto m = make_inclusion(1.0, 1e-2);
  auto cfg = quick({5.0, 10.0}, 32);
  cfg.section_tol = 0.5;
  const auto a = attractor_family(m, uniform(0.0, 3.0, 1.0), cfg);
  const auto b = attractor_family(m, uniform(0.0, 3.0, 1.0), cfg);
  const auto ta = forward_convergence(a, a.sections[0]);
  const auto tb = forward_convergence(b, b.sections[0]);
  CHECK(ta.distances == tb.distances);
}
