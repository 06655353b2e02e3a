#include "spa/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "spa/continuity.hpp"
#include "spa/errors.hpp"
#include "spa/models.hpp"
#include "spa/plap.hpp"

namespace spa {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  RunResult& result;
  std::ostream* log;

  void say(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }

  std::string write_file(const std::string& name, const std::string& content) const {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
    result.files.push_back(name);
    return name;
  }

  void table(const ConvergenceTable& t) const {
    std::ostringstream os;
    t.write_csv(os);
    const std::string file = write_file(t.name + ".csv", os.str());
    result.checks.push_back({t.name, t.verdict, t.tol, file, t.summary});
    say(std::string(t.verdict ? "PASS " : "FAIL ") + t.name);
  }

  void check(CheckResult c) const {
    say(std::string(c.verdict ? "PASS " : "FAIL ") + c.name);
    result.checks.push_back(std::move(c));
  }

  void family(const AttractorFamily& fam, const std::string& name = "family") const {
    std::ostringstream os;
    write_family_csv(os, fam);
    write_file(name + ".csv", os.str());
  }

  void cloud(const SetCloud& c, const std::string& name) const {
    std::ostringstream os;
    write_cloud_csv(os, c);
    write_file(name + ".csv", os.str());
  }
};

ProcessModel model_of(const ExperimentConfig& cfg) {
  return cfg.model_is_plap ? make_plap_model(cfg.plap) : make_benchmark(cfg.model);
}

SetCloud dense_interval(double lo, double hi, std::size_t n = 4001) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return SetCloud::scalars(v);
}

std::vector<double> doubled_window(const std::vector<double>& grid) {
  if (grid.size() < 2) return grid;
  const double step = grid[1] - grid[0];
  std::vector<double> out = grid;
  const double span = grid.back() - grid.front();
  for (double t = grid.back() + step; t <= grid.front() + 2.0 * span + 1e-9; t += step) out.push_back(t);
  return out;
}

void run_attract(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const ProcessModel model = model_of(cfg);
  ctx.say("computing attractor family of " + model.id);
  const AttractorFamily fam = attractor_family(model, cfg.grid, cfg.pullback);
  ctx.family(fam);

  // closed-form or brute-force reference, where the model has one
  std::optional<std::function<SetCloud(double)>> oracle;
  double oracle_tol = cfg.params.oracle_tol.value_or(1e-3);
  if (!cfg.model_is_plap) {
    const auto& spec = cfg.model;
    if (spec.kind == BenchmarkSpec::Kind::linear) {
      oracle = [spec](double t) {
        const auto v = linear_pullback_oracle(spec.forcing, t);
        if (!v.converged) throw std::runtime_error("linear oracle did not converge");
        return SetCloud::scalars({v.value});
      };
    } else if (spec.kind == BenchmarkSpec::Kind::inclusion) {
      const SetCloud ref = inclusion_bruteforce_oracle(spec.eps, 10.0, 10);
      oracle = [ref](double) { return ref; };
      oracle_tol = cfg.params.oracle_tol.value_or(0.05);
    } else if (spec.kind == BenchmarkSpec::Kind::cubic && spec.forcing.kind == ForcingSpec::Kind::constant &&
               spec.forcing.level != 0.0) {
      const double root = std::cbrt(spec.forcing.level);
      oracle = [root](double) { return SetCloud::scalars({root}); };
    }
  }

  ConvergenceTable t;
  t.name = "sections";
  t.abscissa_name = "t";
  t.value_name = oracle ? "oracle_hausdorff" : "cauchy_gap";
  Column gap{"cauchy_gap", {}}, horizon{"horizon", {}}, points{"points", {}}, diameter{"diameter", {}};
  for (std::size_t i = 0; i < fam.grid.size(); ++i) {
    t.abscissae.push_back(fam.grid[i]);
    t.distances.push_back(oracle ? hausdorff(fam.sections[i], (*oracle)(fam.grid[i])) : fam.gaps[i]);
    gap.values.push_back(fam.gaps[i]);
    horizon.values.push_back(fam.horizons[i]);
    points.values.push_back(static_cast<double>(fam.sections[i].size()));
    diameter.values.push_back(fam.sections[i].diameter());
  }
  if (oracle) t.extra.push_back(std::move(gap));
  t.extra.push_back(std::move(horizon));
  t.extra.push_back(std::move(points));
  t.extra.push_back(std::move(diameter));
  t.tol = oracle ? oracle_tol : cfg.pullback.section_tol;
  t.verdict = std::all_of(t.distances.begin(), t.distances.end(), [&](double d) { return d < t.tol; });
  t.validate();
  ctx.table(t);

  if (cfg.params.quasi_depth) {
    const auto rep = quasi_invariance_check(model, fam, *cfg.params.quasi_depth, cfg.params.quasi_tol);
    ctx.check({"quasi_invariance",
               rep.fraction_certified >= 0.95,
               cfg.params.quasi_tol,
               "",
               {{"fraction_certified", rep.fraction_certified},
                {"worst_excursion", std::isfinite(rep.worst_excursion) ? rep.worst_excursion : -1.0},
                {"checked", static_cast<double>(rep.checked)},
                {"certified", static_cast<double>(rep.certified)}}});
  }
}

void run_continuity(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const ProcessModel model = model_of(cfg);
  ctx.say("computing attractor family of " + model.id);
  const AttractorFamily fam = attractor_family(model, cfg.grid, cfg.pullback);
  ctx.family(fam);
  ctx.table(continuity_modulus(model, fam, cfg.params.t, cfg.params.deltas, cfg.params.slope_bound));
}

void run_limits(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const ProcessModel model = model_of(cfg);
  ctx.say("computing attractor family of " + model.id);
  const AttractorFamily fam = attractor_family(model, cfg.grid, cfg.pullback);
  ctx.family(fam);

  auto one = [&](bool forward) {
    const LimitResult lim = forward ? forward_limit(fam, p.fractions) : backward_limit(fam, p.fractions);
    const std::string tag = forward ? "forward" : "backward";
    ctx.cloud(lim.cloud, tag + "_limit");
    CheckResult c{tag + "_limit", lim.stable, lim.tol, tag + "_limit.csv", {}};
    for (std::size_t i = 0; i < lim.gaps.size(); ++i) c.summary.emplace_back("window_gap_" + std::to_string(i), lim.gaps[i]);
    if (p.oracle_lo) {
      const double d = hausdorff(lim.cloud, dense_interval(*p.oracle_lo, *p.oracle_hi));
      const double otol = p.oracle_tol.value_or(0.05);
      c.summary.emplace_back("oracle_hausdorff", d);
      c.summary.emplace_back("oracle_tol", otol);
      c.verdict = c.verdict && d < otol;
    }
    ctx.check(std::move(c));
    ctx.table(forward ? forward_convergence(fam, lim.cloud, p.limit_tol) : backward_convergence(fam, lim.cloud, p.limit_tol));
  };
  if (p.direction == "forward" || p.direction == "both") one(true);
  if (p.direction == "backward" || p.direction == "both") one(false);
}

void run_autonomy(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const ProcessModel model = model_of(cfg);
  const ProcessModel reference = make_benchmark(*cfg.reference);
  ctx.say("computing attractor family of " + model.id);
  const AttractorFamily fam = attractor_family(model, cfg.grid, cfg.pullback);
  ctx.family(fam);
  ctx.say("computing autonomous attractor of " + reference.id);
  const SetCloud a_inf = autonomous_attractor(reference, p.absorb_radius, p.settle_time, cfg.pullback);
  ctx.cloud(a_inf, "autonomous_attractor");
  ctx.table(autonomous_tracking(fam, a_inf, p.tracking_tol));
  const std::vector<double> taus = p.taus.value_or(std::vector<double>{5.0, 10.0, 20.0});
  ctx.table(asymptotic_autonomy_check(model, reference, fam, p.offsets, taus, p.autonomy_tol));
}

void run_assumptions(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const PLapConfig& pl = cfg.plap;

  std::vector<double> s_grid;
  for (int i = 0; i <= 200; ++i) s_grid.push_back(-p.s_max + p.s_max * i / 100.0);
  const auto diss = dissipativity_check(pl, p.b_grid, s_grid);
  ctx.check({"dissipativity",
             diss.passed,
             0.0,
             "",
             {{"worst_lower_margin", diss.worst_lower_margin},
              {"worst_growth_margin", diss.worst_growth_margin},
              {"witness_component", static_cast<double>(diss.witness_component)},
              {"witness_t", diss.witness_t},
              {"witness_s", diss.witness_s}}});

  {
    ConvergenceTable t;
    t.name = "assumption_a_tail";
    t.abscissa_name = "tau";
    t.value_name = "tail";
    t.tol = p.tail_tol;
    bool diverged = false;
    for (double tau : p.taus.value_or(std::vector<double>{0.0, 5.0, 10.0, 20.0, 40.0})) {
      const auto r = assumption_a_tail(pl, tau);
      diverged = diverged || r.diverged;
      t.abscissae.push_back(tau);
      t.distances.push_back(r.value);
    }
    t.verdict = !diverged && eventually_below(t.distances, t.tol);
    t.rate = fit_decay_rate(t.abscissae, t.distances);
    t.validate();
    ctx.table(t);
  }

  {
    const auto b = assumption_b_sup(pl, p.b_grid);
    ConvergenceTable t;
    t.name = "assumption_b";
    t.abscissa_name = "t";
    t.value_name = "h41";
    t.abscissae = b.t_grid;
    t.distances = b.h41;
    t.extra.push_back({"h42", b.h42});
    t.verdict = b.finite && b.bounded_on_extension;
    t.summary = {{"sup_h41", b.sup_h41}, {"sup_h42", b.sup_h42}, {"bounded_on_extension", b.bounded_on_extension ? 1.0 : 0.0}};
    t.validate();
    ctx.table(t);
  }

  {
    const auto r1 = absorbing_radius_sup(pl, p.b_grid);
    const auto r2 = absorbing_radius_sup(pl, doubled_window(p.b_grid));
    ConvergenceTable t;
    t.name = "absorbing_radius";
    t.abscissa_name = "t";
    t.value_name = "radius";
    t.abscissae = p.b_grid;
    t.distances = r1.values;
    t.tol = 0.01;
    const double rel = std::abs(r2.sup - r1.sup) / r1.sup;
    t.verdict = !r1.diverged && !r2.diverged && std::isfinite(r1.sup) && rel <= t.tol;
    t.summary = {{"sup", r1.sup}, {"sup_doubled_window", r2.sup}, {"relative_change", rel}};
    t.validate();
    ctx.table(t);
  }
}

void run_plap_suite(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& p = cfg.params;
  const PLapConfig& pl = cfg.plap;
  const ProcessModel model = make_plap_model(pl);
  const PLapConfig frozen = frozen_limit(pl);
  const ProcessModel frozen_model = make_plap_model(frozen);

  ctx.say("computing attractor family of " + model.id);
  const AttractorFamily fam = attractor_family(model, cfg.grid, cfg.pullback);
  ctx.family(fam);
  ctx.say("computing autonomous attractor of " + frozen_model.id);
  const SetCloud a_inf = autonomous_attractor(frozen_model, p.absorb_radius, p.settle_time, cfg.pullback);
  ctx.cloud(a_inf, "autonomous_attractor");
  ctx.table(autonomous_tracking(fam, a_inf, p.tracking_tol.value_or(0.05)));

  // Gronwall comparison of single-valued solutions
  PLapConfig single = pl;
  single.use_variants = false;
  PLapConfig single_frozen = frozen;
  single_frozen.use_variants = false;
  const ProcessModel u_model = make_plap_model(single);
  const ProcessModel v_model = make_plap_model(single_frozen);
  const State v0 = a_inf[0];
  const State w = DiscreteField::sample(pl.N, [](double x) { return std::sin(std::numbers::pi * x) + 1.0; }).to_state();
  std::vector<ConvergenceTable> curves;
  for (double tau : p.taus.value_or(std::vector<double>{5.0, 10.0, 20.0})) {
    State u0 = v0;
    for (std::size_t k = 0; k < u0.size(); ++k) u0[k] += std::exp(-tau) * w[k];
    const Trajectory u = solve(u_model, tau, u0, tau + p.gronwall_span);
    const Trajectory v = solve(v_model, 0.0, v0, p.gronwall_span);
    curves.push_back(gronwall_bound(pl, u, v, tau, p.c, p.alpha_sup));
    ctx.table(curves.back());
  }
  if (curves.size() >= 2) {
    const auto& first = curves.front().distances;
    const auto& last = curves.back().distances;
    bool below = first.size() == last.size();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; below && i < first.size(); ++i) {
      worst = std::max(worst, last[i] - first[i]);
      if (last[i] > first[i]) below = false;
    }
    ctx.check({"gronwall_ordering", below, 0.0, "", {{"max_last_minus_first", worst}}});
  }
}

ordered_json config_echo(const ConfigFile& f) {
  ordered_json j = ordered_json::object();
  for (const auto& [section, entries] : f.sections()) {
    if (entries.empty() && section.empty()) continue;
    ordered_json s = ordered_json::object();
    for (const auto& [key, e] : entries) s[key] = e.value;
    j[section.empty() ? "top" : section] = s;
  }
  return j;
}

void write_manifest(const fs::path& dir, const RunResult& result, const ExperimentConfig* cfg,
                    const std::string& config_path, double wall) {
  ordered_json m;
  m["config_path"] = config_path;
  if (cfg) {
    m["experiment"] = experiment_name(cfg->experiment);
    m["seed"] = cfg->seed;
    m["config"] = config_echo(cfg->source);
    m["tolerances"] = {{"prune_tol", cfg->pullback.prune_tol},
                       {"section_tol", cfg->pullback.section_tol},
                       {"horizons", cfg->pullback.horizons},
                       {"ensemble_size", cfg->pullback.ensemble_size}};
  }
  ordered_json checks = ordered_json::array();
  for (const auto& c : result.checks) {
    ordered_json jc;
    jc["name"] = c.name;
    jc["verdict"] = c.verdict ? "pass" : "fail";
    jc["tol"] = c.tol;
    if (!c.csv.empty()) jc["csv"] = c.csv;
    ordered_json s = ordered_json::object();
    for (const auto& [k, v] : c.summary) s[k] = std::isfinite(v) ? ordered_json(v) : ordered_json(format_double(v));
    jc["summary"] = s;
    checks.push_back(jc);
  }
  m["checks"] = checks;
  m["files"] = result.files;
  m["status"] = result.exit_code == 0 ? "pass" : result.exit_code == 2 ? "fail" : "error";
  m["exit_code"] = result.exit_code;
  if (!result.error.empty()) m["error"] = result.error;
  m["wall_time_seconds"] = wall;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

RunResult execute(std::optional<ExperimentConfig> cfg, const std::string& config_path, const std::string& early_error,
                  const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  std::string out = opts.out_dir.value_or(cfg ? cfg->out_dir : std::string("spalab-out"));
  result.out_dir = out;
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);

  if (!cfg) {
    result.error = early_error;
  } else {
    if (opts.seed) {
      cfg->seed = *opts.seed;
      cfg->pullback.seed = *opts.seed;
    }
    Context ctx{*cfg, dir, result, opts.log};
    try {
      if (ec) throw std::runtime_error("cannot create output directory " + out + ": " + ec.message());
      switch (cfg->experiment) {
        case Experiment::attract:
          run_attract(ctx);
          break;
        case Experiment::continuity:
          run_continuity(ctx);
          break;
        case Experiment::limits:
          run_limits(ctx);
          break;
        case Experiment::autonomy:
          run_autonomy(ctx);
          break;
        case Experiment::assumptions:
          run_assumptions(ctx);
          break;
        case Experiment::plap_suite:
          run_plap_suite(ctx);
          break;
      }
      const bool all = std::all_of(result.checks.begin(), result.checks.end(), [](const CheckResult& c) { return c.verdict; });
      result.exit_code = all ? 0 : 2;
    } catch (const std::exception& e) {
      result.error = e.what();
      result.exit_code = 1;
    }
  }
  if (!result.error.empty() && opts.log) *opts.log << "error: " << result.error << '\n';
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!ec) {
    try {
      write_manifest(dir, result, cfg ? &*cfg : nullptr, config_path, wall);
    } catch (const std::exception& e) {
      if (opts.log) *opts.log << "error: manifest not written: " << e.what() << '\n';
      result.exit_code = 1;
    }
  }
  return result;
}

}  // namespace

void write_family_csv(std::ostream& os, const AttractorFamily& family) {
  os << "t,point_index";
  const std::size_t d = family.sections.front().dimension();
  for (std::size_t k = 0; k < d; ++k) os << ",x" << k;
  os << '\n';
  for (std::size_t i = 0; i < family.grid.size(); ++i) {
    const auto& sec = family.sections[i];
    for (std::size_t j = 0; j < sec.size(); ++j) {
      os << format_double(family.grid[i]) << ',' << j;
      for (double v : sec[j]) os << ',' << format_double(v);
      os << '\n';
    }
  }
}

void write_cloud_csv(std::ostream& os, const SetCloud& cloud) {
  os << "point_index";
  for (std::size_t k = 0; k < cloud.dimension(); ++k) os << ",x" << k;
  os << '\n';
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    os << j;
    for (double v : cloud[j]) os << ',' << format_double(v);
    os << '\n';
  }
}

RunResult run(const std::string& config_path, const RunOptions& opts) {
  std::optional<ExperimentConfig> cfg;
  std::string error;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    error = e.what();
  }
  return execute(std::move(cfg), config_path, error, opts);
}

RunResult run_experiment(ExperimentConfig cfg, const RunOptions& opts) {
  return execute(std::move(cfg), "", "", opts);
}

std::string list_experiments() {
  struct Entry {
    const char* name;
    const char* keys;
    const char* verifies;
  };
  static const Entry entries[] = {
      {"attract", "[model] [pullback] [grid]; params: oracle_tol, quasi_depth, quasi_tol",
       "selected pullback attraction of A(t) (Cauchy-settled sections, oracle agreement) and quasi-invariance"},
      {"continuity", "[model] [pullback] [grid]; params: t, deltas, slope_bound",
       "continuity of t -> A(t) in the Hausdorff distance"},
      {"limits", "[model] [pullback] [grid]; params: direction, fractions, tol, oracle_lo, oracle_hi, oracle_tol",
       "convergence of A(t) to A(+inf) / A(-inf) under forward / backward compactness"},
      {"autonomy", "[model] [reference] [pullback] [grid]; params: absorb_radius, settle_time, tracking_tol, taus, offsets, autonomy_tol",
       "asymptotically autonomous dynamics: A(t) -> A_inf with forward compactness, trajectory convergence"},
      {"assumptions", "[plap]; params: b_start, b_stop, b_step, s_max, taus, tail_tol",
       "p-Laplacian data: growth/dissipativity, forcing tail, exponentially weighted k-integrals, absorbing radius"},
      {"plap-suite", "[plap] [pullback] [grid]; params: absorb_radius, settle_time, tracking_tol, taus, gronwall_span, c, alpha_sup",
       "p-Laplacian: Gronwall comparison with the frozen problem and A(t) -> A_inf of the frozen problem"},
  };
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.name << '\n';
    os << "  keys:     " << e.keys << '\n';
    os << "  verifies: " << e.verifies << '\n';
  }
  return os.str();
}

}  // namespace spa
