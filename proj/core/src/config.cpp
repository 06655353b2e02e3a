#include "spa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spa/errors.hpp"

namespace spa {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_double(const std::string& text, int line, const std::string& key) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects a finite number, got '" + text + "'", line);
  return v;
}

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : "[" + section + "] " + key;
}

std::vector<double> uniform_grid(const ConfigFile& f, const std::string& sec, const std::string& prefix,
                                 double start_default, double stop_default, double step_default) {
  const double start = f.get_double(sec, prefix + "start", start_default);
  const double stop = f.get_double(sec, prefix + "stop", stop_default);
  const double step = f.get_double(sec, prefix + "step", step_default);
  const int line = f.find(sec, prefix + "step") ? f.find(sec, prefix + "step")->line : 0;
  if (!(step > 0.0)) throw ConfigError(where(sec, prefix + "step") + " must be positive", line);
  if (!(stop >= start)) throw ConfigError(where(sec, prefix + "stop") + " must not precede start", line);
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> g;
  for (long long i = 0; i <= n; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

BenchmarkSpec read_benchmark(const ConfigFile& f, const std::string& sec) {
  f.require_known(sec, {"kind", "forcing", "level", "amplitude", "rate", "frequency", "phase", "eps", "dt"});
  BenchmarkSpec spec;
  const auto kind_entry = f.find(sec, "kind");
  if (!kind_entry) throw ConfigError("[" + sec + "] needs 'kind'", 0);
  const std::string kind = lower(kind_entry->value);
  if (kind == "linear")
    spec.kind = BenchmarkSpec::Kind::linear;
  else if (kind == "cubic")
    spec.kind = BenchmarkSpec::Kind::cubic;
  else if (kind == "inclusion")
    spec.kind = BenchmarkSpec::Kind::inclusion;
  else if (kind == "plap")
    spec.kind = BenchmarkSpec::Kind::plap;
  else
    throw ConfigError("unknown model kind '" + kind_entry->value + "'", kind_entry->line);

  const std::string forcing = lower(f.get_string(sec, "forcing", "zero"));
  const int fline = f.find(sec, "forcing") ? f.find(sec, "forcing")->line : 0;
  ForcingSpec fs;
  if (forcing == "zero")
    fs.kind = ForcingSpec::Kind::zero;
  else if (forcing == "constant")
    fs.kind = ForcingSpec::Kind::constant;
  else if (forcing == "sine")
    fs.kind = ForcingSpec::Kind::sine;
  else if (forcing == "decaying")
    fs.kind = ForcingSpec::Kind::decaying;
  else if (forcing == "exponential")
    fs.kind = ForcingSpec::Kind::exponential;
  else
    throw ConfigError("unknown forcing '" + forcing + "'", fline);
  fs.level = f.get_double(sec, "level", 0.0);
  fs.amplitude = f.get_double(sec, "amplitude", 1.0);
  fs.rate = f.get_double(sec, "rate", 1.0);
  fs.frequency = f.get_double(sec, "frequency", 1.0);
  fs.phase = f.get_double(sec, "phase", 0.0);
  spec.forcing = fs;
  spec.eps = f.get_double(sec, "eps", 1.0);
  spec.dt = f.get_double(sec, "dt", 1e-3);
  try {
    spec.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("[") + sec + "] " + e.what(), kind_entry->line);
  }
  return spec;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  cfg.sections_[section];
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError("unterminated section header", line);
      section = lower(trim(content.substr(1, content.size() - 2)));
      if (section.empty()) throw ConfigError("empty section name", line);
      if (cfg.section_lines_.count(section)) throw ConfigError("duplicate section [" + section + "]", line);
      cfg.section_lines_[section] = line;
      cfg.sections_[section];
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string key = lower(trim(content.substr(0, eq)));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", line);
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    sec[key] = {value, line};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key).has_value();
}

std::optional<ConfigFile::Entry> ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   std::optional<std::string> fallback) const {
  if (auto e = find(section, key)) return e->value;
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

double ConfigFile::get_double(const std::string& section, const std::string& key, std::optional<double> fallback) const {
  if (auto e = find(section, key)) return parse_double(e->value, e->line, key);
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              std::optional<long long> fallback) const {
  if (auto e = find(section, key)) {
    long long v = 0;
    const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
      throw ConfigError("'" + key + "' expects an integer, got '" + e->value + "'", e->line);
    return v;
  }
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::optional<std::uint64_t> fallback) const {
  if (auto e = find(section, key)) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
      throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + e->value + "'", e->line);
    return v;
  }
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback) const {
  if (auto e = find(section, key)) {
    const std::string v = lower(e->value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("'" + key + "' expects true/false, got '" + e->value + "'", e->line);
  }
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key,
                                         std::optional<std::vector<double>> fallback) const {
  if (auto e = find(section, key)) {
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) throw ConfigError("empty item in list '" + key + "'", e->line);
      out.push_back(parse_double(t, e->line, key));
    }
    return out;
  }
  if (fallback) return *fallback;
  throw ConfigError("missing required key " + where(section, key), 0);
}

void ConfigFile::require_known(const std::string& section, const std::vector<std::string>& allowed) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return;
  const std::pair<const std::string, Entry>* worst = nullptr;
  for (const auto& kv : s->second)
    if (std::find(allowed.begin(), allowed.end(), kv.first) == allowed.end())
      if (!worst || kv.second.line < worst->second.line) worst = &kv;
  if (worst) throw ConfigError("unknown key " + where(section, worst->first), worst->second.line);
}

void ConfigFile::require_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [name, line] : section_lines_)
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw ConfigError("unknown section [" + name + "]", line);
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::attract:
      return "attract";
    case Experiment::continuity:
      return "continuity";
    case Experiment::limits:
      return "limits";
    case Experiment::autonomy:
      return "autonomy";
    case Experiment::assumptions:
      return "assumptions";
    case Experiment::plap_suite:
      return "plap-suite";
  }
  return "";
}

std::optional<Experiment> experiment_from_name(const std::string& name) {
  for (auto e : {Experiment::attract, Experiment::continuity, Experiment::limits, Experiment::autonomy,
                 Experiment::assumptions, Experiment::plap_suite})
    if (experiment_name(e) == name) return e;
  return std::nullopt;
}

ExperimentConfig build_config(const ConfigFile& f) {
  f.require_sections({"model", "reference", "plap", "pullback", "grid", "params"});
  f.require_known("", {"experiment", "seed", "out"});

  ExperimentConfig cfg;
  cfg.source = f;
  const auto exp_entry = f.find("", "experiment");
  if (!exp_entry) throw ConfigError("missing required key 'experiment'", 0);
  const auto exp = experiment_from_name(lower(exp_entry->value));
  if (!exp) throw ConfigError("unknown experiment '" + exp_entry->value + "'", exp_entry->line);
  cfg.experiment = *exp;
  cfg.seed = f.get_u64("", "seed", 1);
  cfg.out_dir = f.get_string("", "out", "spalab-out");

  // model
  const bool plap_experiment = cfg.experiment == Experiment::assumptions || cfg.experiment == Experiment::plap_suite;
  if (f.has_section("model")) {
    cfg.model = read_benchmark(f, "model");
    cfg.model_is_plap = cfg.model.kind == BenchmarkSpec::Kind::plap;
  } else if (plap_experiment) {
    cfg.model_is_plap = true;
    cfg.model.kind = BenchmarkSpec::Kind::plap;
  } else {
    throw ConfigError("experiment '" + experiment_name(cfg.experiment) + "' needs a [model] section", exp_entry->line);
  }
  if (plap_experiment && !cfg.model_is_plap)
    throw ConfigError("experiment '" + experiment_name(cfg.experiment) + "' runs on the plap model only",
                      f.find("model", "kind")->line);

  f.require_known("plap", {"p", "r", "n", "theta", "eps_reg", "a0", "dt", "c0", "c", "variants"});
  cfg.plap.p = f.get_double("plap", "p", cfg.plap.p);
  cfg.plap.r = f.get_double("plap", "r", cfg.plap.r);
  cfg.plap.N = static_cast<int>(f.get_int("plap", "n", cfg.plap.N));
  cfg.plap.theta = f.get_double("plap", "theta", cfg.plap.theta);
  cfg.plap.eps_reg = f.get_double("plap", "eps_reg", cfg.plap.eps_reg);
  cfg.plap.a0 = f.get_double("plap", "a0", cfg.plap.a0);
  cfg.plap.dt = f.get_double("plap", "dt", cfg.plap.dt);
  cfg.plap.C0 = f.get_double("plap", "c0", cfg.plap.C0);
  cfg.plap.C = f.get_double("plap", "c", cfg.plap.C);
  cfg.plap.use_variants = f.get_bool("plap", "variants", cfg.plap.use_variants);
  try {
    cfg.plap.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("[plap] ") + e.what(), 0);
  }

  if (f.has_section("reference")) {
    cfg.reference = read_benchmark(f, "reference");
    if (cfg.reference->kind == BenchmarkSpec::Kind::plap)
      throw ConfigError("[reference] must be an ODE benchmark", f.find("reference", "kind")->line);
  }

  // pullback
  f.require_known("pullback", {"horizons", "ensemble", "radius", "growth", "prune_tol", "section_tol",
                               "switch_period", "workers"});
  auto& pb = cfg.pullback;
  pb.horizons = f.get_list("pullback", "horizons", pb.horizons);
  const auto ens = f.get_int("pullback", "ensemble", static_cast<long long>(pb.ensemble_size));
  if (ens < 1) throw ConfigError("[pullback] ensemble must be positive", f.find("pullback", "ensemble")->line);
  pb.ensemble_size = static_cast<std::size_t>(ens);
  pb.sampler_radius = f.get_double("pullback", "radius", pb.sampler_radius);
  pb.sampler_growth = f.get_double("pullback", "growth", pb.sampler_growth);
  pb.prune_tol = f.get_double("pullback", "prune_tol", pb.prune_tol);
  pb.section_tol = f.get_double("pullback", "section_tol", pb.section_tol);
  pb.switch_period = f.get_double("pullback", "switch_period", pb.switch_period);
  const auto workers = f.get_int("pullback", "workers", 0);
  if (workers < 0) throw ConfigError("[pullback] workers must be >= 0", f.find("pullback", "workers")->line);
  pb.workers = static_cast<unsigned>(workers);
  pb.seed = cfg.seed;
  try {
    pb.validate(cfg.model_is_plap ? cfg.plap.theta : 1.0);
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("[pullback] ") + e.what(), 0);
  }

  // grid
  f.require_known("grid", {"start", "stop", "step", "points"});
  if (f.has("grid", "points")) {
    if (f.has("grid", "start") || f.has("grid", "stop") || f.has("grid", "step"))
      throw ConfigError("[grid] give either points or start/stop/step", f.find("grid", "points")->line);
    cfg.grid = f.get_list("grid", "points");
    for (std::size_t i = 1; i < cfg.grid.size(); ++i)
      if (!(cfg.grid[i] > cfg.grid[i - 1]))
        throw ConfigError("[grid] points must increase", f.find("grid", "points")->line);
  } else {
    cfg.grid = uniform_grid(f, "grid", "", 0.0, 0.0, 1.0);
  }

  // experiment parameters
  static const std::map<Experiment, std::vector<std::string>> allowed = {
      {Experiment::attract, {"oracle_tol", "quasi_depth", "quasi_tol"}},
      {Experiment::continuity, {"t", "deltas", "slope_bound"}},
      {Experiment::limits, {"direction", "fractions", "tol", "oracle_lo", "oracle_hi", "oracle_tol"}},
      {Experiment::autonomy, {"absorb_radius", "settle_time", "tracking_tol", "taus", "offsets", "autonomy_tol"}},
      {Experiment::assumptions, {"b_start", "b_stop", "b_step", "s_max", "taus", "tail_tol"}},
      {Experiment::plap_suite,
       {"absorb_radius", "settle_time", "tracking_tol", "taus", "gronwall_span", "c", "alpha_sup"}},
  };
  f.require_known("params", allowed.at(cfg.experiment));
  auto& p = cfg.params;
  auto opt = [&](const char* key) -> std::optional<double> {
    if (f.has("params", key)) return f.get_double("params", key);
    return std::nullopt;
  };
  p.oracle_tol = opt("oracle_tol");
  p.quasi_depth = opt("quasi_depth");
  p.quasi_tol = f.get_double("params", "quasi_tol", p.quasi_tol);
  p.t = f.get_double("params", "t", p.t);
  p.deltas = f.get_list("params", "deltas", p.deltas);
  p.slope_bound = opt("slope_bound");
  p.direction = lower(f.get_string("params", "direction", p.direction));
  if (p.direction != "forward" && p.direction != "backward" && p.direction != "both")
    throw ConfigError("[params] direction must be forward, backward or both", f.find("params", "direction")->line);
  p.fractions = f.get_list("params", "fractions", p.fractions);
  p.limit_tol = opt("tol");
  p.oracle_lo = opt("oracle_lo");
  p.oracle_hi = opt("oracle_hi");
  if (p.oracle_lo.has_value() != p.oracle_hi.has_value())
    throw ConfigError("[params] oracle_lo and oracle_hi go together", 0);
  if (cfg.experiment == Experiment::limits && p.oracle_tol.has_value() && !p.oracle_lo)
    throw ConfigError("[params] oracle_tol needs oracle_lo/oracle_hi", f.find("params", "oracle_tol")->line);
  p.absorb_radius = f.get_double("params", "absorb_radius", p.absorb_radius);
  p.settle_time = f.get_double("params", "settle_time", p.settle_time);
  p.tracking_tol = opt("tracking_tol");
  if (f.has("params", "taus")) p.taus = f.get_list("params", "taus");
  p.offsets = f.get_list("params", "offsets", p.offsets);
  p.autonomy_tol = f.get_double("params", "autonomy_tol", p.autonomy_tol);
  p.b_grid = uniform_grid(f, "params", "b_", 0.0, 50.0, 1.0);
  p.s_max = f.get_double("params", "s_max", p.s_max);
  p.tail_tol = f.get_double("params", "tail_tol", p.tail_tol);
  p.gronwall_span = f.get_double("params", "gronwall_span", p.gronwall_span);
  p.c = f.get_double("params", "c", p.c);
  p.alpha_sup = f.get_double("params", "alpha_sup", p.alpha_sup);

  for (double d : p.deltas)
    if (!(d > 0.0)) throw ConfigError("[params] deltas must be positive", f.find("params", "deltas")->line);
  if (!(p.absorb_radius > 0.0) || !(p.settle_time > 0.0))
    throw ConfigError("[params] absorb_radius and settle_time must be positive", 0);
  if (!(p.c > 0.0)) throw ConfigError("[params] c must be positive", f.find("params", "c")->line);
  if (!(p.gronwall_span > 0.0)) throw ConfigError("[params] gronwall_span must be positive", 0);

  // experiment-level requirements
  const std::size_t min_grid = cfg.experiment == Experiment::limits       ? 4
                               : cfg.experiment == Experiment::continuity ? 1
                               : cfg.experiment == Experiment::autonomy || cfg.experiment == Experiment::plap_suite
                                   ? 4
                                   : 1;
  if (cfg.grid.size() < min_grid)
    throw ConfigError("[grid] experiment '" + experiment_name(cfg.experiment) + "' needs at least " +
                          std::to_string(min_grid) + " grid times",
                      0);
  if (cfg.experiment == Experiment::autonomy) {
    if (!cfg.reference) throw ConfigError("experiment 'autonomy' needs a [reference] section", exp_entry->line);
    if (!cfg.reference->forcing.time_independent())
      throw ConfigError("[reference] model must be autonomous (zero or constant forcing)",
                        f.find("reference", "forcing") ? f.find("reference", "forcing")->line : 0);
  }
  if (cfg.experiment == Experiment::continuity) {
    const double dmax = *std::max_element(p.deltas.begin(), p.deltas.end());
    if (p.t - dmax < cfg.grid.front() - 1e-9 || p.t + dmax > cfg.grid.back() + 1e-9)
      throw ConfigError("[params] t +- max(deltas) must lie inside the grid", 0);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return build_config(ConfigFile::load(path)); }

}  // namespace spa
