// spalab: run one experiment from a config file, or list the experiments.
#include <iostream>

#include <CLI11.hpp>

#include "spa/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spalab: selected pullback attractor experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "Config file")->required();
  auto* out_opt = run->add_option("--out", out, "Output directory (overrides `out`)");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides `seed`)");
  run->add_flag("-q,--quiet", quiet, "No progress lines");

  auto* list = app.add_subcommand("list", "List experiments, their config keys and what they verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*list) {
    std::cout << spa::list_experiments();
    return 0;
  }

  spa::RunOptions opts;
  if (*out_opt) opts.out_dir = out;
  if (*seed_opt) opts.seed = seed;
  if (!quiet) opts.log = &std::cerr;
  const spa::RunResult r = spa::run(config, opts);
  for (const auto& c : r.checks) std::cout << (c.verdict ? "PASS " : "FAIL ") << c.name << '\n';
  if (!r.error.empty()) std::cout << "ERROR " << r.error << '\n';
  std::cout << "manifest: " << r.out_dir << "/manifest.json\n";
  return r.exit_code;
}
