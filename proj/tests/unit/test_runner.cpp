#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "spa/runner.hpp"

using namespace spa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spalab-test-runner" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "run.cfg";
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

const char* quick_attract =
    "experiment = attract\nseed = 5\n"
    "[model]\nkind = linear\nforcing = sine\n"
    "[pullback]\nhorizons = 20, 40\nensemble = 4\n"
    "[grid]\nstart = 0\nstop = 1\nstep = 0.5\n";

}  // namespace

TEST_CASE("passing run: exit 0, csv files and manifest") {
  const auto dir = scratch("pass");
  const auto r = run(write_config(dir, quick_attract).string(), {dir.string() + "/out", std::nullopt, nullptr});
  CHECK(r.exit_code == 0);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].name == "sections");
  CHECK(r.checks[0].verdict);
  const auto out = dir / "out";
  CHECK(fs::exists(out / "sections.csv"));
  CHECK(fs::exists(out / "family.csv"));
  CHECK(slurp(out / "family.csv").rfind("t,point_index,x0\n", 0) == 0);
  CHECK(slurp(out / "sections.csv").rfind("t,oracle_hausdorff,cauchy_gap,horizon,points,diameter\n", 0) == 0);

  const auto m = manifest(out);
  CHECK(m["status"] == "pass");
  CHECK(m["exit_code"] == 0);
  CHECK(m["experiment"] == "attract");
  CHECK(m["seed"] == 5);
  CHECK(m["checks"][0]["verdict"] == "pass");
  CHECK(m["config"]["model"]["forcing"] == "sine");
  CHECK(m["config"]["top"]["seed"] == "5");
}

TEST_CASE("failing verdict: exit 2") {
  const auto dir = scratch("fail");
  const std::string text = std::string(quick_attract) + "[params]\noracle_tol = 1e-14\n";
  const auto r = run(write_config(dir, text).string(), {dir.string() + "/out", std::nullopt, nullptr});
  CHECK(r.exit_code == 2);
  CHECK_FALSE(r.checks.at(0).verdict);
  CHECK(manifest(dir / "out")["status"] == "fail");
}

TEST_CASE("bad configs: exit 1 and a manifest with the error") {
  const auto dir = scratch("bad");
  const auto r = run(write_config(dir, "experiment = attract\n[model]\nkind = quartic\n").string(),
                     {dir.string() + "/out", std::nullopt, nullptr});
  CHECK(r.exit_code == 1);
  CHECK(r.error.find("line 3") != std::string::npos);
  const auto m = manifest(dir / "out");
  CHECK(m["status"] == "error");
  CHECK(m["exit_code"] == 1);
  CHECK(m["error"].get<std::string>().find("quartic") != std::string::npos);

  const auto missing = run((dir / "nope.cfg").string(), {dir.string() + "/out2", std::nullopt, nullptr});
  CHECK(missing.exit_code == 1);
  CHECK(fs::exists(dir / "out2" / "manifest.json"));
}

TEST_CASE("seed override reaches the manifest and the sampler") {
  const auto dir = scratch("seed");
  const auto cfg = write_config(dir, quick_attract).string();
  const auto a = run(cfg, {dir.string() + "/a", 11, nullptr});
  const auto b = run(cfg, {dir.string() + "/b", 11, nullptr});
  CHECK(manifest(dir / "a")["seed"] == 11);
  CHECK(slurp(dir / "a" / "family.csv") == slurp(dir / "b" / "family.csv"));
  CHECK(slurp(dir / "a" / "sections.csv") == slurp(dir / "b" / "sections.csv"));
}

TEST_CASE("progress log") {
  const auto dir = scratch("log");
  std::ostringstream log;
  run(write_config(dir, quick_attract).string(), {dir.string() + "/out", std::nullopt, &log});
  CHECK_FALSE(log.str().empty());
}

TEST_CASE("experiment listing") {
  const auto text = list_experiments();
  std::vector<std::size_t> at;
  for (const char* name : {"attract", "continuity", "limits", "autonomy", "assumptions", "plap-suite"}) {
    const auto pos = text.find(std::string(name) + "\n");
    CAPTURE(name);
    REQUIRE(pos != std::string::npos);
    at.push_back(pos);
  }
  for (std::size_t i = 1; i < at.size(); ++i) CHECK(at[i] > at[i - 1]);
  CHECK(text == list_experiments());
}

TEST_CASE("csv writers") {
  std::ostringstream os;
  write_cloud_csv(os, SetCloud({{1.0, 2.0}, {3.0, 4.5}}, MetricDescriptor::euclidean(2)));
  CHECK(os.str() == "point_index,x0,x1\n0,1,2\n1,3,4.5\n");
  std::ostringstream fam;
  write_family_csv(fam, make_family("f", {0.0, 1.0}, {SetCloud::scalars({0.5}), SetCloud::scalars({-1.0, 1.0})}));
  CHECK(fam.str() == "t,point_index,x0\n0,0,0.5\n1,0,-1\n1,1,1\n");
}

TEST_CASE("shipped continuity config passes") {
  const auto dir = scratch("shipped");
  const auto r = run(std::string(SPALAB_CONFIG_DIR) + "/continuity_linear.cfg", {dir.string(), std::nullopt, nullptr});
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "continuity.csv"));
}
