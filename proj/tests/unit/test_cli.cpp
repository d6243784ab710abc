#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vortmod/cli.hpp"
#include "vortmod/tables.hpp"

using namespace vortmod;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vortmod_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(std::vector<std::string> args, const fs::path& out) {
  args.push_back("--out");
  args.push_back(out.string());
  args.push_back("--threads");
  args.push_back("1");
  return run_cli(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A deliberately small and short simulation.
const char* kTinyConfig =
    "gamma = 0.5\nlambda = 1\nL0 = 100\nn_max = 10\ninitial = modulus\n"
    "n_radial_cells = 12\nn_angular_cells = 8\nr_inner = 1e-3\nr_outer = 2\n"
    "dt = 2e-3\nt_end = 0.01\nsnapshot_every = 0.005\n";

}  // namespace

TEST_CASE("construct writes nodes and checks") {
  const fs::path out = scratch("construct");
  REQUIRE(cli({"construct", "--n-max", "12"}, out) == kExitOk);
  const Table nodes = read_table(out / "nodes.csv");
  CHECK(nodes.rows.size() == 13);
  CHECK(nodes.number(0, "L") == 100.0);
  CHECK(nodes.number(1, "L") == doctest::Approx(102.31402337221258).epsilon(1e-14));
  CHECK(fs::exists(out / "checks.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const RunManifest m = read_manifest(out / "manifest.json");
  CHECK(m.command == "construct");
  CHECK(m.threads == 1);

  const fs::path single = scratch("single");
  REQUIRE(cli({"construct", "--n-max", "0"}, single) == kExitOk);
  CHECK(read_table(single / "nodes.csv").rows.size() == 1);
}

TEST_CASE("usage errors exit with 2") {
  const fs::path out = scratch("usage");
  CHECK(cli({"construct", "--gamma", "1.2"}, out) == kExitUsage);
  CHECK(cli({"construct", "--gamma", "0"}, out) == kExitUsage);
  CHECK(cli({"construct", "--n-max", "-1"}, out) == kExitUsage);
  CHECK(cli({"construct", "--lambda", "-1"}, out) == kExitUsage);
  CHECK(cli({"frobnicate"}, out) == kExitUsage);
  CHECK(cli({}, out) == kExitUsage);
  CHECK(cli({"check", "--nodes", (out / "nope.csv").string()}, out) == kExitUsage);

  const fs::path run = scratch("usage_run");
  CHECK(cli({"analyze", "--run", run.string()}, out) == kExitUsage);
  CHECK(cli({"analyze", "--run", run.string(), "--rho", ""}, out) == kExitUsage);

  std::ofstream(out / "bad.cfg") << "gamma = 0.5\ngamma = 0.4\n";
  CHECK(cli({"simulate", "--config", (out / "bad.cfg").string()}, out) == kExitUsage);
  std::ofstream(out / "unknown.cfg") << "gamma = 0.5\nwibble = 1\n";
  CHECK(cli({"simulate", "--config", (out / "unknown.cfg").string()}, out) == kExitUsage);
}

TEST_CASE("construct failure exits with 3") {
  const fs::path out = scratch("fail");
  CHECK(cli({"construct", "--L0", "2"}, out) == kExitValidation);
}

TEST_CASE("check, eval and predict on a saved table") {
  const fs::path base = scratch("pipeline");
  REQUIRE(cli({"construct", "--n-max", "8"}, base / "c") == kExitOk);
  const std::string nodes = (base / "c" / "nodes.csv").string();

  REQUIRE(cli({"check", "--nodes", nodes}, base / "k") == kExitOk);
  CHECK(slurp(base / "k" / "checks.csv") == slurp(base / "c" / "checks.csv"));

  REQUIRE(cli({"eval", "--nodes", nodes, "--L", "100,101,1000"}, base / "e") == kExitOk);
  const Table ev = read_table(base / "e" / "eval.csv");
  REQUIRE(ev.rows.size() == 3);
  CHECK(ev.number(0, "G") == doctest::Approx(std::log(100.0) / 10.0));
  CHECK(cli({"eval", "--nodes", nodes, "--L", "50"}, base / "e2") == kExitValidation);

  REQUIRE(cli({"predict", "--nodes", nodes, "--t", "1", "--node", "1,2,3"}, base / "p") == kExitOk);
  const Table pr = read_table(base / "p" / "predict.csv");
  REQUIRE(pr.rows.size() == 2);  // node 2 skipped
  CHECK(pr.number(0, "ratio") == doctest::Approx(4.6581478172877962276).epsilon(1e-9));
  CHECK(pr.text(0, "pass") == "true");

  REQUIRE(cli({"predict", "--nodes", nodes}, base / "p0") == kExitOk);
  CHECK(read_table(base / "p0" / "predict.csv").rows.empty());
  CHECK(cli({"predict", "--nodes", nodes, "--t", "1", "--node", "99"}, base / "p1") == kExitValidation);
  CHECK(cli({"predict", "--nodes", nodes, "--t", "10", "--node", "1"}, base / "p2") == kExitValidation);
}

TEST_CASE("keylemma scans") {
  const fs::path base = scratch("keylemma");
  REQUIRE(cli({"keylemma", "--data", "zero", "--n-r", "3", "--n-radial", "32", "--n-angular", "32"}, base / "z") ==
          kExitOk);
  const Table z = read_table(base / "z" / "scan.csv");
  CHECK(z.rows.size() == 9);
  for (std::size_t i = 0; i < z.rows.size(); ++i) CHECK(z.number(i, "remainder") == 0.0);

  REQUIRE(cli({"keylemma", "--r", "0.01", "--theta", "0.5", "--n-radial", "64", "--n-angular", "64"}, base / "one") ==
          kExitOk);
  CHECK(read_table(base / "one" / "scan.csv").rows.size() == 1);
  CHECK(cli({"keylemma", "--data", "vortex-street"}, base / "bad") == kExitUsage);
}

TEST_CASE("simulate, load and analyze a tiny run") {
  const fs::path base = scratch("sim");
  std::ofstream(base / "tiny.cfg") << kTinyConfig;
  REQUIRE(cli({"simulate", "--config", (base / "tiny.cfg").string()}, base / "run") == kExitOk);
  const LoadedRun run = load_run(base / "run");
  REQUIRE(run.snapshots.size() == 3);
  CHECK(run.snapshots.front().time == 0.0);
  CHECK(run.snapshots.back().time == doctest::Approx(0.01));
  CHECK(run.snapshots[0].size() == 12u * 8u);
  CHECK(run.tracers.size() == 3);
  CHECK(run.tracer_labels[0] == "witness");
  CHECK(run.setup.sim.n_radial_cells == 12);

  const Table diag = read_table(base / "run" / "diagnostics.csv");
  for (std::size_t i = 0; i < diag.rows.size(); ++i) {
    CHECK(diag.number(i, "circulation_drift") == 0.0);
    CHECK(diag.number(i, "origin_speed") == 0.0);
    CHECK(diag.number(i, "max_axis_normal") == 0.0);
  }

  REQUIRE(cli({"analyze", "--run", (base / "run").string(), "--rho", "0.05,0.1", "--n-random", "500"}, base / "an") ==
          kExitOk);
  const Table s = read_table(base / "an" / "series.csv");
  CHECK(s.rows.size() == 6);
  CHECK(s.number(0, "ratio") == 1.0);
  CHECK(fs::exists(base / "an" / "ratio.svg"));
  CHECK(cli({"analyze", "--run", (base / "run").string(), "--rho", "0.1", "--mode", "psychic"}, base / "an2") ==
        kExitUsage);

  std::ofstream(base / "zero.cfg") << "t_end = 0\nn_radial_cells = 8\nn_angular_cells = 8\n";
  REQUIRE(cli({"simulate", "--config", (base / "zero.cfg").string()}, base / "zero") == kExitOk);
  CHECK(load_run(base / "zero").snapshots.size() == 1);
}

TEST_CASE("environment variables fill unset flags") {
  const fs::path out = scratch("env");
  setenv("VORTMOD_N_MAX", "3", 1);
  const int code = cli({"construct"}, out);
  unsetenv("VORTMOD_N_MAX");
  REQUIRE(code == kExitOk);
  CHECK(read_table(out / "nodes.csv").rows.size() == 4);
}

TEST_CASE("rerun reproduces outputs") {
  const fs::path base = scratch("rerun");
  REQUIRE(cli({"construct", "--n-max", "6", "--L0", "200"}, base / "a") == kExitOk);
  REQUIRE(cli({"rerun", "--manifest", (base / "a" / "manifest.json").string()}, base / "b") == kExitOk);
  CHECK(slurp(base / "a" / "nodes.csv") == slurp(base / "b" / "nodes.csv"));
  CHECK(slurp(base / "a" / "checks.csv") == slurp(base / "b" / "checks.csv"));

  // a manifest that points at rerun is refused
  RunManifest loop = read_manifest(base / "a" / "manifest.json");
  loop.argv = {"rerun", "--manifest", (base / "a" / "manifest.json").string()};
  write_manifest(base / "loop.json", loop);
  CHECK(cli({"rerun", "--manifest", (base / "loop.json").string()}, base / "c") == kExitUsage);
}
