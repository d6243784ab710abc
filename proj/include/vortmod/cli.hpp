#pragma once

// Command-line front end: `vortmod <command> [flags]`. Every command writes
// its outputs plus manifest.json into --out; `rerun --manifest` replays a
// manifest's canonical arguments.

#include <filesystem>
#include <string>
#include <vector>

#include "vortmod/eulersim.hpp"
#include "vortmod/tables.hpp"

namespace vortmod {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitValidation = 3, kExitNumerical = 4 };

// Arguments exclude the program name.
int run_cli(const std::vector<std::string>& args);

// Everything a `simulate` run needs, read from a flat config file.
struct SimulationSetup {
  double gamma = 0.5;
  double lambda = 1.0;
  double L0 = 100.0;
  int n_max = 40;
  std::string initial = "modulus";  // or "envelope"
  double envelope_L_core = 1.0;
  BumpSpec bump;
  SimConfig sim;
  double snapshot_every = 0.05;
  double tracer_r0 = 0.05;
  double tracer_c = 0.5;
  double tracer_pair_offset = 1e-4;
  double axis_tracer_r = 0.5;

  static SimulationSetup from_config(const ConfigMap& cfg);
  ConfigMap to_config() const;

  RadialProfile profile() const;
  std::vector<Tracer> tracers() const;
  static std::vector<std::string> tracer_labels();
  std::vector<double> snapshot_times() const;
};

struct LoadedRun {
  SimulationSetup setup;
  std::vector<BlobSystem> snapshots;
  std::vector<Tracer> tracers;
  std::vector<std::string> tracer_labels;
};

LoadedRun load_run(const std::filesystem::path& dir);

}  // namespace vortmod
