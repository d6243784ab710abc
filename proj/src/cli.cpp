#include "vortmod/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "vortmod/biotsavart.hpp"
#include "vortmod/errors.hpp"
#include "vortmod/fieldanalysis.hpp"
#include "vortmod/flowmodel.hpp"
#include "vortmod/logdomain.hpp"
#include "vortmod/modulus.hpp"
#include "vortmod/parallel.hpp"
#include "vortmod/simd/kernels.hpp"
#include "vortmod/svg.hpp"

#ifndef VORTMOD_VERSION
#define VORTMOD_VERSION "dev"
#endif

namespace vortmod {

namespace fs = std::filesystem;

namespace {

// Raised when outputs were written but a property or acceptance check failed.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string list_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

std::string list_string(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Canonical, replayable arguments of one command.
class Canonical {
 public:
  explicit Canonical(std::string command) : command_(std::move(command)) {}
  Canonical& add(const std::string& flag, const std::string& value) {
    params_[flag] = value;
    argv_.push_back("--" + flag);
    argv_.push_back(value);
    return *this;
  }
  Canonical& add(const std::string& flag, double v) { return add(flag, format_number(v)); }
  Canonical& add(const std::string& flag, int v) { return add(flag, std::to_string(v)); }
  Canonical& add(const std::string& flag, const std::vector<double>& v) {
    return v.empty() ? *this : add(flag, list_string(v));
  }

  RunManifest manifest() const {
    RunManifest m;
    m.command = command_;
    m.argv.push_back(command_);
    m.argv.insert(m.argv.end(), argv_.begin(), argv_.end());
    m.parameters = params_;
    m.tool_version = VORTMOD_VERSION;
    m.threads = thread_count();
    m.isa = simd::to_string(simd::active_isa());
    return m;
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::map<std::string, std::string> params_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void finish(const fs::path& out, RunManifest m, Clock::time_point t0) {
  m.timings["total_s"] = seconds_since(t0);
  write_manifest(out / "manifest.json", m);
}

std::string absolute_string(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// ---- node tables ----------------------------------------------------------

void write_nodes(const fs::path& path, const PiecewiseModulus& m, double L0, int n_max,
                 const CheckReport& p1, const CheckReport& p2) {
  TableBuilder t({"index", "L", "gap", "G", "drop", "touch", "x", "x_underflow", "property1_margin", "property2_margin"});
  t.meta("gamma", m.gamma()).meta("lambda", m.lambda()).meta("L0", L0).meta("n_max", std::to_string(n_max));
  t.meta("tail", "line_to_origin");
  auto margin = [](const CheckReport& r, int step) -> double {
    for (const auto& e : r.entries) {
      if (e.step == step) return e.margin;
    }
    return NAN;
  };
  for (const auto& n : m.nodes()) {
    const DirectScale x = to_direct(n.L);
    t.row({n.index, n.L, n.gap, n.G, n.drop, to_string(n.touch), x.x, x.underflowed, margin(p1, n.index), margin(p2, n.index)});
  }
  t.write(path);
}

PiecewiseModulus read_nodes(const fs::path& path) {
  const Table t = read_table(path);
  const double gamma = parse_number(t.meta_value("gamma"));
  const double lambda = parse_number(t.meta_value("lambda"));
  std::vector<ModulusNode> nodes;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ModulusNode n;
    n.index = static_cast<int>(t.number(i, "index"));
    n.L = t.number(i, "L");
    n.G = t.number(i, "G");
    n.gap = t.number(i, "gap");
    n.drop = t.number(i, "drop");
    const std::string& touch = t.text(i, "touch");
    if (touch == "upper") {
      n.touch = Touch::UpperEnvelope;
    } else if (touch == "lower") {
      n.touch = Touch::LowerEnvelope;
    } else {
      throw ConfigError(path.string() + ": bad touch flag '" + touch + "'");
    }
    nodes.push_back(n);
  }
  if (nodes.empty()) throw ConfigError(path.string() + ": empty node table");
  return PiecewiseModulus(gamma, lambda, std::move(nodes));
}

bool write_checks(const fs::path& path, const PiecewiseModulus& m) {
  TableBuilder t({"check", "step", "pass", "lhs", "rhs", "margin", "note"});
  bool ok = true;
  for (const auto& r : {check_property1(m), check_property2(m), check_concavity(m), check_alternation(m),
                        check_collinearity(m)}) {
    if (!r.notice.empty()) std::cerr << r.name << ": " << r.notice << '\n';
    for (const auto& e : r.entries) t.row({r.name, e.step, e.pass, e.lhs, e.rhs, e.margin, e.note});
    if (!r.passed()) {
      ok = false;
      const auto* f = r.first_failure();
      std::cerr << r.name << " failed at step " << f->step << (f->note.empty() ? "" : ": " + f->note) << '\n';
    }
  }
  t.write(path);
  return ok;
}

// ---- commands -------------------------------------------------------------

struct ConstructArgs {
  double gamma = 0.5, lambda = 1.0, L0 = 100.0;
  int n_max = 40;
};

void cmd_construct(const ConstructArgs& a, const fs::path& out) {
  const auto t0 = Clock::now();
  Canonical c("construct");
  c.add("gamma", a.gamma).add("lambda", a.lambda).add("L0", a.L0).add("n-max", a.n_max);
  RunManifest man = c.manifest();

  const PiecewiseModulus m = construct(a.gamma, a.lambda, a.L0, a.n_max);
  write_nodes(out / "nodes.csv", m, a.L0, a.n_max, check_property1(m), check_property2(m));
  const bool ok = write_checks(out / "checks.csv", m);
  man.outputs = {"nodes.csv", "checks.csv"};
  man.diagnostics["nodes"] = static_cast<double>(m.size());
  man.diagnostics["L_last"] = m.domain_end();
  finish(out, man, t0);
  if (!ok) throw ValidationFailure("construction checks failed");
}

void cmd_check(const std::string& nodes_path, const fs::path& out) {
  const auto t0 = Clock::now();
  Canonical c("check");
  c.add("nodes", absolute_string(nodes_path));
  RunManifest man = c.manifest();
  const PiecewiseModulus m = read_nodes(nodes_path);
  const bool ok = write_checks(out / "checks.csv", m);
  man.outputs = {"checks.csv"};
  finish(out, man, t0);
  if (!ok) throw ValidationFailure("property checks failed");
}

void cmd_eval(const std::string& nodes_path, const std::vector<double>& Ls, const fs::path& out) {
  const auto t0 = Clock::now();
  Canonical c("eval");
  c.add("nodes", absolute_string(nodes_path)).add("L", Ls);
  RunManifest man = c.manifest();
  const PiecewiseModulus m = read_nodes(nodes_path);
  TableBuilder t({"L", "G", "x", "x_underflow", "f_lower", "f_upper"});
  t.meta("gamma", m.gamma());
  for (double L : Ls) {
    const DirectScale x = to_direct(L);
    t.row({L, m.eval(L), x.x, x.underflowed, f_lower(L, m.gamma()), L > 1.0 ? f_upper(L, m.gamma()) : NAN});
  }
  t.write(out / "eval.csv");
  man.outputs = {"eval.csv"};
  finish(out, man, t0);
}

struct PredictArgs {
  std::string nodes;
  double c = 1.0;
  std::vector<double> t;
  std::vector<int> node_indices;
};

void cmd_predict(const PredictArgs& a, const fs::path& out) {
  const auto t0 = Clock::now();
  Canonical can("predict");
  can.add("nodes", absolute_string(a.nodes)).add("c", a.c).add("t", a.t);
  if (!a.node_indices.empty()) can.add("node", list_string(a.node_indices));
  RunManifest man = can.manifest();
  const PiecewiseModulus m = read_nodes(a.nodes);

  std::vector<int> idx = a.node_indices;
  if (idx.empty()) {
    for (int n = 1; n < static_cast<int>(m.size()); n += 2) idx.push_back(n);
  }
  TableBuilder tab({"t", "node", "L", "transported_L", "ratio", "bound", "pass", "note"});
  tab.meta("c", a.c).meta("gamma", m.gamma()).meta("lambda", m.lambda());
  bool ok = true;
  for (double t : a.t) {
    for (int n : idx) {
      if (n < 0 || n >= static_cast<int>(m.size())) throw std::out_of_range("node index " + std::to_string(n) + " out of range");
      if (n % 2 == 0) {
        std::cerr << "node " << n << " skipped: the ratio is defined at odd nodes\n";
        continue;
      }
      const auto k = static_cast<std::size_t>(n);
      const double L = m.node(k).L;
      const double bound = 0.5 * std::log(L);
      try {
        const double Lp = L + transported_offset(m, k, a.c * t);
        const double ratio = predicted_ratio_at_node(m, k, t, a.c);
        const bool pass = ratio >= bound;
        ok = ok && pass;
        tab.row({t, n, L, Lp, ratio, bound, pass, ""});
      } catch (const DomainError& e) {
        ok = false;
        tab.row({t, n, L, NAN, NAN, bound, false, "out-of-domain"});
      }
    }
  }
  tab.write(out / "predict.csv");
  man.outputs = {"predict.csv"};
  finish(out, man, t0);
  if (!ok) throw ValidationFailure("predicted ratio below bound or out of domain");
}

struct KeylemmaArgs {
  std::string data = "annulus";
  std::string config;
  std::vector<double> r;
  double r_min = 1e-3, r_max = 1e-1;
  int n_r = 21;
  std::vector<double> theta;
  int n_radial = 1024, n_angular = 1024;
  double q_rmin = 1e-8;
};

VorticityOracle keylemma_data(const KeylemmaArgs& a) {
  if (a.data == "annulus") return annulus_mode(0.1, 1.0, false);
  if (a.data == "cos-annulus") return annulus_mode(0.1, 1.0, true);
  if (a.data == "disk") return uniform_disk(0.5);
  if (a.data == "zero") return zero_vorticity();
  if (a.data == "demo") {
    const SimulationSetup s = a.config.empty() ? SimulationSetup{} : SimulationSetup::from_config(read_config(a.config));
    return initial_vorticity(s.profile(), s.bump, s.sim.r_outer);
  }
  throw ConfigError("unknown data set '" + a.data + "' (annulus, cos-annulus, disk, zero, demo)");
}

void cmd_keylemma(KeylemmaArgs a, const fs::path& out) {
  const auto t0 = Clock::now();
  if (a.r.empty()) {
    if (!(a.r_min > 0.0 && a.r_max >= a.r_min) || a.n_r < 1) throw ConfigError("bad radius range");
    for (int i = 0; i < a.n_r; ++i) {
      const double f = a.n_r == 1 ? 0.0 : static_cast<double>(i) / (a.n_r - 1);
      a.r.push_back(a.r_min * std::pow(a.r_max / a.r_min, f));
    }
  }
  if (a.theta.empty()) a.theta = {std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8};
  Canonical c("keylemma");
  c.add("data", a.data);
  if (!a.config.empty()) c.add("config", absolute_string(a.config));
  c.add("r", a.r).add("theta", a.theta).add("n-radial", a.n_radial).add("n-angular", a.n_angular).add("q-rmin", a.q_rmin);
  RunManifest man = c.manifest();

  QuadratureSpec q;
  q.n_radial = a.n_radial;
  q.n_angular = a.n_angular;
  q.r_min = a.q_rmin;
  const VorticityOracle w = keylemma_data(a);
  const RemainderScan scan = remainder_scan(w, a.r, a.theta, q);

  TableBuilder t({"r", "theta", "remainder", "i_s", "i_c"});
  t.meta("data", a.data).meta("n_radial", std::to_string(q.n_radial)).meta("n_angular", std::to_string(q.n_angular));
  for (const auto& row : scan.rows) t.row({row.r, row.theta, row.remainder, row.i_s, row.i_c});
  t.write(out / "scan.csv");
  if (!scan.notice.empty()) std::cerr << "keylemma: " << scan.notice << '\n';

  man.outputs = {"scan.csv"};
  man.diagnostics["max_remainder"] = scan.max_remainder;
  man.diagnostics["max_smallest_decade"] = scan.max_smallest_decade;
  man.diagnostics["max_largest_decade"] = scan.max_largest_decade;
  man.diagnostics["trend_checked"] = scan.trend_checked ? 1.0 : 0.0;
  finish(out, man, t0);
  if (scan.trend_checked && !scan.bounded) throw ValidationFailure("remainder grows toward small r");
}

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%04zu.csv", k);
  return buf;
}

void cmd_simulate(const std::string& config_path, const fs::path& out) {
  const auto t0 = Clock::now();
  const SimulationSetup s = SimulationSetup::from_config(read_config(config_path));
  Canonical c("simulate");
  c.add("config", absolute_string(config_path));
  RunManifest man = c.manifest();

  const BlobSystem sys0 = initial_data(s.profile(), s.bump, s.sim);
  const auto t_init = Clock::now();
  const RunResult res = run(sys0, s.tracers(), s.snapshot_times());
  man.timings["run_s"] = seconds_since(t_init);

  write_config(out / "config_echo.txt", s.to_config());
  man.outputs.push_back("config_echo.txt");

  TableBuilder index({"snapshot", "t", "file"});
  TableBuilder diag({"t", "total_circulation", "circulation_drift", "origin_speed", "max_axis_normal"});
  const double gamma0 = sys0.total_circulation();
  double worst_origin = 0.0, worst_axis = 0.0;
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const BlobSystem& b = res.snapshots[k];
    TableBuilder snap({"blob", "x1", "x2", "circulation", "core", "cell"});
    snap.meta("t", b.time);
    for (std::size_t j = 0; j < b.size(); ++j) {
      snap.row({static_cast<unsigned long>(j), b.x[j], b.y[j], b.circulation[j], b.core[j], b.cell_size[j]});
    }
    snap.write(out / snapshot_name(k));
    man.outputs.push_back(snapshot_name(k));
    index.row({static_cast<unsigned long>(k), b.time, snapshot_name(k)});

    // Axis probes at fixed points along both axes.
    std::vector<double> px, py;
    px.push_back(0.0);
    py.push_back(0.0);
    for (int i = 1; i <= 8; ++i) {
      const double r = s.sim.r_outer * i / 8.0;
      px.insert(px.end(), {r, 0.0});
      py.insert(py.end(), {0.0, r});
    }
    std::vector<double> ux(px.size()), uy(px.size());
    blob_velocity(b, px, py, ux, uy);
    const double origin = std::hypot(ux[0], uy[0]);
    double axis = 0.0;
    for (std::size_t i = 1; i < px.size(); i += 2) {
      axis = std::max({axis, std::abs(uy[i]), std::abs(ux[i + 1])});
    }
    worst_origin = std::max(worst_origin, origin);
    worst_axis = std::max(worst_axis, axis);
    diag.row({b.time, b.total_circulation(), b.total_circulation() - gamma0, origin, axis});
  }
  index.write(out / "snapshots.csv");
  diag.write(out / "diagnostics.csv");
  man.outputs.push_back("snapshots.csv");
  man.outputs.push_back("diagnostics.csv");

  TableBuilder tr({"tracer", "label", "t", "r", "theta"});
  const auto labels = SimulationSetup::tracer_labels();
  for (std::size_t i = 0; i < res.tracers.size(); ++i) {
    for (const auto& p : res.tracers[i].trajectory) {
      tr.row({static_cast<unsigned long>(i), labels.at(i), p.t, p.r, p.theta});
    }
  }
  tr.write(out / "tracers.csv");
  man.outputs.push_back("tracers.csv");

  man.diagnostics["blobs"] = static_cast<double>(sys0.size());
  man.diagnostics["steps"] = static_cast<double>(res.steps);
  man.diagnostics["total_circulation"] = gamma0;
  man.diagnostics["max_circulation_drift"] = res.max_circulation_drift;
  man.diagnostics["max_origin_speed"] = worst_origin;
  man.diagnostics["max_axis_normal"] = worst_axis;
  finish(out, man, t0);
}

struct AnalyzeArgs {
  std::string run;
  std::vector<double> rho;
  std::string mode = "both";
  int n_random = 60000;
  std::uint64_t seed = 20240601;
  double c = 0.5;
};

SamplerMode parse_mode(const std::string& m) {
  if (m == "witness") return SamplerMode::AxisWitness;
  if (m == "random") return SamplerMode::RandomPairs;
  if (m == "both") return SamplerMode::Both;
  throw ConfigError("unknown sampler mode '" + m + "' (witness, random, both)");
}

void cmd_analyze(const AnalyzeArgs& a, const fs::path& out) {
  const auto t0 = Clock::now();
  if (a.rho.empty()) throw ConfigError("analyze needs at least one --rho");
  Canonical c("analyze");
  c.add("run", absolute_string(a.run)).add("rho", a.rho).add("mode", a.mode).add("n-random", a.n_random)
      .add("seed", std::to_string(a.seed)).add("c", a.c);
  RunManifest man = c.manifest();
  man.seed = a.seed;

  const LoadedRun run = load_run(a.run);
  PairSampler sampler;
  sampler.mode = parse_mode(a.mode);
  sampler.c_exponent = a.c;
  sampler.n_random = a.n_random;
  sampler.seed = a.seed;
  sampler.region = SampleRegion::annulus(run.setup.sim.r_inner, run.setup.sim.r_outer);

  TableBuilder t({"t", "rho", "omega_hat", "ratio", "axis_probe", "witness_x1", "witness_x2", "witness_y1", "witness_y2"});
  t.meta("mode", a.mode).meta("seed", std::to_string(a.seed)).meta("c_exponent", a.c);
  std::vector<Series> series;
  for (double rho : a.rho) {
    const RatioSeries s = modulus_ratio_series(run.snapshots, rho, sampler);
    Series line{"rho = " + std::to_string(rho).substr(0, 6), s.times, s.ratios};
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const double probe = axis_pair_probe(run.snapshots[k], rho, a.c);
      t.row({s.times[k], rho, s.omega_hat[k], s.ratios[k], probe, s.witness_x[k].x, s.witness_x[k].y,
             s.witness_y[k].x, s.witness_y[k].y});
    }
    series.push_back(std::move(line));
  }
  t.write(out / "series.csv");
  write_line_chart(out / "ratio.svg", series, {"Empirical modulus ratio", "t", "omega_hat(t) / omega_hat(0)"});
  man.outputs = {"series.csv", "ratio.svg"};
  finish(out, man, t0);
}

// ---- option plumbing ------------------------------------------------------

std::string env_name(const std::string& flag) {
  std::string s = "VORTMOD_";
  for (char ch : flag) s += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

// Every long flag also reads VORTMOD_<FLAG>.
void attach_env(CLI::App& app) {
  for (CLI::Option* o : app.get_options()) {
    const auto& names = o->get_lnames();
    if (!names.empty() && names.front() != "help") o->envname(env_name(names.front()));
  }
  for (CLI::App* sub : app.get_subcommands({})) attach_env(*sub);
}

int dispatch(const std::vector<std::string>& args, int depth);

int rerun(const std::string& manifest_path, const std::string& out, unsigned threads, int depth) {
  if (depth > 0) throw ConfigError("a manifest cannot re-run another manifest");
  const RunManifest m = read_manifest(manifest_path);
  std::vector<std::string> args = m.argv;
  args.insert(args.end(), {"--out", out, "--threads", std::to_string(threads)});
  return dispatch(args, depth + 1);
}

int dispatch(const std::vector<std::string>& args, int depth) {
  CLI::App app{"Rough-modulus vorticity toolkit", "vortmod"};
  app.set_version_flag("--version", VORTMOD_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string out = "out";
  unsigned threads = 0;
  app.add_option("--out", out, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0 = hardware count, 1 = bit-exact)");

  std::function<void()> action;

  ConstructArgs ca;
  auto* construct_cmd = app.add_subcommand("construct", "Build the piecewise-linear modulus");
  construct_cmd->add_option("--gamma", ca.gamma)->check(CLI::Range(0.0, 1.0))->check([](const std::string& s) {
    const double g = std::stod(s);
    return g > 0.0 && g < 1.0 ? std::string{} : std::string("gamma must lie strictly inside (0,1)");
  });
  construct_cmd->add_option("--lambda", ca.lambda)->check(CLI::PositiveNumber);
  construct_cmd->add_option("--L0", ca.L0);
  construct_cmd->add_option("--n-max", ca.n_max)->check(CLI::Range(0, kMaxNodes));
  construct_cmd->callback([&] { action = [&] { cmd_construct(ca, out); }; });

  std::string nodes_path;
  auto* check_cmd = app.add_subcommand("check", "Re-run property checks on a node table");
  check_cmd->add_option("--nodes", nodes_path)->required()->check(CLI::ExistingFile);
  check_cmd->callback([&] { action = [&] { cmd_check(nodes_path, out); }; });

  std::vector<double> eval_L;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate G at log-abscissae");
  eval_cmd->add_option("--nodes", nodes_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--L", eval_L)->required()->delimiter(',');
  eval_cmd->callback([&] { action = [&] { cmd_eval(nodes_path, eval_L, out); }; });

  PredictArgs pa;
  auto* predict_cmd = app.add_subcommand("predict", "Predicted modulus ratios at odd nodes");
  predict_cmd->add_option("--nodes", pa.nodes)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--c", pa.c)->check(CLI::PositiveNumber);
  predict_cmd->add_option("--t", pa.t)->delimiter(',');
  predict_cmd->add_option("--node", pa.node_indices)->delimiter(',');
  predict_cmd->callback([&] { action = [&] { cmd_predict(pa, out); }; });

  KeylemmaArgs ka;
  auto* kl_cmd = app.add_subcommand("keylemma", "Key-lemma remainder scan");
  kl_cmd->add_option("--data", ka.data, "annulus, cos-annulus, disk, zero or demo");
  kl_cmd->add_option("--config", ka.config, "Simulation config for --data demo")->check(CLI::ExistingFile);
  kl_cmd->add_option("--r", ka.r)->delimiter(',');
  kl_cmd->add_option("--r-min", ka.r_min);
  kl_cmd->add_option("--r-max", ka.r_max);
  kl_cmd->add_option("--n-r", ka.n_r);
  kl_cmd->add_option("--theta", ka.theta)->delimiter(',');
  kl_cmd->add_option("--n-radial", ka.n_radial);
  kl_cmd->add_option("--n-angular", ka.n_angular);
  kl_cmd->add_option("--q-rmin", ka.q_rmin);
  kl_cmd->callback([&] { action = [&] { cmd_keylemma(ka, out); }; });

  std::string config_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Vortex-blob run from a config file");
  sim_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  sim_cmd->callback([&] { action = [&] { cmd_simulate(config_path, out); }; });

  AnalyzeArgs aa;
  auto* an_cmd = app.add_subcommand("analyze", "Modulus-ratio series of a simulation run");
  an_cmd->add_option("--run", aa.run)->required()->check(CLI::ExistingDirectory);
  an_cmd->add_option("--rho", aa.rho)->required()->delimiter(',');
  an_cmd->add_option("--mode", aa.mode);
  an_cmd->add_option("--n-random", aa.n_random)->check(CLI::NonNegativeNumber);
  an_cmd->add_option("--seed", aa.seed);
  an_cmd->add_option("--c", aa.c);
  an_cmd->callback([&] { action = [&] { cmd_analyze(aa, out); }; });

  std::string manifest_path;
  auto* rerun_cmd = app.add_subcommand("rerun", "Replay a run from its manifest");
  rerun_cmd->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  rerun_cmd->callback([&] { action = [&] { throw std::logic_error("rerun handled by dispatch"); }; });

  attach_env(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  set_thread_count(threads);
  if (rerun_cmd->parsed()) return rerun(manifest_path, out, threads, depth);

  fs::create_directories(out);
  action();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  try {
    return dispatch(args, 0);
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const PropertyViolation& e) {
    std::cerr << "construction failed at step " << e.step() << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CflViolation& e) {
    std::cerr << "CFL violation: " << e.what() << " (try dt <= " << e.suggested_dt() << ")\n";
    return kExitNumerical;
  } catch (const BracketError& e) {
    std::cerr << "root finding failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "index error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

// ---- simulation setup -----------------------------------------------------

SimulationSetup SimulationSetup::from_config(const ConfigMap& cfg) {
  SimulationSetup s;
  ConfigMap left = cfg;
  auto num = [&](const char* key, double& v) {
    if (auto it = left.find(key); it != left.end()) {
      v = parse_number(it->second);
      left.erase(it);
    }
  };
  auto integer = [&](const char* key, int& v) {
    double d = v;
    num(key, d);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(std::string(key) + " must be an integer");
    v = static_cast<int>(d);
  };
  num("gamma", s.gamma);
  num("lambda", s.lambda);
  num("L0", s.L0);
  integer("n_max", s.n_max);
  if (auto it = left.find("initial"); it != left.end()) {
    s.initial = it->second;
    left.erase(it);
  }
  num("envelope_L_core", s.envelope_L_core);
  num("bump_delta", s.bump.delta);
  num("g_one", s.sim.cutoff.g_one);
  num("hold_until", s.sim.cutoff.hold_until);
  num("cutoff", s.sim.cutoff.cutoff);
  integer("n_radial_cells", s.sim.n_radial_cells);
  integer("n_angular_cells", s.sim.n_angular_cells);
  num("r_inner", s.sim.r_inner);
  num("r_outer", s.sim.r_outer);
  num("dt", s.sim.dt);
  num("t_end", s.sim.t_end);
  num("core_delta_factor", s.sim.core_delta_factor);
  num("snapshot_every", s.snapshot_every);
  num("tracer_r0", s.tracer_r0);
  num("tracer_c", s.tracer_c);
  num("tracer_pair_offset", s.tracer_pair_offset);
  num("axis_tracer_r", s.axis_tracer_r);
  if (!left.empty()) throw ConfigError("unknown config key '" + left.begin()->first + "'");

  if (s.initial != "modulus" && s.initial != "envelope") throw ConfigError("initial must be modulus or envelope");
  s.sim.validate();
  s.bump.validate();
  if (!(s.snapshot_every > 0.0)) throw ConfigError("snapshot_every must be positive");
  if (!(s.tracer_r0 > 0.0 && s.tracer_r0 < 1.0)) throw ConfigError("tracer_r0 must lie in (0,1)");
  if (!(s.tracer_c > 0.0 && s.tracer_c < 1.0)) throw ConfigError("tracer_c must lie in (0,1)");
  if (!(s.tracer_pair_offset > 0.0)) throw ConfigError("tracer_pair_offset must be positive");
  return s;
}

ConfigMap SimulationSetup::to_config() const {
  ConfigMap c;
  c["gamma"] = format_number(gamma);
  c["lambda"] = format_number(lambda);
  c["L0"] = format_number(L0);
  c["n_max"] = std::to_string(n_max);
  c["initial"] = initial;
  c["envelope_L_core"] = format_number(envelope_L_core);
  c["bump_delta"] = format_number(bump.delta);
  c["g_one"] = format_number(sim.cutoff.g_one);
  c["hold_until"] = format_number(sim.cutoff.hold_until);
  c["cutoff"] = format_number(sim.cutoff.cutoff);
  c["n_radial_cells"] = std::to_string(sim.n_radial_cells);
  c["n_angular_cells"] = std::to_string(sim.n_angular_cells);
  c["r_inner"] = format_number(sim.r_inner);
  c["r_outer"] = format_number(sim.r_outer);
  c["dt"] = format_number(sim.dt);
  c["t_end"] = format_number(sim.t_end);
  c["core_delta_factor"] = format_number(sim.core_delta_factor);
  c["snapshot_every"] = format_number(snapshot_every);
  c["tracer_r0"] = format_number(tracer_r0);
  c["tracer_c"] = format_number(tracer_c);
  c["tracer_pair_offset"] = format_number(tracer_pair_offset);
  c["axis_tracer_r"] = format_number(axis_tracer_r);
  return c;
}

RadialProfile SimulationSetup::profile() const {
  if (initial == "envelope") return RadialProfile::from_envelope(gamma, envelope_L_core, sim.cutoff);
  return RadialProfile::from_modulus(construct(gamma, lambda, L0, n_max), sim.cutoff);
}

std::vector<Tracer> SimulationSetup::tracers() const {
  const double theta0 = std::pow(tracer_r0, tracer_c);
  return {Tracer(tracer_r0, theta0), Tracer(tracer_r0 + tracer_pair_offset, theta0), Tracer(axis_tracer_r, 0.0)};
}

std::vector<std::string> SimulationSetup::tracer_labels() { return {"witness", "pair", "axis"}; }

std::vector<double> SimulationSetup::snapshot_times() const {
  std::vector<double> t;
  const double end = sim.t_end;
  for (int k = 0;; ++k) {
    const double v = k * snapshot_every;
    if (v > end * (1.0 + 1e-12)) break;
    t.push_back(std::min(v, end));
  }
  if (t.back() < end) t.push_back(end);
  return t;
}

LoadedRun load_run(const fs::path& dir) {
  LoadedRun r;
  r.setup = SimulationSetup::from_config(read_config(dir / "config_echo.txt"));
  const Table index = read_table(dir / "snapshots.csv");
  for (std::size_t k = 0; k < index.rows.size(); ++k) {
    const Table t = read_table(dir / index.text(k, "file"));
    BlobSystem b;
    b.config = r.setup.sim;
    b.time = index.number(k, "t");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      b.x.push_back(t.number(i, "x1"));
      b.y.push_back(t.number(i, "x2"));
      b.circulation.push_back(t.number(i, "circulation"));
      b.core.push_back(t.number(i, "core"));
      b.cell_size.push_back(t.number(i, "cell"));
    }
    r.snapshots.push_back(std::move(b));
  }
  const Table tr = read_table(dir / "tracers.csv");
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    const auto id = static_cast<std::size_t>(tr.number(i, "tracer"));
    if (id >= r.tracers.size()) {
      r.tracers.resize(id + 1);
      r.tracer_labels.resize(id + 1);
    }
    Tracer& t = r.tracers[id];
    const TracerSample s{tr.number(i, "t"), tr.number(i, "r"), tr.number(i, "theta")};
    if (t.trajectory.empty()) {
      t.r0 = s.r;
      t.theta0 = s.theta;
    }
    t.trajectory.push_back(s);
    r.tracer_labels[id] = tr.text(i, "label");
  }
  return r;
}

}  // namespace vortmod
