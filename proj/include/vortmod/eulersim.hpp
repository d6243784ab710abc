#pragma once

// Whole-plane 2D Euler by the vortex-blob method. Blobs live in the open
// first quadrant; odd-odd symmetry is realized by the three signed images
// inside the summation kernels, so the axes are streamlines and the origin
// is a fixed point.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortmod/biotsavart.hpp"
#include "vortmod/geometry.hpp"
#include "vortmod/modulus.hpp"
#include "vortmod/simd/kernels.hpp"

namespace vortmod {

enum class BumpProfile { SmoothExp };

// Angular profile h: 1 on [delta, pi/2 - delta], 0 at 0 and pi/2, a C-infinity
// ramp in between; extended to the circle with the sign pattern of sin 2t.
struct BumpSpec {
  double delta = 0.05 * 1.5707963267948966;
  BumpProfile profile = BumpProfile::SmoothExp;

  void validate() const;
  double operator()(double theta) const;
};

// Compact extension of g above the modulus' own domain: linear in r from
// (x_core, g_core) to (1, g_one), held at g_one up to hold_until, then a C1
// cubic ramp to 0 at cutoff.
struct RadialExtension {
  double g_one = 1.0;
  double hold_until = 1.5;
  double cutoff = 2.0;

  void validate() const;
};

// The radial profile g(r) of the initial vorticity.
class RadialProfile {
 public:
  // g(r) = G(-ln r) on r <= x_0 = e^{-L_0}.
  static RadialProfile from_modulus(PiecewiseModulus m, RadialExtension ext = {});
  // g(r) = |ln r|^{-gamma} on r <= e^{-L_core}, the control data.
  static RadialProfile from_envelope(double gamma, double L_core = 1.0, RadialExtension ext = {});

  double operator()(double r) const;
  double core_scale() const noexcept { return x_core_; }
  const RadialExtension& extension() const noexcept { return ext_; }
  const std::optional<PiecewiseModulus>& modulus() const noexcept { return modulus_; }

 private:
  RadialProfile() = default;
  double core(double L) const;

  std::optional<PiecewiseModulus> modulus_;
  double gamma_ = 0.5;
  double L_core_ = 1.0;
  double x_core_ = 0.0;
  double g_core_ = 0.0;
  RadialExtension ext_;
};

struct SimConfig {
  int n_radial_cells = 64;
  int n_angular_cells = 48;
  double r_inner = 1e-3;
  double r_outer = 2.0;
  double dt = 2e-3;
  double t_end = 0.5;
  double core_delta_factor = 1.5;
  RadialExtension cutoff;

  void validate() const;
};

// Structure of arrays; circulations and cores never change after initial_data.
struct BlobSystem {
  std::vector<double> x, y, circulation, core;
  std::vector<double> cell_size;  // the blob's own cell, used by the CFL guard
  double time = 0.0;
  SimConfig config;

  std::size_t size() const noexcept { return x.size(); }
  simd::BlobSources sources() const { return {x, y, circulation, core}; }
  double total_circulation() const;
};

// The oracle w0(r, t) = g(r) h(t), odd-odd.
VorticityOracle initial_vorticity(const RadialProfile& g, const BumpSpec& bump, double r_outer);

BlobSystem initial_data(const RadialProfile& g, const BumpSpec& bump, const SimConfig& cfg);

Vec2 blob_velocity(const BlobSystem& sys, Vec2 point);
void blob_velocity(const BlobSystem& sys, std::span<const double> px, std::span<const double> py,
                   std::span<double> ux, std::span<double> uy);

double reconstruct_vorticity(const BlobSystem& sys, PolarPoint p);
void reconstruct_vorticity(const BlobSystem& sys, std::span<const double> px,
                           std::span<const double> py, std::span<double> out);
// reconstruct_vorticity as an oracle, with a batch path for quadrature grids.
VorticityOracle reconstructed_oracle(const BlobSystem& sys);

struct TracerSample {
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

struct Tracer {
  double r0 = 0.0;
  double theta0 = 0.0;
  std::vector<TracerSample> trajectory;

  Tracer() = default;
  Tracer(double r0_, double theta0_) : r0(r0_), theta0(theta0_) { trajectory.push_back({0.0, r0_, theta0_}); }
  const TracerSample& current() const { return trajectory.back(); }
};

// Throws CflViolation when dt |u_j| >= cell_j for some blob.
void check_cfl(const BlobSystem& sys, std::span<const double> ux, std::span<const double> uy, double dt);

// One classical RK4 step; tracers (optional) ride along in the same stage fields.
BlobSystem step_rk4(const BlobSystem& sys, double dt, std::vector<Tracer>* tracers = nullptr);

struct RunResult {
  std::vector<BlobSystem> snapshots;
  std::vector<Tracer> tracers;
  std::size_t steps = 0;
  double max_circulation_drift = 0.0;
};

// Marches to cfg.t_end; each snapshot time is hit exactly by shortening the
// step that would cross it.
RunResult run(const BlobSystem& sys, std::vector<Tracer> tracers, std::vector<double> snapshot_times);

struct FlowFit {
  double c_fit = 0.0;
  double residual = 0.0;  // rms misfit / rms signal
  bool degenerate = false;
  std::string note;
};

// Least squares for ln r(t) = ln r0 - c g(r0) |ln r0| t. The trajectory is
// flagged when ln r climbs back from its lowest point by more than
// kFitReboundTolerance of the total descent.
inline constexpr double kFitReboundTolerance = 0.02;
FlowFit fit_flow_exponent(const Tracer& tr, const RadialProfile& g);

struct YudovichFit {
  double k = 0.0;
  bool contained = false;
  double worst_margin = 0.0;  // min over samples of the log-space slack, < 0 on violation
};

// Fits k on the first half of the horizon (largest k the samples demand,
// times `safety`) and checks containment over the whole horizon.
YudovichFit fit_yudovich(const Tracer& a, const Tracer& b, double safety = 2.0);

}  // namespace vortmod
