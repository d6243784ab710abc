#pragma once

// Velocity from vorticity: polar quadrature of the Biot–Savart integral,
// the I^s / I^c radial operators and the normalized remainder of the
// key-lemma decomposition
//   u(r,t) - u(0) - (1/2pi)(-cos t, sin t) r I^s(r) - (1/2pi)(sin t, cos t) r I^c(r).
//
// Quadrature grid: radial cells uniform in ln s, anchored at r_max and
// stepping down by du = ln(r_max/r_min)/n_radial, crossed with n_angular
// uniform angular cells. Both directions use cell midpoints.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vortmod/geometry.hpp"
#include "vortmod/simd/kernels.hpp"

namespace vortmod {

enum class Symmetry { None, OddOdd };

// Values at Cartesian points, for fields that are cheaper to evaluate in bulk.
using BatchField = std::function<void(std::span<const double> x, std::span<const double> y,
                                      std::span<double> out)>;

// Oracles must be safe to call concurrently.
struct VorticityOracle {
  std::function<double(double r, double theta)> eval;
  double sup_norm = 0.0;
  double support_radius = 0.0;
  Symmetry symmetry = Symmetry::None;
  BatchField batch;  // optional; must agree with eval

  double operator()(double r, double theta) const {
    return r > support_radius ? 0.0 : eval(r, theta);
  }
};

enum class RadialRule { LogUniform };

struct QuadratureSpec {
  RadialRule radial_rule = RadialRule::LogUniform;
  int n_radial = 1024;
  int n_angular = 1024;
  double r_min = 1e-8;
  double r_max = 0.0;  // <= 0: use the oracle's support radius

  void validate() const;
  double resolved_r_max(const VorticityOracle& w) const;
};

// Cached per-cell angular moments for one (oracle, spec) pair; answers
// I^s(r), I^c(r) for any r > 0 by extending the grid downward on demand.
class RadialMoments {
 public:
  RadialMoments(VorticityOracle w, QuadratureSpec q);

  double i_s(double r);
  double i_c(double r);

 private:
  struct Moments {
    double s = 0.0;
    double c = 0.0;
  };
  Moments angular_moments(double radius) const;
  Moments integral(double r);
  void extend_to(std::size_t cells);

  VorticityOracle w_;
  QuadratureSpec q_;
  double log_r_max_;
  double du_;
  // cumulative[k] = integral over the k topmost cells.
  std::vector<Moments> cumulative_;
};

double i_s(const VorticityOracle& w, double r, const QuadratureSpec& q);
double i_c(const VorticityOracle& w, double r, const QuadratureSpec& q);

struct DirectVelocity {
  Vec2 u;
  double excluded_bound = 0.0;  // bound on the omitted singular cell's share
  bool resolution_warning = false;
};

// Nodes of the 2D quadrature with weights omega * cell area, cached so that
// many evaluation points share one pass over the oracle.
class QuadratureGrid {
 public:
  QuadratureGrid(const VorticityOracle& w, const QuadratureSpec& q);

  DirectVelocity velocity(PolarPoint p, simd::Isa isa = simd::active_isa()) const;
  std::size_t size() const noexcept { return x_.size(); }

 private:
  std::ptrdiff_t cell_index(PolarPoint p) const;

  QuadratureSpec q_;
  double log_r_max_;
  double du_;
  double dtheta_;
  std::vector<double> x_, y_, weight_, value_, area_;
};

DirectVelocity velocity_direct(const VorticityOracle& w, PolarPoint p, const QuadratureSpec& q);

double keylemma_remainder(const VorticityOracle& w, PolarPoint p, const QuadratureSpec& q);

struct RemainderRow {
  double r = 0.0;
  double theta = 0.0;
  double remainder = 0.0;
  double i_s = 0.0;
  double i_c = 0.0;
};

struct RemainderScan {
  std::vector<RemainderRow> rows;
  double max_remainder = 0.0;
  double max_smallest_decade = 0.0;
  double max_largest_decade = 0.0;
  bool trend_checked = false;
  bool bounded = true;  // max over smallest decade <= 2x max over largest decade
  std::string notice;
};

RemainderScan remainder_scan(const VorticityOracle& w, const std::vector<double>& r_values,
                             const std::vector<double>& theta_values, const QuadratureSpec& q);

// Built-in oracles.
VorticityOracle zero_vorticity();
// sin(2 theta) on a <= s <= b (or cos(2 theta) when `cosine`).
VorticityOracle annulus_mode(double a, double b, bool cosine = false);
// Indicator of the disk s <= a.
VorticityOracle uniform_disk(double a);

}  // namespace vortmod
