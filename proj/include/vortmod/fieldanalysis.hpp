#pragma once

// Empirical modulus of continuity of simulated fields. Omega_hat is a max
// over sampled pairs, so it can only underestimate the true sup.

#include <cstdint>
#include <vector>

#include "vortmod/biotsavart.hpp"
#include "vortmod/eulersim.hpp"
#include "vortmod/geometry.hpp"

namespace vortmod {

enum class SamplerMode { AxisWitness, RandomPairs, Both };
enum class PairDirection { Any, AxisAligned };

struct SampleRegion {
  enum class Kind { QuadrantAnnulus, Box };
  Kind kind = Kind::QuadrantAnnulus;
  double a0 = 1e-3, a1 = 2.0;  // radii, or x-range for Box
  double b0 = 0.0, b1 = 1.0;   // y-range for Box

  static SampleRegion annulus(double r_min, double r_max) { return {Kind::QuadrantAnnulus, r_min, r_max, 0.0, 0.0}; }
  static SampleRegion box(double x0, double x1, double y0, double y1) { return {Kind::Box, x0, x1, y0, y1}; }
  bool contains(Vec2 p) const;
};

// Witness pairs are x = (rho, rho^c), y = (rho, 0) in polar form. Random
// pairs are x uniform in the region (log-uniform radius for the annulus) and
// y = x + rho U e; pairs leaving the region are dropped, not redrawn, so the
// sample for n_random is a prefix of the sample for any larger n_random.
struct PairSampler {
  SamplerMode mode = SamplerMode::Both;
  double c_exponent = 0.5;
  int n_random = 4096;
  std::uint64_t seed = 20240601;
  SampleRegion region;
  PairDirection direction = PairDirection::Any;

  void validate() const;
};

struct ModulusEstimate {
  double rho = 0.0;
  double omega_hat = 0.0;  // running max over rho' <= rho
  Vec2 witness_x;
  Vec2 witness_y;
  std::size_t pairs = 0;
};

std::vector<ModulusEstimate> empirical_modulus(const BatchField& field, std::vector<double> rho_list,
                                               const PairSampler& sampler);

struct RatioSeries {
  double rho = 0.0;
  std::vector<double> times;
  std::vector<double> omega_hat;
  std::vector<double> ratios;
  std::vector<Vec2> witness_x;
  std::vector<Vec2> witness_y;
};

RatioSeries modulus_ratio_series(const std::vector<BlobSystem>& snapshots, double rho,
                                 const PairSampler& sampler);

double axis_pair_probe(const BlobSystem& sys, double rho, double c_exponent);

}  // namespace vortmod
