// Scalar reference kernels. These define the expected results for the
// vectorized variants.

#include <cmath>
#include <numbers>

#include "vortmod/simd/kernels.hpp"

namespace vortmod::simd::detail {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

// (1 - exp(-r2/core2)) / r2, with the removable singularity at r2 = 0 sent to 0
// (the contribution is multiplied by d, which vanishes there).
inline double mollified_factor(double r2, double inv_core2) {
  if (r2 == 0.0) return 0.0;
  return -std::expm1(-r2 * inv_core2) / r2;
}

struct Contribution {
  double x, y;
};

inline Contribution image_velocity(double tx, double ty, double sx, double sy, double s,
                                   double inv_core2) {
  const double dx = tx - sx;
  const double dy = ty - sy;
  const double q = s * mollified_factor(dx * dx + dy * dy, inv_core2);
  return {q * dy, q * -dx};
}

}  // namespace

void induced_velocity_scalar(const BlobSources& src, const Targets& tgt, std::size_t begin,
                             std::size_t end, double* ux, double* uy) {
  const std::size_t n = src.x.size();
  for (std::size_t i = begin; i < end; ++i) {
    const double tx = tgt.x[i];
    const double ty = tgt.y[i];
    double ax = 0.0, ay = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double sx = src.x[j], sy = src.y[j], g = src.strength[j];
      const double ic = 1.0 / (src.core[j] * src.core[j]);
      const auto q1 = image_velocity(tx, ty, sx, sy, g, ic);
      const auto q2 = image_velocity(tx, ty, -sx, sy, -g, ic);
      const auto q3 = image_velocity(tx, ty, -sx, -sy, g, ic);
      const auto q4 = image_velocity(tx, ty, sx, -sy, -g, ic);
      // This grouping makes the axis-normal components cancel exactly.
      ax += (q1.x + q2.x) + (q4.x + q3.x);
      ay += (q1.y + q2.y) + (q4.y + q3.y);
    }
    ux[i] = ax * kInvTwoPi;
    uy[i] = ay * kInvTwoPi;
  }
}

void reconstructed_vorticity_scalar(const BlobSources& src, const Targets& tgt,
                                    std::size_t begin, std::size_t end, double* w) {
  const std::size_t n = src.x.size();
  for (std::size_t i = begin; i < end; ++i) {
    const double tx = tgt.x[i];
    const double ty = tgt.y[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double sx = src.x[j], sy = src.y[j];
      const double ic = 1.0 / (src.core[j] * src.core[j]);
      const double amp = src.strength[j] * ic * std::numbers::inv_pi;
      const double ax = tx - sx, bx = tx + sx;
      const double ay = ty - sy, by = ty + sy;
      const double e1 = std::exp(-(ax * ax + ay * ay) * ic);
      const double e2 = std::exp(-(bx * bx + ay * ay) * ic);
      const double e3 = std::exp(-(bx * bx + by * by) * ic);
      const double e4 = std::exp(-(ax * ax + by * by) * ic);
      acc += amp * ((e1 - e2) + (e3 - e4));
    }
    w[i] = acc;
  }
}

Velocity quadrature_velocity_scalar(const QuadratureNodes& nodes, double tx, double ty,
                                    std::ptrdiff_t skip) {
  double ax = 0.0, ay = 0.0;
  const std::size_t n = nodes.x.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<std::ptrdiff_t>(j) == skip) continue;
    const double dx = tx - nodes.x[j];
    const double dy = ty - nodes.y[j];
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) continue;
    const double q = nodes.weight[j] / r2;
    ax += q * dy;
    ay -= q * dx;
  }
  return {ax * kInvTwoPi, ay * kInvTwoPi};
}

}  // namespace vortmod::simd::detail
