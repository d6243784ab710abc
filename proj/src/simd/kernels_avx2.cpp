// AVX2+FMA kernels. Lanes run over targets for the blob sums, so each target
// is still reduced over sources in index order, matching the scalar
// reference up to the exp implementation.

#include <immintrin.h>

#include <algorithm>
#include <cstdint>
#include <numbers>

#include "avx2_math.hpp"
#include "vortmod/simd/kernels.hpp"

namespace vortmod::simd::detail {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

struct Lanes {
  alignas(32) double x[4];
  alignas(32) double y[4];
};

// Targets [i, i+4) with the tail padded by repeating the last valid target.
inline Lanes load_targets(const Targets& tgt, std::size_t i, std::size_t end) {
  Lanes l;
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t idx = std::min(i + k, end - 1);
    l.x[k] = tgt.x[idx];
    l.y[k] = tgt.y[idx];
  }
  return l;
}

struct Vel {
  __m256d x, y;
};

inline Vel image_velocity(__m256d tx, __m256d ty, __m256d sx, __m256d sy, __m256d s,
                          __m256d inv_core2) {
  const __m256d dx = _mm256_sub_pd(tx, sx);
  const __m256d dy = _mm256_sub_pd(ty, sy);
  const __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
  const __m256d m = avx2_math::one_minus_exp_neg(_mm256_mul_pd(r2, inv_core2));
  const __m256d zero = _mm256_setzero_pd();
  const __m256d is_zero = _mm256_cmp_pd(r2, zero, _CMP_EQ_OQ);
  const __m256d f = _mm256_blendv_pd(_mm256_div_pd(m, r2), zero, is_zero);
  const __m256d q = _mm256_mul_pd(s, f);
  return {_mm256_mul_pd(q, dy), _mm256_mul_pd(q, _mm256_sub_pd(zero, dx))};
}

}  // namespace

void induced_velocity_avx2(const BlobSources& src, const Targets& tgt, std::size_t begin,
                           std::size_t end, double* ux, double* uy) {
  const std::size_t n = src.x.size();
  const __m256d scale = _mm256_set1_pd(kInvTwoPi);
  for (std::size_t i = begin; i < end; i += 4) {
    const Lanes l = load_targets(tgt, i, end);
    const __m256d tx = _mm256_load_pd(l.x);
    const __m256d ty = _mm256_load_pd(l.y);
    __m256d ax = _mm256_setzero_pd();
    __m256d ay = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n; ++j) {
      const double c = src.core[j];
      const __m256d ic = _mm256_set1_pd(1.0 / (c * c));
      const __m256d sx = _mm256_set1_pd(src.x[j]);
      const __m256d sy = _mm256_set1_pd(src.y[j]);
      const __m256d nsx = _mm256_set1_pd(-src.x[j]);
      const __m256d nsy = _mm256_set1_pd(-src.y[j]);
      const __m256d g = _mm256_set1_pd(src.strength[j]);
      const __m256d ng = _mm256_set1_pd(-src.strength[j]);
      const Vel q1 = image_velocity(tx, ty, sx, sy, g, ic);
      const Vel q2 = image_velocity(tx, ty, nsx, sy, ng, ic);
      const Vel q3 = image_velocity(tx, ty, nsx, nsy, g, ic);
      const Vel q4 = image_velocity(tx, ty, sx, nsy, ng, ic);
      ax = _mm256_add_pd(ax, _mm256_add_pd(_mm256_add_pd(q1.x, q2.x), _mm256_add_pd(q4.x, q3.x)));
      ay = _mm256_add_pd(ay, _mm256_add_pd(_mm256_add_pd(q1.y, q2.y), _mm256_add_pd(q4.y, q3.y)));
    }
    alignas(32) double rx[4];
    alignas(32) double ry[4];
    _mm256_store_pd(rx, _mm256_mul_pd(ax, scale));
    _mm256_store_pd(ry, _mm256_mul_pd(ay, scale));
    const std::size_t valid = std::min<std::size_t>(4, end - i);
    for (std::size_t k = 0; k < valid; ++k) {
      ux[i + k] = rx[k];
      uy[i + k] = ry[k];
    }
  }
}

void reconstructed_vorticity_avx2(const BlobSources& src, const Targets& tgt, std::size_t begin,
                                  std::size_t end, double* w) {
  const std::size_t n = src.x.size();
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = begin; i < end; i += 4) {
    const Lanes l = load_targets(tgt, i, end);
    const __m256d tx = _mm256_load_pd(l.x);
    const __m256d ty = _mm256_load_pd(l.y);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n; ++j) {
      const double c = src.core[j];
      const double ic_s = 1.0 / (c * c);
      const __m256d ic = _mm256_set1_pd(ic_s);
      const __m256d amp = _mm256_set1_pd(src.strength[j] * ic_s * std::numbers::inv_pi);
      const __m256d sx = _mm256_set1_pd(src.x[j]);
      const __m256d sy = _mm256_set1_pd(src.y[j]);
      const __m256d ax = _mm256_sub_pd(tx, sx), bx = _mm256_add_pd(tx, sx);
      const __m256d ay = _mm256_sub_pd(ty, sy), by = _mm256_add_pd(ty, sy);
      const __m256d ax2 = _mm256_mul_pd(ax, ax), bx2 = _mm256_mul_pd(bx, bx);
      const __m256d ay2 = _mm256_mul_pd(ay, ay), by2 = _mm256_mul_pd(by, by);
      auto gauss = [&](__m256d a2, __m256d b2) {
        return avx2_math::exp_nonpositive(_mm256_sub_pd(zero, _mm256_mul_pd(_mm256_add_pd(a2, b2), ic)));
      };
      const __m256d e1 = gauss(ax2, ay2);
      const __m256d e2 = gauss(bx2, ay2);
      const __m256d e3 = gauss(bx2, by2);
      const __m256d e4 = gauss(ax2, by2);
      acc = _mm256_add_pd(
          acc, _mm256_mul_pd(amp, _mm256_add_pd(_mm256_sub_pd(e1, e2), _mm256_sub_pd(e3, e4))));
    }
    alignas(32) double r[4];
    _mm256_store_pd(r, acc);
    const std::size_t valid = std::min<std::size_t>(4, end - i);
    for (std::size_t k = 0; k < valid; ++k) w[i + k] = r[k];
  }
}

Velocity quadrature_velocity_avx2(const QuadratureNodes& nodes, double tx, double ty,
                                  std::ptrdiff_t skip) {
  const std::size_t n = nodes.x.size();
  const std::size_t body = n - n % 4;
  const __m256d vtx = _mm256_set1_pd(tx);
  const __m256d vty = _mm256_set1_pd(ty);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d lane_index = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d ax = zero, ay = zero;
  for (std::size_t j = 0; j < body; j += 4) {
    const __m256d dx = _mm256_sub_pd(vtx, _mm256_loadu_pd(&nodes.x[j]));
    const __m256d dy = _mm256_sub_pd(vty, _mm256_loadu_pd(&nodes.y[j]));
    const __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d drop = _mm256_cmp_pd(r2, zero, _CMP_EQ_OQ);
    if (skip >= 0 && static_cast<std::size_t>(skip) >= j && static_cast<std::size_t>(skip) < j + 4) {
      const __m256d target_lane = _mm256_set1_pd(static_cast<double>(static_cast<std::size_t>(skip) - j));
      drop = _mm256_or_pd(drop, _mm256_cmp_pd(lane_index, target_lane, _CMP_EQ_OQ));
    }
    const __m256d q = _mm256_blendv_pd(_mm256_div_pd(_mm256_loadu_pd(&nodes.weight[j]), r2), zero, drop);
    ax = _mm256_fmadd_pd(q, dy, ax);
    ay = _mm256_fnmadd_pd(q, dx, ay);
  }
  alignas(32) double lx[4];
  alignas(32) double ly[4];
  _mm256_store_pd(lx, ax);
  _mm256_store_pd(ly, ay);
  double sx = (lx[0] + lx[1]) + (lx[2] + lx[3]);
  double sy = (ly[0] + ly[1]) + (ly[2] + ly[3]);
  for (std::size_t j = body; j < n; ++j) {
    if (static_cast<std::ptrdiff_t>(j) == skip) continue;
    const double dx = tx - nodes.x[j];
    const double dy = ty - nodes.y[j];
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) continue;
    const double q = nodes.weight[j] / r2;
    sx += q * dy;
    sy -= q * dx;
  }
  return {sx * kInvTwoPi, sy * kInvTwoPi};
}

}  // namespace vortmod::simd::detail
