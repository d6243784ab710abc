#pragma once

// Pairwise summation kernels behind the vortex-blob simulator and the
// Biot–Savart quadrature. Each kernel has a scalar reference implementation
// and, on x86-64, an AVX2+FMA variant chosen at runtime. The variants are
// equivalence-tested against the reference; they are not bit-identical
// because the AVX2 path uses a polynomial exp.
//
// Orientation: K(d) = (1/2pi) (d_2, -d_1) / |d|^2, for which the key-lemma
// decomposition u ~ (1/2pi) r I^s (-cos, sin) holds with I^s >= 0 data.

#include <cstddef>
#include <span>

namespace vortmod::simd {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);
bool isa_available(Isa isa);
// Best available ISA unless overridden by force_isa() or VORTMOD_SIMD=scalar.
Isa active_isa();
void force_isa(Isa isa);
void clear_forced_isa();

// Quadrant blobs. Each source j implicitly carries three images with signs
// (+,-,+,-) at (x,y), (-x,y), (-x,-y), (x,-y).
struct BlobSources {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> strength;
  std::span<const double> core;  // Gaussian mollifier width, > 0
};

struct Targets {
  std::span<const double> x;
  std::span<const double> y;
};

// Mollified induced velocity
//   u(t) = sum_j sum_images s Gamma_j K(t - y) (1 - exp(-|t-y|^2/delta_j^2)).
// Parallel over targets; every target is reduced over sources in index order,
// so results do not depend on the thread count.
void induced_velocity(const BlobSources& src, const Targets& tgt, std::span<double> ux,
                      std::span<double> uy, Isa isa);

// Gaussian reconstruction sum_j sum_images s Gamma_j exp(-|t-y|^2/delta_j^2)/(pi delta_j^2).
void reconstructed_vorticity(const BlobSources& src, const Targets& tgt, std::span<double> w,
                             Isa isa);

struct QuadratureNodes {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> weight;  // omega * cell area
};

struct Velocity {
  double x = 0.0;
  double y = 0.0;
};

// Singular sum over nodes of weight_j K(t - y_j), omitting node `skip` (or
// none when skip < 0). One target; lanes run over nodes.
Velocity quadrature_velocity(const QuadratureNodes& nodes, double tx, double ty,
                             std::ptrdiff_t skip, Isa isa);

namespace detail {
// Single-threaded range kernels used by the dispatcher.
void induced_velocity_scalar(const BlobSources& src, const Targets& tgt, std::size_t begin,
                             std::size_t end, double* ux, double* uy);
void reconstructed_vorticity_scalar(const BlobSources& src, const Targets& tgt,
                                    std::size_t begin, std::size_t end, double* w);
Velocity quadrature_velocity_scalar(const QuadratureNodes& nodes, double tx, double ty,
                                    std::ptrdiff_t skip);
#if defined(VORTMOD_HAVE_AVX2)
void induced_velocity_avx2(const BlobSources& src, const Targets& tgt, std::size_t begin,
                           std::size_t end, double* ux, double* uy);
void reconstructed_vorticity_avx2(const BlobSources& src, const Targets& tgt, std::size_t begin,
                                  std::size_t end, double* w);
Velocity quadrature_velocity_avx2(const QuadratureNodes& nodes, double tx, double ty,
                                  std::ptrdiff_t skip);
#endif
}  // namespace detail

}  // namespace vortmod::simd
