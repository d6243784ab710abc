#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "vortmod/parallel.hpp"
#include "vortmod/simd/kernels.hpp"

namespace vortmod::simd {

namespace {

// -1: no override.
std::atomic<int> g_forced{-1};

bool cpu_has_avx2() {
#if defined(VORTMOD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("VORTMOD_SIMD")) {
    if (std::string_view(env) == "scalar") return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

Isa resolve(Isa requested) {
  if (requested == Isa::Avx2 && !isa_available(Isa::Avx2)) {
    throw std::runtime_error("AVX2 kernels requested but not available on this CPU/build");
  }
  return requested;
}

constexpr std::size_t kTargetGrain = 16;

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa active_isa() {
  const int forced = g_forced.load();
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect();
  return detected;
}

void force_isa(Isa isa) { g_forced.store(static_cast<int>(resolve(isa))); }
void clear_forced_isa() { g_forced.store(-1); }

void induced_velocity(const BlobSources& src, const Targets& tgt, std::span<double> ux,
                      std::span<double> uy, Isa isa) {
  isa = resolve(isa);
  parallel_for(tgt.x.size(), kTargetGrain, [&](std::size_t b, std::size_t e) {
#if defined(VORTMOD_HAVE_AVX2)
    if (isa == Isa::Avx2) {
      detail::induced_velocity_avx2(src, tgt, b, e, ux.data(), uy.data());
      return;
    }
#endif
    detail::induced_velocity_scalar(src, tgt, b, e, ux.data(), uy.data());
  });
}

void reconstructed_vorticity(const BlobSources& src, const Targets& tgt, std::span<double> w,
                             Isa isa) {
  isa = resolve(isa);
  parallel_for(tgt.x.size(), kTargetGrain, [&](std::size_t b, std::size_t e) {
#if defined(VORTMOD_HAVE_AVX2)
    if (isa == Isa::Avx2) {
      detail::reconstructed_vorticity_avx2(src, tgt, b, e, w.data());
      return;
    }
#endif
    detail::reconstructed_vorticity_scalar(src, tgt, b, e, w.data());
  });
}

Velocity quadrature_velocity(const QuadratureNodes& nodes, double tx, double ty,
                             std::ptrdiff_t skip, Isa isa) {
  isa = resolve(isa);
#if defined(VORTMOD_HAVE_AVX2)
  if (isa == Isa::Avx2) return detail::quadrature_velocity_avx2(nodes, tx, ty, skip);
#endif
  return detail::quadrature_velocity_scalar(nodes, tx, ty, skip);
}

}  // namespace vortmod::simd
