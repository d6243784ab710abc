#pragma once

// Vector exp for the AVX2 kernels. Only include from translation units
// compiled with -mavx2 -mfma.

#include <immintrin.h>

namespace vortmod::simd::avx2_math {

// exp(x) for x <= 0. Inputs below -708 return 0. Cody–Waite reduction by
// ln 2 followed by a degree-13 Taylor polynomial on |r| <= ln2/2; relative
// error is a few ulp.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d lower = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);                  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));    // 1/12!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));     // 1/11!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));      // 1/10!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^n with n in [-1021, 0]: build the exponent field directly.
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m256i e = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni),
                                                       _mm256_set1_epi64x(1023)),
                                      52);
  const __m256d scaled = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
  return _mm256_andnot_pd(underflow, scaled);
}

// 1 - exp(-s) for s >= 0 without cancellation at small s.
inline __m256d one_minus_exp_neg(__m256d s) {
  const __m256d one = _mm256_set1_pd(1.0);
  // exp(-s) < 2^-54 rounds 1 - exp(-s) to exactly 1; skipping the polynomial
  // there changes no bits.
  if (_mm256_movemask_pd(_mm256_cmp_pd(s, _mm256_set1_pd(38.0), _CMP_GT_OQ)) == 0xF) return one;
  const __m256d direct = _mm256_sub_pd(one, exp_nonpositive(_mm256_sub_pd(_mm256_setzero_pd(), s)));
  // s - s^2/2 + s^3/6 - s^4/24 + s^5/120 for s < 1e-3.
  __m256d series = _mm256_set1_pd(1.0 / 120.0);
  series = _mm256_fmadd_pd(series, s, _mm256_set1_pd(-1.0 / 24.0));
  series = _mm256_fmadd_pd(series, s, _mm256_set1_pd(1.0 / 6.0));
  series = _mm256_fmadd_pd(series, s, _mm256_set1_pd(-0.5));
  series = _mm256_fmadd_pd(series, s, one);
  series = _mm256_mul_pd(series, s);
  const __m256d small = _mm256_cmp_pd(s, _mm256_set1_pd(1e-3), _CMP_LT_OQ);
  return _mm256_blendv_pd(direct, series, small);
}

}  // namespace vortmod::simd::avx2_math
