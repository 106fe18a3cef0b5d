// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_impl.hpp"
#include "ozimmu/dd.hpp"

namespace ozimmu::detail {
namespace {

inline std::int32_t hsum_epi32(__m256i v) {
  __m128i s = _mm_add_epi32(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
  s = _mm_add_epi32(s, _mm_shuffle_epi32(s, 0x4E));
  s = _mm_add_epi32(s, _mm_shuffle_epi32(s, 0xB1));
  return _mm_cvtsi128_si32(s);
}

inline float hsum_ps(__m256 v) {
  __m128 s = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

// 16 int8 -> 16 int16
inline __m256i load_widen(const std::int8_t* p) {
  return _mm256_cvtepi8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

inline std::int32_t dot_tail(const std::int8_t* a, const std::int8_t* b, std::size_t p0, std::size_t k) {
  std::int32_t acc = 0;
  for (std::size_t p = p0; p < k; ++p) acc += std::int32_t{a[p]} * std::int32_t{b[p]};
  return acc;
}

inline float dot_tail(const float* a, const float* b, std::size_t p0, std::size_t k) {
  float acc = 0.0f;
  for (std::size_t p = p0; p < k; ++p) acc += a[p] * b[p];
  return acc;
}

}  // namespace

void int_gemm_nt_avx2(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k) {
  const std::size_t kv = k & ~std::size_t{15};
  std::size_t i = row_lo;
  // 2 x 4 register tile; madd_epi16 forms exact pairwise int32 sums.
  for (; i + 2 <= row_hi; i += 2) {
    const std::int8_t* a0 = a + i * k;
    const std::int8_t* a1 = a0 + k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const std::int8_t* b0 = bt + j * k;
      const std::int8_t* b1 = b0 + k;
      const std::int8_t* b2 = b1 + k;
      const std::int8_t* b3 = b2 + k;
      __m256i c00 = _mm256_setzero_si256(), c01 = c00, c02 = c00, c03 = c00;
      __m256i c10 = c00, c11 = c00, c12 = c00, c13 = c00;
      for (std::size_t p = 0; p < kv; p += 16) {
        const __m256i x0 = load_widen(a0 + p);
        const __m256i x1 = load_widen(a1 + p);
        __m256i y = load_widen(b0 + p);
        c00 = _mm256_add_epi32(c00, _mm256_madd_epi16(x0, y));
        c10 = _mm256_add_epi32(c10, _mm256_madd_epi16(x1, y));
        y = load_widen(b1 + p);
        c01 = _mm256_add_epi32(c01, _mm256_madd_epi16(x0, y));
        c11 = _mm256_add_epi32(c11, _mm256_madd_epi16(x1, y));
        y = load_widen(b2 + p);
        c02 = _mm256_add_epi32(c02, _mm256_madd_epi16(x0, y));
        c12 = _mm256_add_epi32(c12, _mm256_madd_epi16(x1, y));
        y = load_widen(b3 + p);
        c03 = _mm256_add_epi32(c03, _mm256_madd_epi16(x0, y));
        c13 = _mm256_add_epi32(c13, _mm256_madd_epi16(x1, y));
      }
      std::int32_t* r0 = c + i * n + j;
      std::int32_t* r1 = r0 + n;
      r0[0] = hsum_epi32(c00) + dot_tail(a0, b0, kv, k);
      r0[1] = hsum_epi32(c01) + dot_tail(a0, b1, kv, k);
      r0[2] = hsum_epi32(c02) + dot_tail(a0, b2, kv, k);
      r0[3] = hsum_epi32(c03) + dot_tail(a0, b3, kv, k);
      r1[0] = hsum_epi32(c10) + dot_tail(a1, b0, kv, k);
      r1[1] = hsum_epi32(c11) + dot_tail(a1, b1, kv, k);
      r1[2] = hsum_epi32(c12) + dot_tail(a1, b2, kv, k);
      r1[3] = hsum_epi32(c13) + dot_tail(a1, b3, kv, k);
    }
    for (; j < n; ++j) {
      const std::int8_t* b0 = bt + j * k;
      __m256i c0 = _mm256_setzero_si256(), c1 = c0;
      for (std::size_t p = 0; p < kv; p += 16) {
        const __m256i y = load_widen(b0 + p);
        c0 = _mm256_add_epi32(c0, _mm256_madd_epi16(load_widen(a0 + p), y));
        c1 = _mm256_add_epi32(c1, _mm256_madd_epi16(load_widen(a1 + p), y));
      }
      c[i * n + j] = hsum_epi32(c0) + dot_tail(a0, b0, kv, k);
      c[(i + 1) * n + j] = hsum_epi32(c1) + dot_tail(a1, b0, kv, k);
    }
  }
  for (; i < row_hi; ++i) {
    const std::int8_t* a0 = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const std::int8_t* b0 = bt + j * k;
      __m256i c0 = _mm256_setzero_si256();
      for (std::size_t p = 0; p < kv; p += 16) {
        c0 = _mm256_add_epi32(c0, _mm256_madd_epi16(load_widen(a0 + p), load_widen(b0 + p)));
      }
      c[i * n + j] = hsum_epi32(c0) + dot_tail(a0, b0, kv, k);
    }
  }
}

void fp32_gemm_nt_avx2(const float* a, const float* bt, float* c, std::size_t row_lo,
                       std::size_t row_hi, std::size_t n, std::size_t k) {
  const std::size_t kv = k & ~std::size_t{7};
  std::size_t i = row_lo;
  for (; i + 2 <= row_hi; i += 2) {
    const float* a0 = a + i * k;
    const float* a1 = a0 + k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const float* b0 = bt + j * k;
      const float* b1 = b0 + k;
      const float* b2 = b1 + k;
      const float* b3 = b2 + k;
      __m256 c00 = _mm256_setzero_ps(), c01 = c00, c02 = c00, c03 = c00;
      __m256 c10 = c00, c11 = c00, c12 = c00, c13 = c00;
      for (std::size_t p = 0; p < kv; p += 8) {
        const __m256 x0 = _mm256_loadu_ps(a0 + p);
        const __m256 x1 = _mm256_loadu_ps(a1 + p);
        __m256 y = _mm256_loadu_ps(b0 + p);
        c00 = _mm256_fmadd_ps(x0, y, c00);
        c10 = _mm256_fmadd_ps(x1, y, c10);
        y = _mm256_loadu_ps(b1 + p);
        c01 = _mm256_fmadd_ps(x0, y, c01);
        c11 = _mm256_fmadd_ps(x1, y, c11);
        y = _mm256_loadu_ps(b2 + p);
        c02 = _mm256_fmadd_ps(x0, y, c02);
        c12 = _mm256_fmadd_ps(x1, y, c12);
        y = _mm256_loadu_ps(b3 + p);
        c03 = _mm256_fmadd_ps(x0, y, c03);
        c13 = _mm256_fmadd_ps(x1, y, c13);
      }
      float* r0 = c + i * n + j;
      float* r1 = r0 + n;
      r0[0] = hsum_ps(c00) + dot_tail(a0, b0, kv, k);
      r0[1] = hsum_ps(c01) + dot_tail(a0, b1, kv, k);
      r0[2] = hsum_ps(c02) + dot_tail(a0, b2, kv, k);
      r0[3] = hsum_ps(c03) + dot_tail(a0, b3, kv, k);
      r1[0] = hsum_ps(c10) + dot_tail(a1, b0, kv, k);
      r1[1] = hsum_ps(c11) + dot_tail(a1, b1, kv, k);
      r1[2] = hsum_ps(c12) + dot_tail(a1, b2, kv, k);
      r1[3] = hsum_ps(c13) + dot_tail(a1, b3, kv, k);
    }
    for (; j < n; ++j) {
      const float* b0 = bt + j * k;
      __m256 c0 = _mm256_setzero_ps(), c1 = c0;
      for (std::size_t p = 0; p < kv; p += 8) {
        const __m256 y = _mm256_loadu_ps(b0 + p);
        c0 = _mm256_fmadd_ps(_mm256_loadu_ps(a0 + p), y, c0);
        c1 = _mm256_fmadd_ps(_mm256_loadu_ps(a1 + p), y, c1);
      }
      c[i * n + j] = hsum_ps(c0) + dot_tail(a0, b0, kv, k);
      c[(i + 1) * n + j] = hsum_ps(c1) + dot_tail(a1, b0, kv, k);
    }
  }
  for (; i < row_hi; ++i) {
    const float* a0 = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const float* b0 = bt + j * k;
      __m256 c0 = _mm256_setzero_ps();
      for (std::size_t p = 0; p < kv; p += 8) {
        c0 = _mm256_fmadd_ps(_mm256_loadu_ps(a0 + p), _mm256_loadu_ps(b0 + p), c0);
      }
      c[i * n + j] = hsum_ps(c0) + dot_tail(a0, b0, kv, k);
    }
  }
}

void dd_gemm_acc_avx2(const double* a, const double* b, double* hi, double* lo,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k) {
  const std::size_t nv = n & ~std::size_t{3};
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    double* hi_row = hi + i * n;
    double* lo_row = lo + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const __m256d av = _mm256_set1_pd(aip);
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < nv; j += 4) {
        const __m256d bv = _mm256_loadu_pd(bp + j);
        // two_prod
        const __m256d ph = _mm256_mul_pd(av, bv);
        const __m256d pl = _mm256_fmsub_pd(av, bv, ph);
        const __m256d h = _mm256_loadu_pd(hi_row + j);
        const __m256d l = _mm256_loadu_pd(lo_row + j);
        // two_sum(h, ph)
        __m256d s = _mm256_add_pd(h, ph);
        __m256d bb = _mm256_sub_pd(s, h);
        __m256d e = _mm256_add_pd(_mm256_sub_pd(h, _mm256_sub_pd(s, bb)), _mm256_sub_pd(ph, bb));
        // two_sum(l, pl)
        const __m256d t = _mm256_add_pd(l, pl);
        bb = _mm256_sub_pd(t, l);
        const __m256d te = _mm256_add_pd(_mm256_sub_pd(l, _mm256_sub_pd(t, bb)), _mm256_sub_pd(pl, bb));
        e = _mm256_add_pd(e, t);
        // fast_two_sum, add the low error, fast_two_sum
        __m256d s2 = _mm256_add_pd(s, e);
        e = _mm256_sub_pd(e, _mm256_sub_pd(s2, s));
        e = _mm256_add_pd(e, te);
        s = _mm256_add_pd(s2, e);
        e = _mm256_sub_pd(e, _mm256_sub_pd(s, s2));
        _mm256_storeu_pd(hi_row + j, s);
        _mm256_storeu_pd(lo_row + j, e);
      }
      for (std::size_t j = nv; j < n; ++j) {
        const DdValue s = dd_add({hi_row[j], lo_row[j]}, two_prod(aip, bp[j]));
        hi_row[j] = s.hi;
        lo_row[j] = s.lo;
      }
    }
  }
}

}  // namespace ozimmu::detail
