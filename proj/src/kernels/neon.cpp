// AArch64 Advanced SIMD variants. Built only on arm64 targets.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace ozimmu::detail {

void int_gemm_nt_neon(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k) {
  const std::size_t kv = k & ~std::size_t{15};
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    const std::int8_t* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const std::int8_t* bj = bt + j * k;
      int32x4_t acc = vdupq_n_s32(0);
      for (std::size_t p = 0; p < kv; p += 16) {
        const int8x16_t x = vld1q_s8(ai + p);
        const int8x16_t y = vld1q_s8(bj + p);
        // |entry| <= 127, so each int8 product fits int16
        acc = vpadalq_s16(acc, vmull_s8(vget_low_s8(x), vget_low_s8(y)));
        acc = vpadalq_s16(acc, vmull_high_s8(x, y));
      }
      std::int32_t sum = vaddvq_s32(acc);
      for (std::size_t p = kv; p < k; ++p) sum += std::int32_t{ai[p]} * std::int32_t{bj[p]};
      c[i * n + j] = sum;
    }
  }
}

void fp32_gemm_nt_neon(const float* a, const float* bt, float* c, std::size_t row_lo,
                       std::size_t row_hi, std::size_t n, std::size_t k) {
  const std::size_t kv = k & ~std::size_t{3};
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    const float* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const float* bj = bt + j * k;
      float32x4_t acc = vdupq_n_f32(0.0f);
      for (std::size_t p = 0; p < kv; p += 4) acc = vfmaq_f32(acc, vld1q_f32(ai + p), vld1q_f32(bj + p));
      float sum = vaddvq_f32(acc);
      for (std::size_t p = kv; p < k; ++p) sum += ai[p] * bj[p];
      c[i * n + j] = sum;
    }
  }
}

}  // namespace ozimmu::detail
