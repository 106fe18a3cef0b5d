#pragma once

// Per-ISA kernel entry points. All operate on a row range [row_lo, row_hi)
// of the output so callers can split work across threads.

#include <cstddef>
#include <cstdint>

namespace ozimmu::detail {

// c[i*n + j] = sum_p a[i*k + p] * bt[j*k + p], int32 accumulation.
void int_gemm_nt_scalar(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                        std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k);
void int_gemm_nt_blocked(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                         std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k,
                         std::size_t block);
void int_gemm_nt_avx2(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k);
void int_gemm_nt_neon(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k);

// Same contract in binary32.
void fp32_gemm_nt_scalar(const float* a, const float* bt, float* c, std::size_t row_lo,
                         std::size_t row_hi, std::size_t n, std::size_t k);
void fp32_gemm_nt_avx2(const float* a, const float* bt, float* c, std::size_t row_lo,
                       std::size_t row_hi, std::size_t n, std::size_t k);
void fp32_gemm_nt_neon(const float* a, const float* bt, float* c, std::size_t row_lo,
                       std::size_t row_hi, std::size_t n, std::size_t k);

// Double-double accumulation (hi, lo) += a * b for b stored k x n row-major.
// Each entry adds its k products in ascending p with two_prod + dd_add.
void dd_gemm_acc_scalar(const double* a, const double* b, double* hi, double* lo,
                        std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k);
void dd_gemm_acc_avx2(const double* a, const double* b, double* hi, double* lo,
                      std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k);

}  // namespace ozimmu::detail
