#include <algorithm>

#include "kernels_impl.hpp"
#include "ozimmu/dd.hpp"

namespace ozimmu::detail {

void int_gemm_nt_scalar(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                        std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k) {
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    const std::int8_t* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const std::int8_t* bj = bt + j * k;
      std::int32_t acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += std::int32_t{ai[p]} * std::int32_t{bj[p]};
      c[i * n + j] = acc;
    }
  }
}

void int_gemm_nt_blocked(const std::int8_t* a, const std::int8_t* bt, std::int32_t* c,
                         std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k,
                         std::size_t block) {
  for (std::size_t i = row_lo; i < row_hi; ++i) std::fill_n(c + i * n, n, 0);
  for (std::size_t p0 = 0; p0 < k; p0 += block) {
    const std::size_t p1 = std::min(k, p0 + block);
    for (std::size_t j0 = 0; j0 < n; j0 += block) {
      const std::size_t j1 = std::min(n, j0 + block);
      for (std::size_t i0 = row_lo; i0 < row_hi; i0 += block) {
        const std::size_t i1 = std::min(row_hi, i0 + block);
        for (std::size_t i = i0; i < i1; ++i) {
          for (std::size_t j = j0; j < j1; ++j) {
            std::int32_t acc = 0;
            for (std::size_t p = p0; p < p1; ++p) {
              acc += std::int32_t{a[i * k + p]} * std::int32_t{bt[j * k + p]};
            }
            c[i * n + j] += acc;
          }
        }
      }
    }
  }
}

void fp32_gemm_nt_scalar(const float* a, const float* bt, float* c, std::size_t row_lo,
                         std::size_t row_hi, std::size_t n, std::size_t k) {
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    const float* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const float* bj = bt + j * k;
      float acc = 0.0f;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

void dd_gemm_acc_scalar(const double* a, const double* b, double* hi, double* lo,
                        std::size_t row_lo, std::size_t row_hi, std::size_t n, std::size_t k) {
  for (std::size_t i = row_lo; i < row_hi; ++i) {
    double* hi_row = hi + i * n;
    double* lo_row = lo + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const DdValue s = dd_add({hi_row[j], lo_row[j]}, two_prod(aip, bp[j]));
        hi_row[j] = s.hi;
        lo_row[j] = s.lo;
      }
    }
  }
}

}  // namespace ozimmu::detail
