#pragma once

// Exact low-precision GEMM kernels emulating matrix-multiply units:
// int8 x int8 -> int32 and binary32 with no rounding on the operands the
// splitters produce.

#include <cstddef>
#include <cstdint>

#include "ozimmu/isa.hpp"
#include "ozimmu/matrix.hpp"

namespace ozimmu {

inline constexpr std::int64_t kInt32AccMax = 2147483647;  // 2^31 - 1

struct OverflowBudget {
  std::uint64_t bound = 0;  // k * (2^w - 1)^2
  bool safe = false;        // bound <= 2^31 - 1
};

/// Worst-case accumulator magnitude for k products of w-bit slice entries.
OverflowBudget overflow_budget(int w, std::uint64_t k);

/// Which kernel variant runs. `block` > 0 selects the cache-blocked scalar
/// schedule with that tile edge (ignored by the SIMD variants).
struct KernelChoice {
  Isa isa = active_isa();
  std::size_t block = 0;
};

/// Exact integer product of A (m x k) and B (k x n). Throws Infeasible when
/// k * max|A| * max|B| could exceed 2^31 - 1, and InvalidArgument for -128
/// entries, before any arithmetic.
AccMatrix int_gemm(const IntSliceMatrix& a, const IntSliceMatrix& b, KernelChoice choice = {});

/// Same product with the right operand given transposed (n x k); this is the
/// layout the slice sets store.
AccMatrix int_gemm_nt(const IntSliceMatrix& a, const IntSliceMatrix& bt, KernelChoice choice = {});

/// Product of operands whose entries are exactly representable in binary32,
/// evaluated in binary32. Exact (hence variant-independent) when every partial
/// sum fits a 24-bit significand, which holds for split_fp slices with the same k.
/// Throws InvalidArgument if an entry is not binary32-representable.
Fp64Matrix fp32_gemm(const Fp64Matrix& a, const Fp64Matrix& b, KernelChoice choice = {});
Fp64Matrix fp32_gemm_nt(const Fp64Matrix& a, const Fp64Matrix& bt, KernelChoice choice = {});

/// True when x converts to float and back unchanged.
bool fp32_exact(double x);

/// Plain binary64 product, ascending inner index for every entry.
Fp64Matrix plain_dgemm(const Fp64Matrix& a, const Fp64Matrix& b);
CpxMatrix plain_zgemm(const CpxMatrix& a, const CpxMatrix& b);

}  // namespace ozimmu
