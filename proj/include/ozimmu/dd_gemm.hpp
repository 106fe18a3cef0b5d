#pragma once

#include <cstddef>

#include "ozimmu/dd.hpp"
#include "ozimmu/isa.hpp"
#include "ozimmu/matrix.hpp"

namespace ozimmu {

struct DdComplex {
  DdValue re;
  DdValue im;

  friend bool operator==(const DdComplex&, const DdComplex&) = default;
};

using DdMatrix = Matrix<DdValue>;
using DdCpxMatrix = Matrix<DdComplex>;

/// Reference product accumulated in double-double. Every entry sums its k
/// products in ascending inner index, so the result is bitwise reproducible
/// across kernel variants and thread counts.
DdMatrix dd_gemm(const Fp64Matrix& a, const Fp64Matrix& b, Isa isa = active_isa());

/// Real part accumulates Re(A)Re(B) then -Im(A)Im(B); imaginary part
/// Re(A)Im(B) then Im(A)Re(B), each in ascending inner index.
DdCpxMatrix dd_zgemm(const CpxMatrix& a, const CpxMatrix& b, Isa isa = active_isa());

DdMatrix to_dd(const Fp64Matrix& m);
DdCpxMatrix to_dd(const CpxMatrix& m);
Fp64Matrix round_to_fp64(const DdMatrix& m);
CpxMatrix round_to_fp64(const DdCpxMatrix& m);

struct ErrorStats {
  double mean = 0.0;
  double max = 0.0;
  std::size_t counted = 0;         // entries with a nonzero reference
  std::size_t zero_reference = 0;  // entries excluded because the reference is 0
};

/// Elementwise |C - C_ref| / |C_ref| with the difference formed in
/// double-double. For complex matrices the modulus of the difference is
/// divided by the modulus of the reference.
ErrorStats relative_error_stats(const Fp64Matrix& c, const DdMatrix& ref);
ErrorStats relative_error_stats(const CpxMatrix& c, const DdCpxMatrix& ref);

}  // namespace ozimmu
