#pragma once

// Mantissa-space splitting of binary64 matrices into exact low-precision
// slices.
//
// Integer path: each row i gets a shared exponent E_i = floor(log2 max_j |M_ij|) + 1
// so that |M_ij| / 2^E_i < 1. Slice p then holds, sign-magnitude, the w bits
// of |M_ij| / 2^E_i at fractional positions (p-1)w+1 .. pw:
//
//     slice_p(i,j) = sign(M_ij) * (floor(|M_ij| * 2^(pw - E_i)) mod 2^w)
//     M_ij ~= sum_p slice_p(i,j) * 2^(E_i - pw)
//
// Floating path: repeated round-to-nearest extraction against a row constant
// sigma = 0.75 * 2^(ceil(log2 max|R_i|) + beta), with the last slice holding
// the exact residual.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "ozimmu/matrix.hpp"
#include "ozimmu/mmu_plan.hpp"

namespace ozimmu {

struct SliceSet {
  static constexpr int kZeroRow = std::numeric_limits<int>::min();

  int splits = 0;
  int width = 0;  // bits per slice w = min(alpha, l_in); also the positional shift
  int alpha = 0;  // accumulator budget floor((l_acc - ceil(log2 k)) / 2)
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<IntSliceMatrix> slices;
  std::vector<int> row_exp;  // E_i, or kZeroRow for an all-zero row

  /// e_i = 2^E_i, 0 for zero rows (inf if E_i > 1023).
  double row_scale(std::size_t i) const;
  /// Storage of the slice matrices at `input_bytes` per element.
  double slice_bytes(double input_bytes) const;
};

struct FpSliceSet {
  int splits = 0;
  int beta = 0;
  int working_bits = 24;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Fp64Matrix> slices;
  /// For the extracted slices 0 .. splits-2: ceil(log2 max_j |R_ij|) of the
  /// residual they were cut from (kZeroRow when that row was zero). Entries
  /// of such a slice row are multiples of 2^(c + beta - working_bits) and at
  /// most 2^c in magnitude.
  std::vector<std::vector<int>> row_exp;
};

/// Splits M (the left operand, or the transposed right operand) into `s`
/// integer slices for an accumulation length `k_eff`. Throws NonFinite for
/// inf/nan entries and Infeasible when slice_bits(mmu, k_eff) <= 0 or the slice
/// width exceeds the 7 magnitude bits of the int8 storage.
SliceSet split_int(const Fp64Matrix& m, int s, const MmuSpec& mmu, std::uint64_t k_eff);

/// Floating split with working precision 2^-working_bits (binary32 by
/// default). Sum of all slices equals M exactly.
FpSliceSet split_fp(const Fp64Matrix& m, int s, std::uint64_t k_eff, int working_bits = 24);

/// beta = ceil((working_bits + ceil(log2 k)) / 2).
int fp_split_beta(std::uint64_t k_eff, int working_bits = 24);

/// sum_p slice_p(i,j) * e_i * 2^(-p w), accumulated in double-double and rounded once.
Fp64Matrix reconstruct(const SliceSet& ss);
/// Sum of the floating slices, accumulated in double-double and rounded once.
Fp64Matrix reconstruct(const FpSliceSet& ss);

/// MSB-to-last-set-bit length of the significand; 0 for 0.
int valid_mantissa_length(double x);

struct LossStats {
  double mean_bits = 0.0;
  int max_bits = 0;
};

/// Per-element mantissa loss of the integer split as a function of the kept
/// mantissa-space length s*w:
///     loss_ij = max(0, offset_ij + valid_len_ij - s*w),
///     offset_ij = E_i - floor(log2 |M_ij|) >= 1.
/// Averages are over nonzero elements; an all-zero matrix has zero loss.
/// The profile is built once and evaluated for any kept length.
class MantissaLossProfile {
 public:
  MantissaLossProfile() = default;
  explicit MantissaLossProfile(const Fp64Matrix& m);

  LossStats at(int kept_bits) const;
  std::size_t nonzero() const noexcept { return nonzero_; }
  /// Largest offset + valid length over all elements (0 if none).
  int max_required_bits() const noexcept;

 private:
  std::map<int, std::size_t> required_;  // offset + valid_len -> count
  std::size_t nonzero_ = 0;
};

LossStats mantissa_loss(const Fp64Matrix& m, int s, const MmuSpec& mmu, std::uint64_t k_eff);

/// Slice width min(slice_bits, l_in), rejecting infeasible or non-int8 widths.
int int_slice_width(const MmuSpec& mmu, std::uint64_t k_eff);

}  // namespace ozimmu
