#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "ozimmu/dd_gemm.hpp"
#include "ozimmu/kernels.hpp"
#include "ozimmu/matrix.hpp"
#include "ozimmu/mmu_plan.hpp"
#include "ozimmu/split.hpp"

namespace ozimmu {

enum class SplitPath { Integer, Floating };

inline constexpr int kDefaultMaxSplits = 18;

/// Order in which the scaled slice products are added into the binary64 result.
///   Ascending: i = 1..s outer, j ascending inner.
///   TailFirst: levels i + j from largest to smallest, i descending within a
///              level. The small tail products are summed among themselves
///              before they are added to the leading ones, which keeps them
///              from being absorbed one at a time.
enum class AccumulationOrder { TailFirst, Ascending };

struct OzConfig {
  std::optional<int> splits;  // nullopt selects the split count per call (AUTO)
  MmuSpec mmu = mmu::int8_int32();
  double loss_threshold = 0.0;  // AUTO: accepted mean mantissa loss in bits
  SplitPath path = SplitPath::Integer;
  int max_splits = kDefaultMaxSplits;
  bool all_pairs = false;  // sum all s*s slice products instead of i + j <= s + 1
  AccumulationOrder order = AccumulationOrder::TailFirst;
  KernelChoice kernel{};

  static OzConfig fixed(int s, SplitPath path = SplitPath::Integer);
  static OzConfig automatic(double threshold);

  void validate() const;
};

struct GemmTiming {
  double split = 0.0;
  double slice_gemm = 0.0;
  double accumulate = 0.0;
};

struct GemmReport {
  std::size_t m = 0, n = 0, k = 0;
  int splits_used = 0;
  std::uint64_t gemm_calls = 0;  // slice products per real product, s(s+1)/2
  int real_products = 1;         // 4 for complex operands
  double slice_bytes = 0.0;      // storage of every slice set built for the call
  bool auto_capped = false;      // AUTO hit max_splits before meeting the threshold
  LossStats loss{};              // worst operand's loss at splits_used (integer path)
  GemmTiming timing{};
};

struct AutoSplitResult {
  int splits = 1;
  bool capped = false;
  LossStats loss{};
};

/// Smallest s <= s_max whose mean mantissa loss is <= threshold for every
/// operand. `left` operands are split along rows, `right` operands are the
/// k x n right-hand matrices (split along columns).
AutoSplitResult auto_splits(std::span<const Fp64Matrix* const> left, std::span<const Fp64Matrix* const> right,
                            const MmuSpec& mmu, double threshold, int s_max = kDefaultMaxSplits);
AutoSplitResult auto_splits(const Fp64Matrix& a, const Fp64Matrix& b, const MmuSpec& mmu, double threshold,
                            int s_max = kDefaultMaxSplits);

/// C = A * B from exact int8 slice products with i + j <= s + 1, each scaled
/// by the row/column exponents and accumulated in binary64 in cfg.order.
std::pair<Fp64Matrix, GemmReport> oz_dgemm(const Fp64Matrix& a, const Fp64Matrix& b, const OzConfig& cfg);

/// Complex product from the split real and imaginary parts, four real slice
/// products per pair (i, j).
std::pair<CpxMatrix, GemmReport> oz_zgemm(const CpxMatrix& a, const CpxMatrix& b, const OzConfig& cfg);

/// Floating-path comparator: binary32 slice products summed in binary64.
Fp64Matrix oz_dgemm_fp(const Fp64Matrix& a, const Fp64Matrix& b, int s, GemmReport* report = nullptr,
                       KernelChoice kernel = {}, AccumulationOrder order = AccumulationOrder::TailFirst);

// Pluggable GEMM provider with the shape of the plain binary64 routines.

enum class BackendKind { Fp64, DoubleDouble, Ozaki, OzakiAuto, OzakiFloat };

struct BackendSpec {
  BackendKind kind = BackendKind::Fp64;
  int splits = 0;          // Ozaki, OzakiFloat
  double threshold = 0.0;  // OzakiAuto
  AccumulationOrder order = AccumulationOrder::TailFirst;

  /// "fp64", "dd", "ozaki:<s>", "auto:<T>", "ozfp:<s>".
  static BackendSpec parse(std::string_view text);
  std::string label() const;
};

class GemmBackend {
 public:
  virtual ~GemmBackend() = default;

  virtual std::string label() const = 0;
  virtual Fp64Matrix dgemm(const Fp64Matrix& a, const Fp64Matrix& b, GemmReport* report = nullptr) = 0;
  virtual CpxMatrix zgemm(const CpxMatrix& a, const CpxMatrix& b, GemmReport* report = nullptr) = 0;
};

std::unique_ptr<GemmBackend> gemm_backend(const BackendSpec& spec);

/// "tail-first" or "ascending".
AccumulationOrder parse_order(std::string_view text);
std::string_view order_name(AccumulationOrder order);
std::unique_ptr<GemmBackend> gemm_backend(const OzConfig& cfg);

}  // namespace ozimmu
