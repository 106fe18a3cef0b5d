#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ozimmu {

/// Matrix-multiply unit described by its input and accumulator mantissa
/// widths and the storage size of one input element.
struct MmuSpec {
  std::string name;
  int l_in = 0;
  int l_acc = 0;
  double input_bytes = 0.0;

  /// Throws InvalidArgument if l_in > l_acc or the storage cannot hold l_in bits.
  void validate() const;
};

namespace mmu {
MmuSpec fp16_fp32();
MmuSpec int4_int32();
MmuSpec int8_int32();
MmuSpec int12_int32();

std::vector<MmuSpec> presets();
/// Accepts full names ("INT8-INT32") and short aliases ("int8", "fp16"), case-insensitively.
std::optional<MmuSpec> find(std::string_view name);
}  // namespace mmu

/// ceil(log2 k) for k >= 1.
int ceil_log2(std::uint64_t k);

/// floor((l_acc - ceil(log2 k)) / 2). A result <= 0 means this unit cannot
/// accumulate k products exactly; it is returned, not thrown.
int slice_bits(const MmuSpec& mmu, std::uint64_t k);

/// min(slice_bits, l_in). Throws Infeasible when slice_bits <= 0.
int bits_per_slice(const MmuSpec& mmu, std::uint64_t k);

int splits_for_space(const MmuSpec& mmu, std::uint64_t k, int target_bits);
double memory_per_element(const MmuSpec& mmu, std::uint64_t k, int target_bits);

/// Slice-pair products with i + j <= s + 1, i.e. s(s+1)/2.
std::uint64_t gemm_count(int s);

struct PlanRow {
  std::string mmu;
  std::uint64_t k = 0;
  int alpha = 0;
  int bps = 0;
  int splits = 0;
  double bytes_per_element = 0.0;
  std::uint64_t gemm_ops = 0;
  bool feasible = false;
};

inline constexpr int kDefaultTargetBits = 70;

/// One row per (mmu, k), sorted by (mmu name, k). Infeasible pairs are kept
/// with feasible = false and zeroed derived columns.
std::vector<PlanRow> sweep(std::span<const MmuSpec> mmus, std::span<const std::uint64_t> k_values,
                           int target_bits = kDefaultTargetBits);

}  // namespace ozimmu
