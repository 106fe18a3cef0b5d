#include "ozimmu/mmu_plan.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include "ozimmu/error.hpp"

namespace ozimmu {

void MmuSpec::validate() const {
  if (l_in <= 0 || l_acc <= 0) {
    throw Error(ErrorCode::InvalidArgument, "mmu '" + name + "': mantissa widths must be positive");
  }
  if (l_in > l_acc) {
    throw Error(ErrorCode::InvalidArgument, "mmu '" + name + "': l_in exceeds l_acc");
  }
  if (input_bytes * 8.0 < static_cast<double>(l_in)) {
    throw Error(ErrorCode::InvalidArgument, "mmu '" + name + "': input storage smaller than l_in bits");
  }
}

namespace mmu {

MmuSpec fp16_fp32() { return {"FP16-FP32", 11, 24, 2.0}; }
MmuSpec int4_int32() { return {"INT4-INT32", 3, 31, 0.5}; }
MmuSpec int8_int32() { return {"INT8-INT32", 7, 31, 1.0}; }
MmuSpec int12_int32() { return {"INT12-INT32", 11, 31, 1.5}; }

std::vector<MmuSpec> presets() { return {fp16_fp32(), int4_int32(), int8_int32(), int12_int32()}; }

std::optional<MmuSpec> find(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto& spec : presets()) {
    if (key == spec.name || key == spec.name.substr(0, spec.name.find('-'))) return spec;
  }
  return std::nullopt;
}

}  // namespace mmu

int ceil_log2(std::uint64_t k) {
  if (k <= 1) return 0;
  return 64 - std::countl_zero(k - 1);
}

int slice_bits(const MmuSpec& mmu, std::uint64_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "accumulation length k must be >= 1");
  const int num = mmu.l_acc - ceil_log2(k);
  // floor division, num may be negative
  return num >= 0 ? num / 2 : -((-num + 1) / 2);
}

int bits_per_slice(const MmuSpec& mmu, std::uint64_t k) {
  const int alpha = slice_bits(mmu, k);
  if (alpha <= 0) {
    throw Error(ErrorCode::Infeasible,
                "mmu '" + mmu.name + "' cannot accumulate k=" + std::to_string(k) + " products exactly");
  }
  return std::min(alpha, mmu.l_in);
}

int splits_for_space(const MmuSpec& mmu, std::uint64_t k, int target_bits) {
  if (target_bits <= 0) throw Error(ErrorCode::InvalidArgument, "target_bits must be positive");
  const int bps = bits_per_slice(mmu, k);
  return (target_bits + bps - 1) / bps;
}

double memory_per_element(const MmuSpec& mmu, std::uint64_t k, int target_bits) {
  return splits_for_space(mmu, k, target_bits) * mmu.input_bytes;
}

std::uint64_t gemm_count(int s) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  const auto u = static_cast<std::uint64_t>(s);
  return u * (u + 1) / 2;
}

std::vector<PlanRow> sweep(std::span<const MmuSpec> mmus, std::span<const std::uint64_t> k_values,
                           int target_bits) {
  std::vector<PlanRow> rows;
  rows.reserve(mmus.size() * k_values.size());
  for (const auto& spec : mmus) {
    spec.validate();
    for (auto k : k_values) {
      PlanRow row;
      row.mmu = spec.name;
      row.k = k;
      row.alpha = slice_bits(spec, k);
      row.feasible = row.alpha > 0;
      if (row.feasible) {
        row.bps = std::min(row.alpha, spec.l_in);
        row.splits = splits_for_space(spec, k, target_bits);
        row.bytes_per_element = row.splits * spec.input_bytes;
        row.gemm_ops = gemm_count(row.splits);
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PlanRow& a, const PlanRow& b) {
    return a.mmu != b.mmu ? a.mmu < b.mmu : a.k < b.k;
  });
  return rows;
}

}  // namespace ozimmu
