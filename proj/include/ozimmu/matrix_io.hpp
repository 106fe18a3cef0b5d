#pragma once

// OZMM binary matrix files:
//   "OZMM" | version u32 | rows u64 | cols u64 | flag u8 (0 real, 1 complex)
//   | row-major binary64 payload, re/im interleaved when complex.
// All fields little-endian.

#include <filesystem>
#include <variant>

#include "ozimmu/matrix.hpp"

namespace ozimmu {

inline constexpr std::uint32_t kOzmmVersion = 1;

void write_matrix(const std::filesystem::path& path, const Fp64Matrix& m);
void write_matrix(const std::filesystem::path& path, const CpxMatrix& m);

using AnyMatrix = std::variant<Fp64Matrix, CpxMatrix>;

/// Throws Io on a missing file, bad magic, unknown version/flag or a short payload.
AnyMatrix read_matrix(const std::filesystem::path& path);
Fp64Matrix read_real_matrix(const std::filesystem::path& path);
CpxMatrix read_complex_matrix(const std::filesystem::path& path);

}  // namespace ozimmu
