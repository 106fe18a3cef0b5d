#pragma once

#include <optional>
#include <string_view>

namespace ozimmu {

/// Instruction-set variant of the data-parallel kernels. Every variant of a
/// kernel produces bit-identical output; they differ only in speed.
enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

/// Compiled in and supported by the running CPU.
bool isa_supported(Isa isa);
Isa best_isa();

/// The variant used when callers do not pick one. Defaults to OZIMM_ISA when
/// that names a supported variant, else best_isa().
Isa active_isa();
/// nullopt restores the default. Throws InvalidArgument for unsupported variants.
void set_active_isa(std::optional<Isa> isa);

}  // namespace ozimmu
