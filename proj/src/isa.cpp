#include "ozimmu/isa.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "ozimmu/error.hpp"

namespace ozimmu {
namespace {

std::atomic<int> g_override{-1};

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (name == isa_name(isa)) return isa;
  }
  return std::nullopt;
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(OZIMM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(OZIMM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() {
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() {
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa from_env = [] {
    if (const char* env = std::getenv("OZIMM_ISA")) {
      if (auto isa = parse_isa(env); isa && isa_supported(*isa)) return *isa;
    }
    return best_isa();
  }();
  return from_env;
}

void set_active_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_override.store(-1);
    return;
  }
  if (!isa_supported(*isa)) {
    throw Error(ErrorCode::InvalidArgument, "kernel variant '" + std::string(isa_name(*isa)) +
                                                "' is not available on this machine");
  }
  g_override.store(static_cast<int>(*isa));
}

}  // namespace ozimmu
