#pragma once

// Seeded input generators. Every output is a pure function of the
// dimensions, the parameters and the (seed, stream) pair.
//
// Generator: std::mt19937_64 seeded with splitmix64(splitmix64(seed) + stream).
// Uniforms use the top 53 bits: u = ((x >> 11) + 0.5) * 2^-53, so u is never
// 0 or 1. Normals come from the Marsaglia polar method on such uniforms.

#include <cstdint>
#include <random>

#include "ozimmu/matrix.hpp"

namespace ozimmu {

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(RngSeed s);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on (0, 1).
  double uniform();
  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Entries (u - 0.5) * exp(phi * n) with u uniform on (0, 1) and n standard
/// normal, drawn in row-major order.
Fp64Matrix gen_phi_matrix(std::size_t m, std::size_t n, double phi, RngSeed seed);

struct InversePair {
  Fp64Matrix a;
  Fp64Matrix a_dag;           // right inverse solved from A X = I
  double residual = 0.0;      // max |A X - I|
  std::uint64_t stream = 0;   // stream that produced a nonsingular A
  unsigned regenerated = 0;   // singular draws skipped
};

/// A with standard-normal entries and its numerically solved inverse. A draw
/// that is singular to working precision is replaced by the next stream.
InversePair gen_inverse_pair(std::size_t n, RngSeed seed);

/// Haar-distributed unitary: Householder QR of a complex Ginibre matrix with
/// Q's columns rescaled by R_ii / |R_ii|.
CpxMatrix haar_unitary(std::size_t dim, RngSeed seed);

struct LuSolution {
  Fp64Matrix x;
  double residual = 0.0;  // max |A X - B|
};

inline constexpr double kPivotTolerance = 1e-300;

/// Solves A X = B by LU with partial pivoting. Throws Singular when a pivot
/// magnitude is <= kPivotTolerance.
LuSolution lu_solve(const Fp64Matrix& a, const Fp64Matrix& b);

}  // namespace ozimmu
