#pragma once

// State-vector simulation of brickwork circuits. Qubit q is bit q of the
// amplitude index. A gate on the window [w, w + d) sees the d window bits as
// its local basis index (qubit w is the least significant local bit).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ozimmu/datagen.hpp"
#include "ozimmu/ozgemm.hpp"

namespace ozimmu {

inline constexpr int kMaxQubits = 26;

struct StateVector {
  int n_qubits = 0;
  std::vector<std::complex<double>> amplitudes;

  double norm() const;  // sqrt(sum |a|^2)
};

/// |0...0> on n qubits; throws ResourceCap outside 1..kMaxQubits.
StateVector init_state(int n_qubits);

struct GateRecord {
  int layer = 0;
  int window = 0;
  std::size_t m = 0, n = 0, k = 0;  // GEMM shape (2^(N-d), 2^d, 2^d)
  int splits = 0;
  double slice_bytes = 0.0;
};

struct GateOptions {
  /// Tolerance on max |U U^H - I|; a larger deviation prints a warning and the gate still applies.
  double unitary_tolerance = 1e-10;
  bool warn = true;
};

/// Applies U (2^d x 2^d) to the qubits [window, window + d). Returns the
/// GEMM report of the backend call. Throws InvalidArgument for a bad window
/// or a U whose size is not a power of two.
GemmReport apply_gate(StateVector& state, const CpxMatrix& u, int window, GemmBackend& backend,
                      const GateOptions& opts = {});

/// Window starts of layer `layer`: 0, d, 2d, ... on even layers and
/// d/2, d/2 + d, ... on odd layers, keeping only windows inside [0, N).
std::vector<int> layer_windows(int n_qubits, int d, int layer);

struct CircuitSpec {
  int n_qubits = 1;
  int gate_qubits = 2;  // d, even
  int layers = 0;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t gate_count() const;
};

/// Gate g (in application order) is haar_unitary(2^d, {seed, g}).
CpxMatrix circuit_gate(const CircuitSpec& spec, std::uint64_t gate_index);

struct SimReport {
  std::string backend;
  std::vector<GateRecord> gates;
  std::complex<double> amp0{};
  double amp0_re = 0.0;
  std::optional<std::string> reference;
  std::optional<std::complex<double>> reference_amp0;
  std::optional<double> rel_error;  // |amp0 - ref| / |ref| (absolute when ref = 0)
  double peak_slice_bytes = 0.0;    // largest per-gate slice storage

  std::map<int, std::size_t> splits_histogram() const;
};

/// Runs the circuit on `backend`; with a reference backend the same circuit is
/// also run there and the first amplitudes are compared.
std::pair<StateVector, SimReport> run_brickwork(const CircuitSpec& spec, GemmBackend& backend,
                                                GemmBackend* reference = nullptr, const GateOptions& opts = {});

/// |a - ref| / |ref|, or |a - ref| when ref = 0.
double amplitude_error(std::complex<double> a, std::complex<double> ref);

/// Bytes held by one simulation of N qubits: the state plus its gathered and
/// multiplied copies.
double state_bytes(int n_qubits);

}  // namespace ozimmu
