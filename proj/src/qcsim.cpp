#include "ozimmu/qcsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>

#include "ozimmu/parallel.hpp"

namespace ozimmu {
namespace {

// Amplitude index of (outer o, local t) for the window [w, w + d).
inline std::size_t spread(std::size_t o, std::size_t t, int w, int d) {
  const std::size_t low = o & ((std::size_t{1} << w) - 1);
  const std::size_t high = o >> w;
  return low | (t << w) | (high << (w + d));
}

double unitarity_defect(const CpxMatrix& u) {
  const std::size_t n = u.rows();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::complex<double> s = 0.0;
      for (std::size_t p = 0; p < n; ++p) s += u(i, p) * std::conj(u(j, p));
      if (i == j) s -= 1.0;
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

}  // namespace

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

StateVector init_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw Error(ErrorCode::ResourceCap,
                "qubit count " + std::to_string(n_qubits) + " outside 1.." + std::to_string(kMaxQubits));
  }
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes.assign(std::size_t{1} << n_qubits, 0.0);
  s.amplitudes[0] = 1.0;
  return s;
}

GemmReport apply_gate(StateVector& state, const CpxMatrix& u, int window, GemmBackend& backend,
                      const GateOptions& opts) {
  const std::size_t dim = u.rows();
  if (dim == 0 || u.cols() != dim || (dim & (dim - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument, "gate matrix must be square with a power-of-two size");
  }
  const int d = std::countr_zero(dim);
  const int n = state.n_qubits;
  if (window < 0 || window + d > n) {
    throw Error(ErrorCode::InvalidArgument, "gate window [" + std::to_string(window) + ", " +
                                                std::to_string(window + d) + ") outside " +
                                                std::to_string(n) + " qubits");
  }
  if (opts.warn) {
    const double defect = unitarity_defect(u);
    if (!(defect <= opts.unitary_tolerance)) {
      std::cerr << "warning: gate is not unitary (max |U U^H - I| = " << defect << ")\n";
    }
  }

  const std::size_t outer = std::size_t{1} << (n - d);
  CpxMatrix s(outer, dim);
  parallel_for(0, outer, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t o = lo; o < hi; ++o) {
      for (std::size_t t = 0; t < dim; ++t) s(o, t) = state.amplitudes[spread(o, t, window, d)];
    }
  }, 256);
  GemmReport rep;
  const CpxMatrix out = backend.zgemm(s, transpose(u), &rep);
  parallel_for(0, outer, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t o = lo; o < hi; ++o) {
      for (std::size_t t = 0; t < dim; ++t) state.amplitudes[spread(o, t, window, d)] = out(o, t);
    }
  }, 256);
  return rep;
}

std::vector<int> layer_windows(int n_qubits, int d, int layer) {
  std::vector<int> w;
  for (int start = (layer % 2 == 0) ? 0 : d / 2; start + d <= n_qubits; start += d) w.push_back(start);
  return w;
}

void CircuitSpec::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw Error(ErrorCode::ResourceCap, "qubit count must be within 1.." + std::to_string(kMaxQubits));
  }
  if (gate_qubits < 2 || gate_qubits % 2 != 0 || gate_qubits > n_qubits) {
    throw Error(ErrorCode::InvalidArgument, "gate width must be even, >= 2 and <= the qubit count");
  }
  if (layers < 0) throw Error(ErrorCode::InvalidArgument, "layer count must be >= 0");
}

std::size_t CircuitSpec::gate_count() const {
  std::size_t g = 0;
  for (int l = 0; l < layers; ++l) g += layer_windows(n_qubits, gate_qubits, l).size();
  return g;
}

CpxMatrix circuit_gate(const CircuitSpec& spec, std::uint64_t gate_index) {
  return haar_unitary(std::size_t{1} << spec.gate_qubits, {spec.seed, gate_index});
}

std::map<int, std::size_t> SimReport::splits_histogram() const {
  std::map<int, std::size_t> h;
  for (const auto& g : gates) ++h[g.splits];
  return h;
}

namespace {

StateVector simulate(const CircuitSpec& spec, GemmBackend& backend, const GateOptions& opts,
                     std::vector<GateRecord>* records) {
  StateVector state = init_state(spec.n_qubits);
  std::uint64_t gate = 0;
  for (int l = 0; l < spec.layers; ++l) {
    for (int w : layer_windows(spec.n_qubits, spec.gate_qubits, l)) {
      const CpxMatrix u = circuit_gate(spec, gate++);
      const GemmReport rep = apply_gate(state, u, w, backend, opts);
      if (records) records->push_back({l, w, rep.m, rep.n, rep.k, rep.splits_used, rep.slice_bytes});
    }
  }
  return state;
}

}  // namespace

std::pair<StateVector, SimReport> run_brickwork(const CircuitSpec& spec, GemmBackend& backend,
                                                GemmBackend* reference, const GateOptions& opts) {
  spec.validate();
  SimReport rep;
  rep.backend = backend.label();
  StateVector state = simulate(spec, backend, opts, &rep.gates);
  rep.amp0 = state.amplitudes[0];
  rep.amp0_re = rep.amp0.real();
  for (const auto& g : rep.gates) rep.peak_slice_bytes = std::max(rep.peak_slice_bytes, g.slice_bytes);
  if (reference) {
    GateOptions quiet = opts;
    quiet.warn = false;
    const StateVector ref = simulate(spec, *reference, quiet, nullptr);
    const std::complex<double> r = ref.amplitudes[0];
    rep.reference = reference->label();
    rep.reference_amp0 = r;
    rep.rel_error = amplitude_error(rep.amp0, r);
  }
  return {std::move(state), std::move(rep)};
}

double amplitude_error(std::complex<double> a, std::complex<double> ref) {
  const double diff = std::abs(a - ref);
  return std::abs(ref) > 0.0 ? diff / std::abs(ref) : diff;
}

double state_bytes(int n_qubits) {
  return 3.0 * 16.0 * std::ldexp(1.0, n_qubits);
}

}  // namespace ozimmu
