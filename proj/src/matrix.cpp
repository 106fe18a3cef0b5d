#include "ozimmu/matrix.hpp"

#include <cmath>

namespace ozimmu {

Fp64Matrix real_part(const CpxMatrix& m) {
  Fp64Matrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) r.data()[i] = m.data()[i].real();
  return r;
}

Fp64Matrix imag_part(const CpxMatrix& m) {
  Fp64Matrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) r.data()[i] = m.data()[i].imag();
  return r;
}

CpxMatrix make_complex(const Fp64Matrix& re, const Fp64Matrix& im) {
  if (re.rows() != im.rows() || re.cols() != im.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "real and imaginary parts differ in shape");
  }
  CpxMatrix c(re.rows(), re.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = {re.data()[i], im.data()[i]};
  return c;
}

CpxMatrix conj_transpose(const CpxMatrix& m) {
  CpxMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = std::conj(m(i, j));
  }
  return t;
}

void require_finite(const Fp64Matrix& m, const char* what) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry");
  }
}

void require_finite(const CpxMatrix& m, const char* what) {
  for (const auto& v : m.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::NonFinite, std::string(what) + " has a non-finite entry");
    }
  }
}

void require_conformable(std::size_t a_cols, std::size_t b_rows) {
  if (a_cols != b_rows) {
    throw Error(ErrorCode::DimensionMismatch, "inner dimensions differ: " + std::to_string(a_cols) +
                                                  " vs " + std::to_string(b_rows));
  }
}

std::string shape_string(std::size_t m, std::size_t n, std::size_t k) {
  return std::to_string(m) + "x" + std::to_string(n) + "x" + std::to_string(k);
}

}  // namespace ozimmu
