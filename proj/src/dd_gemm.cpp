#include "ozimmu/dd_gemm.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels/kernels_impl.hpp"
#include "ozimmu/parallel.hpp"

namespace ozimmu {
namespace {

void accumulate(const Fp64Matrix& a, const Fp64Matrix& b, std::vector<double>& hi, std::vector<double>& lo,
                Isa isa) {
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  parallel_for(
      0, m,
      [&](std::size_t r0, std::size_t r1) {
#if defined(OZIMM_HAVE_AVX2)
        if (isa == Isa::Avx2) {
          detail::dd_gemm_acc_avx2(a.data(), b.data(), hi.data(), lo.data(), r0, r1, n, k);
          return;
        }
#endif
        (void)isa;
        detail::dd_gemm_acc_scalar(a.data(), b.data(), hi.data(), lo.data(), r0, r1, n, k);
      },
      4);
}

Fp64Matrix negate(const Fp64Matrix& m) {
  Fp64Matrix r = m;
  for (double& v : r.values()) v = -v;
  return r;
}

}  // namespace

DdMatrix dd_gemm(const Fp64Matrix& a, const Fp64Matrix& b, Isa isa) {
  require_conformable(a.cols(), b.rows());
  const std::size_t m = a.rows(), n = b.cols();
  std::vector<double> hi(m * n, 0.0), lo(m * n, 0.0);
  accumulate(a, b, hi, lo, isa);
  DdMatrix c(m, n);
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = {hi[i], lo[i]};
  return c;
}

DdCpxMatrix dd_zgemm(const CpxMatrix& a, const CpxMatrix& b, Isa isa) {
  require_conformable(a.cols(), b.rows());
  const std::size_t m = a.rows(), n = b.cols();
  const Fp64Matrix ar = real_part(a), ai = imag_part(a);
  const Fp64Matrix br = real_part(b), bi = imag_part(b);
  std::vector<double> re_hi(m * n, 0.0), re_lo(m * n, 0.0), im_hi(m * n, 0.0), im_lo(m * n, 0.0);
  accumulate(ar, br, re_hi, re_lo, isa);
  accumulate(negate(ai), bi, re_hi, re_lo, isa);
  accumulate(ar, bi, im_hi, im_lo, isa);
  accumulate(ai, br, im_hi, im_lo, isa);
  DdCpxMatrix c(m, n);
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = {{re_hi[i], re_lo[i]}, {im_hi[i], im_lo[i]}};
  return c;
}

DdMatrix to_dd(const Fp64Matrix& m) {
  DdMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) r.data()[i] = DdValue(m.data()[i]);
  return r;
}

DdCpxMatrix to_dd(const CpxMatrix& m) {
  DdCpxMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    r.data()[i] = {DdValue(m.data()[i].real()), DdValue(m.data()[i].imag())};
  }
  return r;
}

Fp64Matrix round_to_fp64(const DdMatrix& m) {
  Fp64Matrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) r.data()[i] = m.data()[i].to_double();
  return r;
}

CpxMatrix round_to_fp64(const DdCpxMatrix& m) {
  CpxMatrix r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    r.data()[i] = {m.data()[i].re.to_double(), m.data()[i].im.to_double()};
  }
  return r;
}

ErrorStats relative_error_stats(const Fp64Matrix& c, const DdMatrix& ref) {
  if (c.rows() != ref.rows() || c.cols() != ref.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "relative_error_stats: shapes differ");
  }
  ErrorStats st;
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const DdValue r = ref.data()[i];
    if (r.hi == 0.0 && r.lo == 0.0) {
      ++st.zero_reference;
      continue;
    }
    const double diff = std::abs(dd_sub(r, DdValue(c.data()[i])).to_double());
    const double rel = diff / std::abs(r.to_double());
    sum += rel;
    st.max = std::max(st.max, rel);
    ++st.counted;
  }
  st.mean = st.counted ? sum / static_cast<double>(st.counted) : 0.0;
  return st;
}

ErrorStats relative_error_stats(const CpxMatrix& c, const DdCpxMatrix& ref) {
  if (c.rows() != ref.rows() || c.cols() != ref.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "relative_error_stats: shapes differ");
  }
  ErrorStats st;
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const DdComplex r = ref.data()[i];
    const bool zero = r.re.hi == 0.0 && r.re.lo == 0.0 && r.im.hi == 0.0 && r.im.lo == 0.0;
    if (zero) {
      ++st.zero_reference;
      continue;
    }
    const double dre = dd_sub(r.re, DdValue(c.data()[i].real())).to_double();
    const double dim = dd_sub(r.im, DdValue(c.data()[i].imag())).to_double();
    const double rel = std::hypot(dre, dim) / std::hypot(r.re.to_double(), r.im.to_double());
    sum += rel;
    st.max = std::max(st.max, rel);
    ++st.counted;
  }
  st.mean = st.counted ? sum / static_cast<double>(st.counted) : 0.0;
  return st;
}

}  // namespace ozimmu
