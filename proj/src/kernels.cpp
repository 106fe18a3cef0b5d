#include "ozimmu/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "kernels/kernels_impl.hpp"
#include "ozimmu/dd_gemm.hpp"
#include "ozimmu/parallel.hpp"

namespace ozimmu {
namespace {

constexpr std::size_t kMinRowsPerTask = 8;

int max_abs(const IntSliceMatrix& m) {
  int v = 0;
  for (std::int8_t x : m.values()) {
    if (x == -128) throw Error(ErrorCode::InvalidArgument, "slice entry -128 is outside the symmetric int8 range");
    v = std::max(v, std::abs(int{x}));
  }
  return v;
}

#ifndef NDEBUG
void shadow_check(const IntSliceMatrix& a, const IntSliceMatrix& bt, const AccMatrix& c) {
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < bt.rows(); ++j) {
      std::int64_t acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += std::int64_t{a(i, p)} * std::int64_t{bt(j, p)};
      if (acc != c(i, j)) throw Error(ErrorCode::Infeasible, "int32 accumulator overflow detected");
    }
  }
}
#endif

}  // namespace

OverflowBudget overflow_budget(int w, std::uint64_t k) {
  if (w < 1 || w > 31) throw Error(ErrorCode::InvalidArgument, "slice width must be in [1, 31]");
  const std::uint64_t top = (std::uint64_t{1} << w) - 1;
  const unsigned __int128 bound = static_cast<unsigned __int128>(k) * top * top;
  OverflowBudget b;
  b.safe = bound <= static_cast<unsigned __int128>(kInt32AccMax);
  b.bound = bound > static_cast<unsigned __int128>(UINT64_MAX) ? UINT64_MAX : static_cast<std::uint64_t>(bound);
  return b;
}

AccMatrix int_gemm_nt(const IntSliceMatrix& a, const IntSliceMatrix& bt, KernelChoice choice) {
  require_conformable(a.cols(), bt.cols());
  const std::size_t m = a.rows(), n = bt.rows(), k = a.cols();
  const std::uint64_t bound = std::uint64_t(k) * std::uint64_t(max_abs(a)) * std::uint64_t(max_abs(bt));
  if (bound > static_cast<std::uint64_t>(kInt32AccMax)) {
    throw Error(ErrorCode::Infeasible, "int_gemm: k * max|A| * max|B| = " + std::to_string(bound) +
                                           " exceeds the int32 accumulator");
  }
  if (!isa_supported(choice.isa)) {
    throw Error(ErrorCode::InvalidArgument, "int_gemm: kernel variant not available");
  }
  AccMatrix c(m, n);
  const auto* pa = a.data();
  const auto* pb = bt.data();
  auto* pc = c.data();
  parallel_for(
      0, m,
      [&](std::size_t lo, std::size_t hi) {
        switch (choice.isa) {
          case Isa::Avx2:
#if defined(OZIMM_HAVE_AVX2)
            detail::int_gemm_nt_avx2(pa, pb, pc, lo, hi, n, k);
            return;
#endif
          case Isa::Neon:
#if defined(OZIMM_HAVE_NEON)
            detail::int_gemm_nt_neon(pa, pb, pc, lo, hi, n, k);
            return;
#endif
          case Isa::Scalar:
            if (choice.block > 0) {
              detail::int_gemm_nt_blocked(pa, pb, pc, lo, hi, n, k, choice.block);
            } else {
              detail::int_gemm_nt_scalar(pa, pb, pc, lo, hi, n, k);
            }
            return;
        }
      },
      kMinRowsPerTask);
#ifndef NDEBUG
  shadow_check(a, bt, c);
#endif
  return c;
}

AccMatrix int_gemm(const IntSliceMatrix& a, const IntSliceMatrix& b, KernelChoice choice) {
  require_conformable(a.cols(), b.rows());
  return int_gemm_nt(a, transpose(b), choice);
}

bool fp32_exact(double x) { return static_cast<double>(static_cast<float>(x)) == x; }

Fp64Matrix fp32_gemm_nt(const Fp64Matrix& a, const Fp64Matrix& bt, KernelChoice choice) {
  require_conformable(a.cols(), bt.cols());
  const std::size_t m = a.rows(), n = bt.rows(), k = a.cols();
  std::vector<float> fa(a.size()), fb(bt.size()), fc(m * n);
  auto narrow = [](std::span<const double> src, std::vector<float>& dst) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (!fp32_exact(src[i])) {
        throw Error(ErrorCode::InvalidArgument, "fp32_gemm: operand entry not representable in binary32");
      }
      dst[i] = static_cast<float>(src[i]);
    }
  };
  narrow(a.values(), fa);
  narrow(bt.values(), fb);
  if (!isa_supported(choice.isa)) {
    throw Error(ErrorCode::InvalidArgument, "fp32_gemm: kernel variant not available");
  }
  parallel_for(
      0, m,
      [&](std::size_t lo, std::size_t hi) {
        switch (choice.isa) {
          case Isa::Avx2:
#if defined(OZIMM_HAVE_AVX2)
            detail::fp32_gemm_nt_avx2(fa.data(), fb.data(), fc.data(), lo, hi, n, k);
            return;
#endif
          case Isa::Neon:
#if defined(OZIMM_HAVE_NEON)
            detail::fp32_gemm_nt_neon(fa.data(), fb.data(), fc.data(), lo, hi, n, k);
            return;
#endif
          case Isa::Scalar:
            detail::fp32_gemm_nt_scalar(fa.data(), fb.data(), fc.data(), lo, hi, n, k);
            return;
        }
      },
      kMinRowsPerTask);
  Fp64Matrix c(m, n);
  for (std::size_t i = 0; i < fc.size(); ++i) c.data()[i] = fc[i];
#ifndef NDEBUG
  const DdMatrix ref = dd_gemm(a, transpose(bt));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (ref.data()[i].hi != c.data()[i] || ref.data()[i].lo != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "fp32_gemm: rounding occurred, operands violate the split budget");
    }
  }
#endif
  return c;
}

Fp64Matrix fp32_gemm(const Fp64Matrix& a, const Fp64Matrix& b, KernelChoice choice) {
  require_conformable(a.cols(), b.rows());
  return fp32_gemm_nt(a, transpose(b), choice);
}

Fp64Matrix plain_dgemm(const Fp64Matrix& a, const Fp64Matrix& b) {
  require_conformable(a.cols(), b.rows());
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  Fp64Matrix c(m, n);
  parallel_for(
      0, m,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          double* ci = c.data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            const double* bp = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
          }
        }
      },
      kMinRowsPerTask);
  return c;
}

CpxMatrix plain_zgemm(const CpxMatrix& a, const CpxMatrix& b) {
  require_conformable(a.cols(), b.rows());
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  CpxMatrix c(m, n);
  parallel_for(
      0, m,
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> re(n), im(n);
        for (std::size_t i = lo; i < hi; ++i) {
          std::fill(re.begin(), re.end(), 0.0);
          std::fill(im.begin(), im.end(), 0.0);
          for (std::size_t p = 0; p < k; ++p) {
            const double ar = a(i, p).real(), ai = a(i, p).imag();
            for (std::size_t j = 0; j < n; ++j) {
              const double br = b(p, j).real(), bi = b(p, j).imag();
              re[j] = re[j] + ar * br;
              re[j] = re[j] - ai * bi;
              im[j] = im[j] + ar * bi;
              im[j] = im[j] + ai * br;
            }
          }
          for (std::size_t j = 0; j < n; ++j) c(i, j) = {re[j], im[j]};
        }
      },
      kMinRowsPerTask);
  return c;
}

}  // namespace ozimmu
