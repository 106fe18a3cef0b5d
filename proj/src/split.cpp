#include "ozimmu/split.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ozimmu/dd.hpp"
#include "ozimmu/parallel.hpp"

namespace ozimmu {
namespace {

constexpr int kInt8MagnitudeBits = 7;

// |x| = sig * 2^q with sig < 2^53 an integer.
struct Significand {
  std::uint64_t sig = 0;
  int q = 0;

  int exponent() const { return q + std::bit_width(sig) - 1; }  // floor(log2 |x|)
};

Significand decompose(double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  const int field = static_cast<int>((bits >> 52) & 0x7ff);
  const std::uint64_t frac = bits & ((std::uint64_t{1} << 52) - 1);
  if (field == 0) return {frac, -1074};
  return {frac | (std::uint64_t{1} << 52), field - 1075};
}

// floor(sig * 2^t) mod 2^w
std::uint64_t bit_window(std::uint64_t sig, int t, int w) {
  const std::uint64_t mask = (std::uint64_t{1} << w) - 1;
  if (t >= 0) return t >= 64 ? 0 : (sig << t) & mask;
  return -t >= 64 ? 0 : (sig >> -t) & mask;
}

// ceil(log2 m) for m > 0
int ceil_log2_value(double m) {
  int e = 0;
  const double f = std::frexp(m, &e);  // m = f * 2^e, f in [0.5, 1)
  return f == 0.5 ? e - 1 : e;
}

}  // namespace

double SliceSet::row_scale(std::size_t i) const {
  return row_exp[i] == kZeroRow ? 0.0 : std::ldexp(1.0, row_exp[i]);
}

double SliceSet::slice_bytes(double input_bytes) const {
  return static_cast<double>(splits) * static_cast<double>(rows * cols) * input_bytes;
}

int int_slice_width(const MmuSpec& mmu, std::uint64_t k_eff) {
  const int w = bits_per_slice(mmu, k_eff);
  if (w > kInt8MagnitudeBits) {
    throw Error(ErrorCode::Infeasible, "mmu '" + mmu.name + "' needs " + std::to_string(w) +
                                           "-bit slices; only int8 slice storage is executable");
  }
  return w;
}

SliceSet split_int(const Fp64Matrix& m, int s, const MmuSpec& mmu, std::uint64_t k_eff) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  require_finite(m, "split_int input");
  const int w = int_slice_width(mmu, k_eff);

  SliceSet ss;
  ss.splits = s;
  ss.width = w;
  ss.alpha = slice_bits(mmu, k_eff);
  ss.rows = m.rows();
  ss.cols = m.cols();
  ss.slices.assign(s, IntSliceMatrix(m.rows(), m.cols()));
  ss.row_exp.assign(m.rows(), SliceSet::kZeroRow);

  parallel_for(
      0, m.rows(),
      [&](std::size_t lo, std::size_t hi) {
        std::vector<Significand> row(m.cols());
        for (std::size_t i = lo; i < hi; ++i) {
          int emax = SliceSet::kZeroRow;
          for (std::size_t j = 0; j < m.cols(); ++j) {
            row[j] = decompose(m(i, j));
            if (row[j].sig != 0) emax = std::max(emax, row[j].exponent());
          }
          if (emax == SliceSet::kZeroRow) continue;
          const int e_row = emax + 1;
          ss.row_exp[i] = e_row;
          for (std::size_t j = 0; j < m.cols(); ++j) {
            if (row[j].sig == 0) continue;
            const bool negative = std::signbit(m(i, j));
            for (int p = 1; p <= s; ++p) {
              const auto mag = static_cast<std::int8_t>(bit_window(row[j].sig, row[j].q - e_row + p * w, w));
              ss.slices[p - 1](i, j) = negative ? static_cast<std::int8_t>(-mag) : mag;
            }
          }
        }
      },
      16);
  return ss;
}

int fp_split_beta(std::uint64_t k_eff, int working_bits) {
  if (k_eff == 0) throw Error(ErrorCode::InvalidArgument, "accumulation length k must be >= 1");
  return (working_bits + ceil_log2(k_eff) + 1) / 2;
}

FpSliceSet split_fp(const Fp64Matrix& m, int s, std::uint64_t k_eff, int working_bits) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  if (working_bits < 2 || working_bits > 53) {
    throw Error(ErrorCode::InvalidArgument, "working precision must be between 2 and 53 bits");
  }
  require_finite(m, "split_fp input");

  FpSliceSet fs;
  fs.splits = s;
  fs.working_bits = working_bits;
  fs.beta = fp_split_beta(k_eff, working_bits);
  fs.rows = m.rows();
  fs.cols = m.cols();
  fs.row_exp.assign(s - 1, std::vector<int>(m.rows(), SliceSet::kZeroRow));

  // The binary64 constant is 2^(53 - working_bits) larger than the one the
  // working format would use, so fl64(R + sigma) rounds at the same
  // granularity 2^(c + beta - working_bits) as the narrow format would.
  const int widen = 53 - working_bits;
  Fp64Matrix residual = m;
  for (int p = 0; p + 1 < s; ++p) {
    Fp64Matrix slice(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double rmax = 0.0;
      for (double v : residual.row(i)) rmax = std::max(rmax, std::abs(v));
      if (rmax == 0.0) continue;
      const int c = ceil_log2_value(rmax);
      const int sigma_exp = c + fs.beta + widen;
      if (sigma_exp > 1023) {
        throw Error(ErrorCode::Infeasible, "split_fp: row magnitude too close to the binary64 overflow threshold");
      }
      fs.row_exp[p][i] = c;
      const double sigma = 0.75 * std::ldexp(1.0, sigma_exp);
      for (std::size_t j = 0; j < m.cols(); ++j) {
        const double r = residual(i, j);
        const double top = (r + sigma) - sigma;
        slice(i, j) = top;
        residual(i, j) = r - top;
      }
    }
    fs.slices.push_back(std::move(slice));
  }
  fs.slices.push_back(std::move(residual));
  return fs;
}

Fp64Matrix reconstruct(const SliceSet& ss) {
  Fp64Matrix out(ss.rows, ss.cols);
  for (std::size_t i = 0; i < ss.rows; ++i) {
    if (ss.row_exp[i] == SliceSet::kZeroRow) continue;
    for (std::size_t j = 0; j < ss.cols; ++j) {
      DdValue acc;
      for (int p = 1; p <= ss.splits; ++p) {
        const int v = ss.slices[p - 1](i, j);
        if (v != 0) acc = dd_add(acc, DdValue(std::ldexp(static_cast<double>(v), ss.row_exp[i] - p * ss.width)));
      }
      out(i, j) = acc.to_double();
    }
  }
  return out;
}

Fp64Matrix reconstruct(const FpSliceSet& ss) {
  Fp64Matrix out(ss.rows, ss.cols);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    DdValue acc;
    for (const auto& slice : ss.slices) acc = dd_add(acc, DdValue(slice.data()[idx]));
    out.data()[idx] = acc.to_double();
  }
  return out;
}

int valid_mantissa_length(double x) {
  const Significand d = decompose(x);
  if (d.sig == 0) return 0;
  return std::bit_width(d.sig) - std::countr_zero(d.sig);
}

MantissaLossProfile::MantissaLossProfile(const Fp64Matrix& m) {
  require_finite(m, "mantissa_loss input");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    int emax = SliceSet::kZeroRow;
    for (double v : m.row(i)) {
      if (v != 0.0) emax = std::max(emax, decompose(v).exponent());
    }
    if (emax == SliceSet::kZeroRow) continue;
    const int e_row = emax + 1;
    for (double v : m.row(i)) {
      if (v == 0.0) continue;
      const Significand d = decompose(v);
      const int offset = e_row - d.exponent();
      ++required_[offset + valid_mantissa_length(v)];
      ++nonzero_;
    }
  }
}

LossStats MantissaLossProfile::at(int kept_bits) const {
  LossStats st;
  if (nonzero_ == 0) return st;
  double total = 0.0;
  for (auto it = required_.upper_bound(kept_bits); it != required_.end(); ++it) {
    const int loss = it->first - kept_bits;
    total += static_cast<double>(loss) * static_cast<double>(it->second);
    st.max_bits = std::max(st.max_bits, loss);
  }
  st.mean_bits = total / static_cast<double>(nonzero_);
  return st;
}

int MantissaLossProfile::max_required_bits() const noexcept {
  return required_.empty() ? 0 : required_.rbegin()->first;
}

LossStats mantissa_loss(const Fp64Matrix& m, int s, const MmuSpec& mmu, std::uint64_t k_eff) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  const int w = int_slice_width(mmu, k_eff);
  return MantissaLossProfile(m).at(s * w);
}

}  // namespace ozimmu
