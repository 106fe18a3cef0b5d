#include "ozimmu/ozgemm.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <string>

#include "ozimmu/parallel.hpp"

namespace ozimmu {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// x * 2^e, exact unless the result leaves the binary64 range (then it rounds
// to a subnormal/zero or overflows to inf exactly as ldexp does).
inline double scale_pow2(double x, int e) {
  if (e >= -1022 && e <= 1023) {
    return x * std::bit_cast<double>(static_cast<std::uint64_t>(e + 1023) << 52);
  }
  return std::ldexp(x, e);
}

// c(r, col) +-= tmp(r, col) * 2^(ea[r] + eb[col] - shift)
void accumulate_scaled(const AccMatrix& tmp, const std::vector<int>& ea, const std::vector<int>& eb, int shift,
                       bool negate, Fp64Matrix& c) {
  const std::size_t n = c.cols();
  parallel_for(
      0, c.rows(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
          if (ea[r] == SliceSet::kZeroRow) continue;
          const int base = ea[r] - shift;
          const std::int32_t* t = tmp.data() + r * n;
          double* cr = c.data() + r * n;
          for (std::size_t col = 0; col < n; ++col) {
            if (t[col] == 0 || eb[col] == SliceSet::kZeroRow) continue;
            const double v = scale_pow2(static_cast<double>(t[col]), base + eb[col]);
            cr[col] = negate ? cr[col] - v : cr[col] + v;
          }
        }
      },
      16);
}

struct ProductTerm {
  const SliceSet* a;
  const SliceSet* bt;
  Fp64Matrix* c;
  bool negate;
};

// Slice pairs in accumulation order. TailFirst walks the levels l = i + j
// from the largest down (i descending within a level) so that the many small
// products are summed before they meet the large ones.
std::vector<std::pair<int, int>> pair_order(int s, bool all_pairs, AccumulationOrder order) {
  std::vector<std::pair<int, int>> pairs;
  if (order == AccumulationOrder::Ascending) {
    for (int i = 1; i <= s; ++i) {
      const int j_end = all_pairs ? s : s - i + 1;
      for (int j = 1; j <= j_end; ++j) pairs.emplace_back(i, j);
    }
    return pairs;
  }
  const int top = all_pairs ? 2 * s : s + 1;
  for (int l = top; l >= 2; --l) {
    for (int i = std::min(s, l - 1); i >= 1 && l - i <= s; --i) pairs.emplace_back(i, l - i);
  }
  return pairs;
}

// Slice-pair loop shared by the real and complex drivers. Every term of a
// pair is applied before moving to the next pair.
void run_pairs(std::span<const ProductTerm> terms, int s, int w, bool all_pairs, AccumulationOrder order,
               const KernelChoice& kernel, GemmTiming& timing) {
  for (const auto& [i, j] : pair_order(s, all_pairs, order)) {
    for (const auto& term : terms) {
      auto t0 = Clock::now();
      const AccMatrix tmp = int_gemm_nt(term.a->slices[i - 1], term.bt->slices[j - 1], kernel);
      timing.slice_gemm += seconds_since(t0);
      t0 = Clock::now();
      accumulate_scaled(tmp, term.a->row_exp, term.bt->row_exp, (i + j) * w, term.negate, *term.c);
      timing.accumulate += seconds_since(t0);
    }
  }
}

LossStats worst(const LossStats& x, const LossStats& y) {
  return {std::max(x.mean_bits, y.mean_bits), std::max(x.max_bits, y.max_bits)};
}

}  // namespace

OzConfig OzConfig::fixed(int s, SplitPath path) {
  OzConfig cfg;
  cfg.splits = s;
  cfg.path = path;
  return cfg;
}

OzConfig OzConfig::automatic(double threshold) {
  OzConfig cfg;
  cfg.loss_threshold = threshold;
  return cfg;
}

void OzConfig::validate() const {
  mmu.validate();
  if (splits && *splits < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  if (!splits && path != SplitPath::Integer) {
    throw Error(ErrorCode::InvalidArgument, "automatic split selection requires the integer path");
  }
  if (!(loss_threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "loss threshold must be >= 0");
  if (max_splits < 1) throw Error(ErrorCode::InvalidArgument, "max_splits must be >= 1");
}

AutoSplitResult auto_splits(std::span<const Fp64Matrix* const> left, std::span<const Fp64Matrix* const> right,
                            const MmuSpec& mmu, double threshold, int s_max) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "loss threshold must be >= 0");
  if (s_max < 1) throw Error(ErrorCode::InvalidArgument, "s_max must be >= 1");
  std::size_t k = 0;
  if (!left.empty()) k = left.front()->cols();
  else if (!right.empty()) k = right.front()->rows();
  if (k == 0) return {};
  const int w = int_slice_width(mmu, k);

  std::vector<MantissaLossProfile> profiles;
  for (const Fp64Matrix* m : left) profiles.emplace_back(*m);
  for (const Fp64Matrix* m : right) profiles.emplace_back(transpose(*m));

  AutoSplitResult res;
  for (int s = 1; s <= s_max; ++s) {
    LossStats st;
    for (const auto& p : profiles) st = worst(st, p.at(s * w));
    res.splits = s;
    res.loss = st;
    if (st.mean_bits <= threshold) return res;
  }
  res.capped = true;
  return res;
}

AutoSplitResult auto_splits(const Fp64Matrix& a, const Fp64Matrix& b, const MmuSpec& mmu, double threshold,
                            int s_max) {
  require_conformable(a.cols(), b.rows());
  const Fp64Matrix* l[] = {&a};
  const Fp64Matrix* r[] = {&b};
  return auto_splits(l, r, mmu, threshold, s_max);
}

std::pair<Fp64Matrix, GemmReport> oz_dgemm(const Fp64Matrix& a, const Fp64Matrix& b, const OzConfig& cfg) {
  cfg.validate();
  require_conformable(a.cols(), b.rows());
  require_finite(a, "oz_dgemm A");
  require_finite(b, "oz_dgemm B");
  GemmReport rep;
  rep.m = a.rows();
  rep.n = b.cols();
  rep.k = a.cols();
  Fp64Matrix c(rep.m, rep.n);

  if (cfg.path == SplitPath::Floating) {
    c = oz_dgemm_fp(a, b, *cfg.splits, &rep, cfg.kernel, cfg.order);
    return {std::move(c), rep};
  }
  if (rep.k == 0) return {std::move(c), rep};

  auto t0 = Clock::now();
  int s = 0;
  if (cfg.splits) {
    s = *cfg.splits;
  } else {
    const auto pick = auto_splits(a, b, cfg.mmu, cfg.loss_threshold, cfg.max_splits);
    s = pick.splits;
    rep.auto_capped = pick.capped;
  }
  const Fp64Matrix bt = transpose(b);
  const SliceSet sa = split_int(a, s, cfg.mmu, rep.k);
  const SliceSet sb = split_int(bt, s, cfg.mmu, rep.k);
  rep.timing.split = seconds_since(t0);
  rep.loss = worst(MantissaLossProfile(a).at(s * sa.width), MantissaLossProfile(bt).at(s * sa.width));
  rep.splits_used = s;
  rep.gemm_calls = cfg.all_pairs ? std::uint64_t(s) * std::uint64_t(s) : gemm_count(s);
  rep.slice_bytes = sa.slice_bytes(cfg.mmu.input_bytes) + sb.slice_bytes(cfg.mmu.input_bytes);

  const ProductTerm terms[] = {{&sa, &sb, &c, false}};
  run_pairs(terms, s, sa.width, cfg.all_pairs, cfg.order, cfg.kernel, rep.timing);
  return {std::move(c), rep};
}

std::pair<CpxMatrix, GemmReport> oz_zgemm(const CpxMatrix& a, const CpxMatrix& b, const OzConfig& cfg) {
  cfg.validate();
  require_conformable(a.cols(), b.rows());
  require_finite(a, "oz_zgemm A");
  require_finite(b, "oz_zgemm B");
  GemmReport rep;
  rep.m = a.rows();
  rep.n = b.cols();
  rep.k = a.cols();
  rep.real_products = 4;

  const Fp64Matrix ar = real_part(a), ai = imag_part(a);
  const Fp64Matrix br = real_part(b), bi = imag_part(b);

  if (cfg.path == SplitPath::Floating) {
    const int s = *cfg.splits;
    GemmReport part;
    Fp64Matrix re = oz_dgemm_fp(ar, br, s, &part, cfg.kernel, cfg.order);
    const Fp64Matrix re2 = oz_dgemm_fp(ai, bi, s, nullptr, cfg.kernel, cfg.order);
    Fp64Matrix im = oz_dgemm_fp(ar, bi, s, nullptr, cfg.kernel, cfg.order);
    const Fp64Matrix im2 = oz_dgemm_fp(ai, br, s, nullptr, cfg.kernel, cfg.order);
    for (std::size_t i = 0; i < re.size(); ++i) {
      re.data()[i] -= re2.data()[i];
      im.data()[i] += im2.data()[i];
    }
    rep.splits_used = s;
    rep.gemm_calls = part.gemm_calls;
    rep.slice_bytes = 2.0 * part.slice_bytes;
    return {make_complex(re, im), rep};
  }

  Fp64Matrix re(rep.m, rep.n), im(rep.m, rep.n);
  if (rep.k == 0) return {make_complex(re, im), rep};

  auto t0 = Clock::now();
  const Fp64Matrix br_t = transpose(br), bi_t = transpose(bi);
  int s = 0;
  if (cfg.splits) {
    s = *cfg.splits;
  } else {
    const Fp64Matrix* l[] = {&ar, &ai};
    const Fp64Matrix* r[] = {&br, &bi};
    const auto pick = auto_splits(l, r, cfg.mmu, cfg.loss_threshold, cfg.max_splits);
    s = pick.splits;
    rep.auto_capped = pick.capped;
  }
  // Real and imaginary parts are split separately, once each.
  const SliceSet sar = split_int(ar, s, cfg.mmu, rep.k);
  const SliceSet sai = split_int(ai, s, cfg.mmu, rep.k);
  const SliceSet sbr = split_int(br_t, s, cfg.mmu, rep.k);
  const SliceSet sbi = split_int(bi_t, s, cfg.mmu, rep.k);
  rep.timing.split = seconds_since(t0);
  const int kept = s * sar.width;
  rep.loss = worst(worst(MantissaLossProfile(ar).at(kept), MantissaLossProfile(ai).at(kept)),
                   worst(MantissaLossProfile(br_t).at(kept), MantissaLossProfile(bi_t).at(kept)));
  rep.splits_used = s;
  rep.gemm_calls = cfg.all_pairs ? std::uint64_t(s) * std::uint64_t(s) : gemm_count(s);
  rep.slice_bytes = sar.slice_bytes(cfg.mmu.input_bytes) + sai.slice_bytes(cfg.mmu.input_bytes) +
                    sbr.slice_bytes(cfg.mmu.input_bytes) + sbi.slice_bytes(cfg.mmu.input_bytes);

  const ProductTerm terms[] = {
      {&sar, &sbr, &re, false},
      {&sai, &sbi, &re, true},
      {&sar, &sbi, &im, false},
      {&sai, &sbr, &im, false},
  };
  run_pairs(terms, s, sar.width, cfg.all_pairs, cfg.order, cfg.kernel, rep.timing);
  return {make_complex(re, im), rep};
}

Fp64Matrix oz_dgemm_fp(const Fp64Matrix& a, const Fp64Matrix& b, int s, GemmReport* report, KernelChoice kernel,
                       AccumulationOrder order) {
  if (s < 1) throw Error(ErrorCode::InvalidArgument, "split count must be >= 1");
  require_conformable(a.cols(), b.rows());
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  Fp64Matrix c(m, n);
  GemmReport rep;
  rep.m = m;
  rep.n = n;
  rep.k = k;
  rep.splits_used = s;
  rep.gemm_calls = gemm_count(s);
  if (k == 0) {
    if (report) *report = rep;
    return c;
  }

  auto t0 = Clock::now();
  const FpSliceSet fa = split_fp(a, s, k);
  const FpSliceSet fb = split_fp(transpose(b), s, k);
  // Extracted slices are rescaled per row by 2^-c so that every entry is a
  // binary32 value in [-1, 1]; the product is rescaled by 2^(ca + cb).
  auto normalize = [](const FpSliceSet& fs, int p) {
    Fp64Matrix out = fs.slices[p];
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const int e = fs.row_exp[p][i];
      if (e == SliceSet::kZeroRow) continue;
      for (double& v : out.row(i)) v = std::ldexp(v, -e);
    }
    return out;
  };
  std::vector<Fp64Matrix> na, nb;
  for (int p = 0; p + 1 < s; ++p) {
    na.push_back(normalize(fa, p));
    nb.push_back(normalize(fb, p));
  }
  rep.timing.split = seconds_since(t0);
  rep.slice_bytes = static_cast<double>(m * k + n * k) * ((s - 1) * 4.0 + 8.0);

  for (const auto& [i, j] : pair_order(s, false, order)) {
    {
      t0 = Clock::now();
      if (i < s && j < s) {
        const Fp64Matrix tmp = fp32_gemm_nt(na[i - 1], nb[j - 1], kernel);
        rep.timing.slice_gemm += seconds_since(t0);
        t0 = Clock::now();
        const auto& ea = fa.row_exp[i - 1];
        const auto& eb = fb.row_exp[j - 1];
        for (std::size_t r = 0; r < m; ++r) {
          if (ea[r] == SliceSet::kZeroRow) continue;
          for (std::size_t col = 0; col < n; ++col) {
            if (eb[col] == SliceSet::kZeroRow) continue;
            c(r, col) += scale_pow2(tmp(r, col), ea[r] + eb[col]);
          }
        }
      } else {
        // The residual slice is not binary32-exact; its products run in binary64.
        const Fp64Matrix tmp = plain_dgemm(fa.slices[i - 1], transpose(fb.slices[j - 1]));
        rep.timing.slice_gemm += seconds_since(t0);
        t0 = Clock::now();
        for (std::size_t idx = 0; idx < c.size(); ++idx) c.data()[idx] += tmp.data()[idx];
      }
      rep.timing.accumulate += seconds_since(t0);
    }
  }
  if (report) *report = rep;
  return c;
}

// ---------------------------------------------------------------------------
// Backends

BackendSpec BackendSpec::parse(std::string_view text) {
  auto bad = [&] { return Error(ErrorCode::InvalidArgument, "unknown backend '" + std::string(text) + "'"); };
  BackendSpec spec;
  if (text == "fp64") return spec;
  if (text == "dd") {
    spec.kind = BackendKind::DoubleDouble;
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw bad();
  const std::string head(text.substr(0, colon));
  const std::string arg(text.substr(colon + 1));
  try {
    std::size_t used = 0;
    if (head == "ozaki" || head == "ozfp") {
      spec.kind = head == "ozaki" ? BackendKind::Ozaki : BackendKind::OzakiFloat;
      spec.splits = std::stoi(arg, &used);
      if (spec.splits < 1) throw bad();
    } else if (head == "auto") {
      spec.kind = BackendKind::OzakiAuto;
      spec.threshold = std::stod(arg, &used);
      if (!(spec.threshold >= 0.0)) throw bad();
    } else {
      throw bad();
    }
    if (used != arg.size()) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  return spec;
}

std::string BackendSpec::label() const {
  switch (kind) {
    case BackendKind::Fp64: return "fp64";
    case BackendKind::DoubleDouble: return "dd";
    case BackendKind::Ozaki: return "ozaki:" + std::to_string(splits);
    case BackendKind::OzakiFloat: return "ozfp:" + std::to_string(splits);
    case BackendKind::OzakiAuto: {
      std::string t = std::to_string(threshold);
      t.erase(t.find_last_not_of('0') + 1);
      if (t.back() == '.') t.pop_back();
      return "auto:" + t;
    }
  }
  return "?";
}

namespace {

class Fp64Backend final : public GemmBackend {
 public:
  std::string label() const override { return "fp64"; }
  Fp64Matrix dgemm(const Fp64Matrix& a, const Fp64Matrix& b, GemmReport* report) override {
    if (report) *report = GemmReport{a.rows(), b.cols(), a.cols()};
    return plain_dgemm(a, b);
  }
  CpxMatrix zgemm(const CpxMatrix& a, const CpxMatrix& b, GemmReport* report) override {
    if (report) *report = GemmReport{a.rows(), b.cols(), a.cols()};
    return plain_zgemm(a, b);
  }
};

class DdBackend final : public GemmBackend {
 public:
  std::string label() const override { return "dd"; }
  Fp64Matrix dgemm(const Fp64Matrix& a, const Fp64Matrix& b, GemmReport* report) override {
    if (report) *report = GemmReport{a.rows(), b.cols(), a.cols()};
    return round_to_fp64(dd_gemm(a, b));
  }
  CpxMatrix zgemm(const CpxMatrix& a, const CpxMatrix& b, GemmReport* report) override {
    if (report) *report = GemmReport{a.rows(), b.cols(), a.cols()};
    return round_to_fp64(dd_zgemm(a, b));
  }
};

class OzakiBackend final : public GemmBackend {
 public:
  OzakiBackend(OzConfig cfg, std::string label) : cfg_(std::move(cfg)), label_(std::move(label)) {
    cfg_.validate();
  }
  std::string label() const override { return label_; }
  Fp64Matrix dgemm(const Fp64Matrix& a, const Fp64Matrix& b, GemmReport* report) override {
    auto [c, rep] = oz_dgemm(a, b, cfg_);
    if (report) *report = rep;
    return std::move(c);
  }
  CpxMatrix zgemm(const CpxMatrix& a, const CpxMatrix& b, GemmReport* report) override {
    auto [c, rep] = oz_zgemm(a, b, cfg_);
    if (report) *report = rep;
    return std::move(c);
  }

 private:
  OzConfig cfg_;
  std::string label_;
};

}  // namespace

std::unique_ptr<GemmBackend> gemm_backend(const BackendSpec& spec) {
  auto ozaki = [&](OzConfig cfg) {
    cfg.order = spec.order;
    return std::make_unique<OzakiBackend>(std::move(cfg), spec.label());
  };
  switch (spec.kind) {
    case BackendKind::Fp64: return std::make_unique<Fp64Backend>();
    case BackendKind::DoubleDouble: return std::make_unique<DdBackend>();
    case BackendKind::Ozaki: return ozaki(OzConfig::fixed(spec.splits));
    case BackendKind::OzakiFloat: return ozaki(OzConfig::fixed(spec.splits, SplitPath::Floating));
    case BackendKind::OzakiAuto: return ozaki(OzConfig::automatic(spec.threshold));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown backend kind");
}

AccumulationOrder parse_order(std::string_view text) {
  if (text == "tail-first") return AccumulationOrder::TailFirst;
  if (text == "ascending") return AccumulationOrder::Ascending;
  throw Error(ErrorCode::InvalidArgument, "unknown accumulation order '" + std::string(text) + "'");
}

std::string_view order_name(AccumulationOrder order) {
  return order == AccumulationOrder::TailFirst ? "tail-first" : "ascending";
}

std::unique_ptr<GemmBackend> gemm_backend(const OzConfig& cfg) {
  std::string label;
  if (!cfg.splits) {
    BackendSpec s{BackendKind::OzakiAuto, 0, cfg.loss_threshold};
    label = s.label();
  } else {
    label = (cfg.path == SplitPath::Integer ? "ozaki:" : "ozfp:") + std::to_string(*cfg.splits);
  }
  return std::make_unique<OzakiBackend>(cfg, label);
}

}  // namespace ozimmu
