// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ozimmu/cli.hpp"
#include "ozimmu/datagen.hpp"
#include "ozimmu/dd_gemm.hpp"
#include "ozimmu/kernels.hpp"
#include "ozimmu/matrix_io.hpp"
#include "ozimmu/mmu_plan.hpp"
#include "ozimmu/ozgemm.hpp"
#include "ozimmu/parallel.hpp"
#include "ozimmu/qcsim.hpp"
#include "ozimmu/split.hpp"

using namespace ozimmu;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. int_gemm vs a checked 128-bit integer oracle; blocked and SIMD schedules vs naive.

Outcome exactness_core() {
  using Wide = boost::multiprecision::checked_int128_t;
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<int> width(1, 7);
  std::uniform_int_distribution<std::size_t> block(1, 64);
  const std::size_t n = 64;
  std::size_t mismatches = 0, schedule_mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const int w = width(gen);
    std::uniform_int_distribution<int> d(-((1 << w) - 1), (1 << w) - 1);
    IntSliceMatrix a(n, n), b(n, n);
    for (auto& v : a.values()) v = static_cast<std::int8_t>(d(gen));
    for (auto& v : b.values()) v = static_cast<std::int8_t>(d(gen));
    const AccMatrix c = int_gemm(a, b, {Isa::Scalar, 0});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Wide s = 0;
        for (std::size_t p = 0; p < n; ++p) s += Wide(a(i, p)) * Wide(b(p, j));
        if (s != Wide(c(i, j))) ++mismatches;
      }
    }
    if (int_gemm(a, b, {Isa::Scalar, block(gen)}) != c) ++schedule_mismatches;
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
      if (isa_supported(isa) && int_gemm(a, b, {isa, 0}) != c) ++schedule_mismatches;
    }
  }
  return {mismatches == 0 && schedule_mismatches == 0,
          "1000 pairs, " + std::to_string(mismatches) + " oracle mismatches, " +
              std::to_string(schedule_mismatches) + " schedule mismatches"};
}

// ---------------------------------------------------------------------------
// 2. Every product of two extracted split_fp slices is exact in binary32.

Outcome error_free_slice_products() {
  std::mt19937_64 gen(102);
  std::uniform_int_distribution<std::size_t> dim(1, 32), kd(1, 256);
  std::uniform_real_distribution<double> phi(0.0, 4.0);
  const int s = 4;
  std::size_t products = 0, inexact = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = dim(gen), n = dim(gen), k = kd(gen);
    const double p = phi(gen);
    const Fp64Matrix a = gen_phi_matrix(m, k, p, {102, 2 * std::uint64_t(t)});
    const Fp64Matrix bt = gen_phi_matrix(n, k, p, {102, 2 * std::uint64_t(t) + 1});
    const FpSliceSet sa = split_fp(a, s, k), sb = split_fp(bt, s, k);
    for (int i = 0; i + 1 < s; ++i) {
      for (int j = 0; j + 1 < s; ++j) {
        const Fp64Matrix b = transpose(sb.slices[j]);
        const Fp64Matrix c = fp32_gemm(sa.slices[i], b);
        const DdMatrix ref = dd_gemm(sa.slices[i], b);
        for (std::size_t e = 0; e < c.size(); ++e) {
          if (ref.data()[e].lo != 0.0 || ref.data()[e].hi != c.data()[e]) ++inexact;
        }
        ++products;
      }
    }
  }
  return {inexact == 0, std::to_string(products) + " slice products, " + std::to_string(inexact) + " inexact entries"};
}

// ---------------------------------------------------------------------------
// 3. Reconstruction is lossless when offset + 53 <= s w, and the loss is zero exactly then.

Outcome reconstruction() {
  std::mt19937_64 gen(103);
  std::uniform_int_distribution<int> spread(0, 16), splits(1, 14), rows(1, 8), cols(1, 8), kexp(0, 20);
  const MmuSpec units[] = {mmu::int8_int32(), mmu::int4_int32(), mmu::fp16_fp32()};
  int lossless = 0, lossy = 0, violations = 0;
  for (int t = 0; t < 500; ++t) {
    const MmuSpec& unit = units[t % 3];
    const std::uint64_t k = std::uint64_t{1} << kexp(gen);
    if (slice_bits(unit, k) <= 0 || bits_per_slice(unit, k) > 7) {
      --t;
      continue;
    }
    const int s = splits(gen), sp = spread(gen);
    const int base = std::uniform_int_distribution<int>(-200, 200)(gen);
    std::uniform_int_distribution<int> ex(base - sp, base);
    Fp64Matrix m(rows(gen), cols(gen));
    for (double& v : m.values()) {
      // Full 53-bit significands: the last bit is set.
      const double sig = static_cast<double>((gen() >> 11) | (std::uint64_t{1} << 52) | 1);
      v = std::ldexp(sig, ex(gen) - 52) * ((gen() & 1) ? -1.0 : 1.0);
    }
    const SliceSet ss = split_int(m, s, unit, k);
    bool fits = true;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (ss.row_exp[i] - std::ilogb(m(i, j)) + 53 > s * ss.width) fits = false;
      }
    }
    const LossStats loss = mantissa_loss(m, s, unit, k);
    const bool zero_loss = loss.mean_bits == 0.0 && loss.max_bits == 0;
    if (zero_loss != fits) ++violations;
    if (fits) {
      ++lossless;
      if (reconstruct(ss) != m) ++violations;
    } else {
      ++lossy;
    }
  }
  return {violations == 0 && lossless > 0 && lossy > 0,
          "500 instances (" + std::to_string(lossless) + " within budget), " + std::to_string(violations) +
              " violations"};
}

// ---------------------------------------------------------------------------
// 4. Planner constants.

Outcome alpha_sanity() {
  const int alpha = slice_bits(mmu::fp16_fp32(), 4096);
  const auto calls = gemm_count(9);
  return {alpha == 6 && calls == 45,
          "slice_bits(FP16-FP32, 4096) = " + std::to_string(alpha) + ", gemm_count(9) = " + std::to_string(calls)};
}

// ---------------------------------------------------------------------------
// 5. Planner sweep vs the committed golden CSV and the INT8 < FP16 ordering.

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome planner_sweep() {
  std::ostringstream out, err;
  const int code = cli::run({"plan", "--mmu", "int8,fp16", "--k-min", "2^11", "--k-max", "2^20", "--target-bits", "70"},
                            out, err);
  const bool golden = code == 0 && out.str() == read_file(fs::path(OZIMM_GOLDEN_DIR) / "plan_int8_fp16.csv");

  const std::vector<MmuSpec> units{mmu::int8_int32(), mmu::fp16_fp32()};
  std::vector<std::uint64_t> ks;
  for (int e = 11; e <= 20; ++e) ks.push_back(std::uint64_t{1} << e);
  const auto rows = sweep(units, ks, 70);
  bool ordered = true;
  std::string at4096;
  for (std::uint64_t k : ks) {
    const PlanRow* i8 = nullptr;
    const PlanRow* f16 = nullptr;
    for (const auto& r : rows) {
      if (r.k != k) continue;
      (r.mmu == "INT8-INT32" ? i8 : f16) = &r;
    }
    if (!i8 || !f16 || !i8->feasible) {
      ordered = false;
      continue;
    }
    if (f16->feasible) {
      if (!(i8->bytes_per_element < f16->bytes_per_element) || i8->gemm_ops > f16->gemm_ops) ordered = false;
    }
    if (k == 4096) {
      if (!(i8->bytes_per_element <= 0.5 * f16->bytes_per_element)) ordered = false;
      at4096 = sci(i8->bytes_per_element) + " vs " + sci(f16->bytes_per_element) + " B/elem at k=2^12";
    }
  }
  return {golden && ordered, std::string(golden ? "golden CSV matches" : "golden CSV differs") + ", " +
                                 (ordered ? "INT8 < FP16 memory and ops" : "ordering violated") + ", " + at4096};
}

// ---------------------------------------------------------------------------
// 6. phi sweep at 512^3.

double mean_error(const Fp64Matrix& c, const DdMatrix& ref) { return relative_error_stats(c, ref).mean; }

Outcome phi_sweep() {
  const std::size_t n = 512;
  double fp01 = 0, s9_01 = 0, fp4 = 0, s9_4 = 0, s13_4 = 0;
  for (double phi : {0.1, 4.0}) {
    const Fp64Matrix a = gen_phi_matrix(n, n, phi, {1, 0});
    const Fp64Matrix b = gen_phi_matrix(n, n, phi, {1, 1});
    const DdMatrix ref = dd_gemm(a, b);
    const double fp = mean_error(plain_dgemm(a, b), ref);
    const double e9 = mean_error(oz_dgemm(a, b, OzConfig::fixed(9)).first, ref);
    if (phi < 1.0) {
      fp01 = fp;
      s9_01 = e9;
    } else {
      fp4 = fp;
      s9_4 = e9;
      s13_4 = mean_error(oz_dgemm(a, b, OzConfig::fixed(13)).first, ref);
    }
  }
  const bool a = s9_01 < fp01, b = s9_4 > fp4, c = s13_4 <= 1.5 * fp4;
  return {a && b && c, std::string("(a) ") + (a ? "ok" : "no") + " phi=0.1 s=9 " + sci(s9_01) + " < fp64 " + sci(fp01) +
                           "; (b) " + (b ? "ok" : "no") + " phi=4 s=9 " + sci(s9_4) + " > fp64 " + sci(fp4) + "; (c) " +
                           (c ? "ok" : "no") + " phi=4 s=13 " + sci(s13_4) + " <= 1.5 x fp64"};
}

// ---------------------------------------------------------------------------
// 7. A * inv(A) at n = 512.

Outcome inverse_pair() {
  const InversePair p = gen_inverse_pair(512, {1, 0});
  const DdMatrix ref = dd_gemm(p.a, p.a_dag);
  const double fp = mean_error(plain_dgemm(p.a, p.a_dag), ref);
  const double s11 = mean_error(oz_dgemm(p.a, p.a_dag, OzConfig::fixed(11)).first, ref);
  return {s11 < fp, "s=11 " + sci(s11) + " < fp64 " + sci(fp)};
}

// ---------------------------------------------------------------------------
// 8. Brickwork simulation N=16, d=4, L=8.

Outcome quantum_simulation() {
  const CircuitSpec spec{16, 4, 8, 1};
  auto dd = gemm_backend(BackendSpec::parse("dd"));
  auto fp64 = gemm_backend(BackendSpec::parse("fp64"));
  auto auto0 = gemm_backend(BackendSpec::parse("auto:0"));
  auto auto1 = gemm_backend(BackendSpec::parse("auto:1"));
  const auto [sd, rd] = run_brickwork(spec, *dd);
  const auto [sf, rf] = run_brickwork(spec, *fp64);
  const auto [s0, r0] = run_brickwork(spec, *auto0);
  const auto [s1, r1] = run_brickwork(spec, *auto1);
  const double ef = amplitude_error(rf.amp0, rd.amp0);
  const double e0 = amplitude_error(r0.amp0, rd.amp0);
  bool fewer = false;
  for (std::size_t g = 0; g < r0.gates.size() && g < r1.gates.size(); ++g) {
    if (r1.gates[g].splits < r0.gates[g].splits) fewer = true;
  }
  const bool acc = e0 <= 2.0 * ef, mem = r1.peak_slice_bytes < r0.peak_slice_bytes;
  return {acc && mem && fewer, "auto:0 amp0 error " + sci(e0) + " vs fp64 " + sci(ef) + (acc ? " (ok)" : " (no)") +
                                   "; peak slice bytes T=1 " + sci(r1.peak_slice_bytes) + " vs T=0 " +
                                   sci(r0.peak_slice_bytes) + (mem ? " (ok)" : " (no)") + "; fewer splits on some gate: " +
                                   (fewer ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Every CLI command replayed from its manifest with 1 and 8 threads.

std::vector<std::string> csv_lines(const std::string& text, bool drop_timing) {
  std::vector<std::string> out;
  std::istringstream s(text);
  for (std::string line; std::getline(s, line);) {
    if (drop_timing) {
      // bench: size,method,splits,gemm_calls,seconds,effective_gflops,checksum
      std::vector<std::string> f;
      std::istringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      if (f.size() == 7) line = f[0] + "," + f[1] + "," + f[2] + "," + f[3] + "," + f[6];
    }
    out.push_back(line);
  }
  return out;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("ozimmu_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_matrix(dir / "a.ozmm", gen_phi_matrix(48, 40, 2.0, {9, 0}));
  write_matrix(dir / "b.ozmm", gen_phi_matrix(40, 36, 2.0, {9, 1}));

  struct Cmd {
    std::string name;
    std::vector<std::string> args;
    bool timing = false;
  };
  const std::vector<Cmd> cmds{
      {"plan", {"plan", "--mmu", "int4,int8,int12,fp16"}},
      {"accuracy", {"accuracy", "--m", "96", "--n", "80", "--k", "64", "--phi", "0.1,4", "--splits", "5,9,13"}},
      {"invpair", {"invpair", "--n", "96", "--splits", "7,11"}},
      {"qcsim", {"qcsim", "--qubits", "10", "--gate-qubits", "4", "--layers", "3", "--backend", "fp64,auto:0,auto:1"}},
      {"bench", {"bench", "--sizes", "64,96", "--splits", "5,9"}, true},
      {"gemm", {"gemm", "--a", (dir / "a.ozmm").string(), "--b", (dir / "b.ozmm").string(), "--backend", "auto:0"}},
  };
  std::string failed;
  for (const auto& c : cmds) {
    std::ostringstream out, err;
    std::vector<std::string> args = c.args;
    const std::string first = (dir / (c.name + ".csv")).string();
    args.insert(args.end(), {"--out", first, "--threads", "3"});
    bool ok = cli::run(args, out, err) == 0;
    const std::string manifest = first + ".manifest.json";
    std::vector<std::string> results;
    for (const char* threads : {"1", "8"}) {
      const std::string again = (dir / (c.name + "." + threads + ".csv")).string();
      ok = ok && cli::run({"replay", "--manifest", manifest, "--out", again, "--threads", threads}, out, err) == 0;
      results.push_back(again);
    }
    if (ok) {
      const auto ref = csv_lines(read_file(first), c.timing);
      for (const auto& r : results) ok = ok && csv_lines(read_file(r), c.timing) == ref;
    }
    if (!ok) failed += (failed.empty() ? "" : ",") + c.name;
  }
  fs::remove_all(dir);
  return {failed.empty(), failed.empty() ? "plan, accuracy, invpair, qcsim, bench, gemm identical at 1/3/8 threads "
                                           "(bench compared without timing columns)"
                                         : "differences in: " + failed};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exactness core", exactness_core},
      {"error-free slice products", error_free_slice_products},
      {"reconstruction", reconstruction},
      {"alpha sanity", alpha_sanity},
      {"planner sweep", planner_sweep},
      {"phi sweep 512^3", phi_sweep},
      {"inverse pair n=512", inverse_pair},
      {"quantum simulation N=16 d=4 L=8", quantum_simulation},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << "criterion " << (i + 1) << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << " (" << std::fixed << std::setprecision(1) << sec << " s)" << std::defaultfloat
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
