#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ozimmu/datagen.hpp"
#include "ozimmu/dd_gemm.hpp"
#include "ozimmu/ozgemm.hpp"
#include "ozimmu/parallel.hpp"

using namespace ozimmu;

namespace {

Fp64Matrix uniform_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Fp64Matrix m(r, c);
  for (double& v : m.values()) v = u(gen);
  return m;
}

double max_abs_diff(const Fp64Matrix& a, const Fp64Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

}  // namespace

TEST_CASE("oz_dgemm small examples", "[ozgemm]") {
  const Fp64Matrix a(1, 1, std::vector<double>{1.5}), b(1, 1, std::vector<double>{2.5});
  const auto [c, rep] = oz_dgemm(a, b, OzConfig::fixed(2));
  CHECK(c(0, 0) == 3.75);
  CHECK(rep.splits_used == 2);
  CHECK(rep.gemm_calls == 3);

  const CpxMatrix x(1, 1, std::vector<std::complex<double>>{{1.0, 2.0}});
  const CpxMatrix y(1, 1, std::vector<std::complex<double>>{{3.0, 4.0}});
  const auto [z, zrep] = oz_zgemm(x, y, OzConfig::fixed(2));
  CHECK(z(0, 0) == std::complex<double>(-5.0, 10.0));
  CHECK(zrep.real_products == 4);
  CHECK(zrep.gemm_calls == 3);
}

TEST_CASE("identity times B reproduces B bitwise", "[ozgemm]") {
  std::mt19937_64 gen(31);
  // Entries within a factor 2^8 of the column maximum fit 9 * 7 = 63 bits of mantissa space.
  Fp64Matrix b = uniform_matrix(24, 17, gen, 0.5, 1.0);
  std::uniform_int_distribution<int> ex(-8, 0);
  for (double& v : b.values()) v = std::ldexp(v, ex(gen)) * ((gen() & 1) ? -1.0 : 1.0);
  for (auto order : {AccumulationOrder::TailFirst, AccumulationOrder::Ascending}) {
    OzConfig cfg = OzConfig::fixed(9);
    cfg.order = order;
    CHECK(oz_dgemm(identity<double>(24), b, cfg).first == b);
  }
}

TEST_CASE("unitary times its adjoint", "[ozgemm]") {
  const CpxMatrix u = haar_unitary(16, {7, 0});
  const auto [p, rep] = oz_zgemm(u, conj_transpose(u), OzConfig::fixed(12));
  double off = 0.0, diag = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      if (i == j) diag = std::max(diag, std::abs(p(i, j) - 1.0));
      else off = std::max(off, std::abs(p(i, j)));
    }
  }
  CHECK(off < 1e-14);
  CHECK(diag < 1e-14);
  CHECK(rep.splits_used == 12);
}

TEST_CASE("AUTO split selection", "[ozgemm]") {
  std::mt19937_64 gen(32);
  // A shared exponent and full 53-bit significands need 1 + 53 <= 7 s bits.
  Fp64Matrix a(8, 8), b(8, 8);
  for (double& v : a.values()) v = std::ldexp(static_cast<double>((gen() >> 11) | (std::uint64_t{1} << 52) | 1), -53);
  for (double& v : b.values()) v = std::ldexp(static_cast<double>((gen() >> 11) | (std::uint64_t{1} << 52) | 1), -53);
  const auto pick = auto_splits(a, b, mmu::int8_int32(), 0.0);
  CHECK(pick.splits == 8);
  CHECK_FALSE(pick.capped);
  CHECK(pick.loss.mean_bits == 0.0);
  const auto [c, rep] = oz_dgemm(a, b, OzConfig::automatic(0.0));
  CHECK(rep.splits_used == 8);
  CHECK(relative_error_stats(c, dd_gemm(a, b)).max <= 0x1p-52);

  const Fp64Matrix zero(5, 5);
  const auto [z, zrep] = oz_dgemm(zero, zero, OzConfig::automatic(0.0));
  CHECK(zrep.splits_used == 1);
  CHECK(z == zero);

  // Entries spanning a wide exponent range need more slices than the cap allows.
  Fp64Matrix wide = a;
  wide(0, 0) = 1e30;
  OzConfig cfg = OzConfig::automatic(0.0);
  cfg.max_splits = 6;
  const auto [w, wrep] = oz_dgemm(wide, b, cfg);
  CHECK(wrep.auto_capped);
  CHECK(wrep.splits_used == 6);
  CHECK(wrep.loss.mean_bits > 0.0);
}

TEST_CASE("AUTO split count is non-increasing in the threshold", "[ozgemm][property]") {
  const Fp64Matrix a = gen_phi_matrix(32, 48, 2.0, {3, 0});
  const Fp64Matrix b = gen_phi_matrix(48, 24, 2.0, {3, 1});
  int prev = 1 << 20;
  for (double t : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 64.0}) {
    const int s = auto_splits(a, b, mmu::int8_int32(), t).splits;
    CHECK(s <= prev);
    prev = s;
  }
  CHECK(prev == 1);
}

TEST_CASE("oz_dgemm is equivariant under powers of two", "[ozgemm][property]") {
  std::mt19937_64 gen(33);
  const Fp64Matrix a = uniform_matrix(9, 20, gen), b = uniform_matrix(20, 11, gen);
  const Fp64Matrix base = oz_dgemm(a, b, OzConfig::fixed(7)).first;
  for (auto [p, q] : {std::pair{3, -5}, std::pair{-200, 100}, std::pair{400, 0}}) {
    Fp64Matrix as = a, bs = b;
    for (double& v : as.values()) v = std::ldexp(v, p);
    for (double& v : bs.values()) v = std::ldexp(v, q);
    Fp64Matrix want = base;
    for (double& v : want.values()) v = std::ldexp(v, p + q);
    CHECK(oz_dgemm(as, bs, OzConfig::fixed(7)).first == want);
  }
}

TEST_CASE("triangular pair set is as accurate as all pairs", "[ozgemm]") {
  const Fp64Matrix a = gen_phi_matrix(64, 64, 0.5, {4, 0});
  const Fp64Matrix b = gen_phi_matrix(64, 64, 0.5, {4, 1});
  OzConfig tri = OzConfig::fixed(12), all = OzConfig::fixed(12);
  all.all_pairs = true;
  const auto [ct, rt] = oz_dgemm(a, b, tri);
  const auto [ca, ra] = oz_dgemm(a, b, all);
  CHECK(rt.gemm_calls == 78);
  CHECK(ra.gemm_calls == 144);
  double scale = 0.0;
  for (double v : ca.values()) scale = std::max(scale, std::abs(v));
  CHECK(max_abs_diff(ct, ca) <= 0x1p-52 * scale);
}

TEST_CASE("accuracy against the double-double reference", "[ozgemm]") {
  const Fp64Matrix a = gen_phi_matrix(64, 96, 1.0, {5, 0});
  const Fp64Matrix b = gen_phi_matrix(96, 48, 1.0, {5, 1});
  const DdMatrix ref = dd_gemm(a, b);
  const double fp64 = relative_error_stats(plain_dgemm(a, b), ref).mean;
  double prev = 1.0;
  for (int s : {2, 4, 6, 8, 10, 12, 14}) {
    const double err = relative_error_stats(oz_dgemm(a, b, OzConfig::fixed(s)).first, ref).mean;
    INFO("s=" << s << " err=" << err);
    // Non-increasing until the binary64 rounding floor is reached.
    CHECK(err <= std::max(prev, 0x1p-53));
    prev = err;
  }
  CHECK(prev < fp64);
  for (auto order : {AccumulationOrder::TailFirst, AccumulationOrder::Ascending}) {
    OzConfig cfg = OzConfig::fixed(14);
    cfg.order = order;
    CHECK(relative_error_stats(oz_dgemm(a, b, cfg).first, ref).mean < 0x1p-52);
  }
}

TEST_CASE("floating path", "[ozgemm]") {
  const Fp64Matrix a = gen_phi_matrix(40, 64, 0.5, {6, 0});
  const Fp64Matrix b = gen_phi_matrix(64, 30, 0.5, {6, 1});
  const DdMatrix ref = dd_gemm(a, b);
  GemmReport rep;
  const Fp64Matrix c = oz_dgemm_fp(a, b, 6, &rep);
  CHECK(rep.gemm_calls == 21);
  CHECK(rep.slice_bytes == (40.0 * 64 + 30.0 * 64) * (5 * 4.0 + 8.0));
  CHECK(relative_error_stats(c, ref).mean < 0x1p-50);
  // With s = 1 the single slice is the whole matrix: plain binary64.
  CHECK(oz_dgemm_fp(a, b, 1) == plain_dgemm(a, b));
  CHECK(oz_dgemm(a, b, OzConfig::fixed(6, SplitPath::Floating)).first == c);
  OzConfig bad = OzConfig::automatic(0.0);
  bad.path = SplitPath::Floating;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("oz_dgemm does not depend on threads or kernel variant", "[ozgemm][threads][simd]") {
  const Fp64Matrix a = gen_phi_matrix(70, 50, 1.0, {8, 0});
  const Fp64Matrix b = gen_phi_matrix(50, 45, 1.0, {8, 1});
  set_num_threads(1);
  const Fp64Matrix one = oz_dgemm(a, b, OzConfig::fixed(9)).first;
  set_num_threads(6);
  const Fp64Matrix many = oz_dgemm(a, b, OzConfig::fixed(9)).first;
  set_num_threads(0);
  CHECK(one == many);
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (!isa_supported(isa)) continue;
    OzConfig cfg = OzConfig::fixed(9);
    cfg.kernel = {isa, 0};
    CHECK(oz_dgemm(a, b, cfg).first == one);
    cfg.kernel = {Isa::Scalar, 16};
    CHECK(oz_dgemm(a, b, cfg).first == one);
  }
}

TEST_CASE("reports", "[ozgemm]") {
  const Fp64Matrix a(10, 20), b(20, 30);
  const auto [c, rep] = oz_dgemm(a, b, OzConfig::fixed(9));
  CHECK(rep.m == 10);
  CHECK(rep.n == 30);
  CHECK(rep.k == 20);
  CHECK(rep.gemm_calls == 45);
  CHECK(rep.real_products == 1);
  CHECK(rep.slice_bytes == 9.0 * (200 + 600));

  const CpxMatrix x(10, 20), y(20, 30);
  const auto [z, zrep] = oz_zgemm(x, y, OzConfig::fixed(9));
  CHECK(zrep.gemm_calls == 45);
  CHECK(zrep.real_products == 4);
  CHECK(zrep.slice_bytes == 2 * 9.0 * (200 + 600));

  const Fp64Matrix empty_k_a(3, 0), empty_k_b(0, 4);
  CHECK(oz_dgemm(empty_k_a, empty_k_b, OzConfig::fixed(3)).first == Fp64Matrix(3, 4));
}

TEST_CASE("argument errors", "[ozgemm]") {
  const Fp64Matrix a(2, 3), b(2, 3);
  try {
    oz_dgemm(a, b, OzConfig::fixed(3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  Fp64Matrix nan(3, 3);
  nan(1, 1) = std::nan("");
  try {
    oz_dgemm(nan, nan, OzConfig::fixed(3));
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  CHECK_THROWS_AS(oz_dgemm(Fp64Matrix(2, 2), Fp64Matrix(2, 2), OzConfig::fixed(0)), Error);
  CHECK_THROWS_AS(OzConfig::automatic(-1.0).validate(), Error);
  CHECK_THROWS_AS(oz_dgemm_fp(Fp64Matrix(2, 2), Fp64Matrix(2, 2), 0), Error);
}

TEST_CASE("backend specs", "[ozgemm]") {
  CHECK(BackendSpec::parse("fp64").kind == BackendKind::Fp64);
  CHECK(BackendSpec::parse("dd").kind == BackendKind::DoubleDouble);
  CHECK(BackendSpec::parse("ozaki:9").splits == 9);
  CHECK(BackendSpec::parse("ozfp:5").kind == BackendKind::OzakiFloat);
  CHECK(BackendSpec::parse("auto:0.5").threshold == 0.5);
  CHECK(BackendSpec::parse("auto:1").label() == "auto:1");
  CHECK(BackendSpec::parse("auto:0.25").label() == "auto:0.25");
  CHECK(BackendSpec::parse("ozaki:12").label() == "ozaki:12");
  for (const char* bad : {"", "ozaki", "ozaki:0", "ozaki:x", "auto:-1", "auto:1x", "blas"}) {
    CHECK_THROWS_AS(BackendSpec::parse(bad), Error);
  }
  CHECK(parse_order("tail-first") == AccumulationOrder::TailFirst);
  CHECK(parse_order("ascending") == AccumulationOrder::Ascending);
  CHECK(order_name(AccumulationOrder::Ascending) == "ascending");
  CHECK_THROWS_AS(parse_order("random"), Error);
}

TEST_CASE("backends compute the advertised products", "[ozgemm]") {
  const Fp64Matrix a = gen_phi_matrix(12, 16, 1.0, {9, 0});
  const Fp64Matrix b = gen_phi_matrix(16, 10, 1.0, {9, 1});
  CHECK(gemm_backend(BackendSpec::parse("fp64"))->dgemm(a, b) == plain_dgemm(a, b));
  CHECK(gemm_backend(BackendSpec::parse("dd"))->dgemm(a, b) == round_to_fp64(dd_gemm(a, b)));
  CHECK(gemm_backend(BackendSpec::parse("ozaki:8"))->dgemm(a, b) == oz_dgemm(a, b, OzConfig::fixed(8)).first);
  GemmReport rep;
  auto autob = gemm_backend(BackendSpec::parse("auto:0"));
  CHECK(autob->label() == "auto:0");
  CHECK(autob->dgemm(a, b, &rep) == oz_dgemm(a, b, OzConfig::automatic(0.0)).first);
  CHECK(rep.splits_used >= 1);

  const CpxMatrix x = make_complex(a, a), y = make_complex(b, b);
  CHECK(gemm_backend(BackendSpec::parse("fp64"))->zgemm(x, y) == plain_zgemm(x, y));
  CHECK(gemm_backend(BackendSpec::parse("dd"))->zgemm(x, y) == round_to_fp64(dd_zgemm(x, y)));
  CHECK(gemm_backend(BackendSpec::parse("ozaki:8"))->zgemm(x, y) == oz_zgemm(x, y, OzConfig::fixed(8)).first);

  BackendSpec asc = BackendSpec::parse("ozaki:8");
  asc.order = AccumulationOrder::Ascending;
  OzConfig cfg = OzConfig::fixed(8);
  cfg.order = AccumulationOrder::Ascending;
  CHECK(gemm_backend(asc)->dgemm(a, b) == oz_dgemm(a, b, cfg).first);
  CHECK(gemm_backend(cfg)->label() == "ozaki:8");
}
