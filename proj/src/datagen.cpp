#include "ozimmu/datagen.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>

#include "ozimmu/kernels.hpp"

namespace ozimmu {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(RngSeed s) : engine_(splitmix64(splitmix64(s.seed) + s.stream)) {}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, q;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double f = std::sqrt(-2.0 * std::log(q) / q);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Fp64Matrix gen_phi_matrix(std::size_t m, std::size_t n, double phi, RngSeed seed) {
  if (!std::isfinite(phi)) throw Error(ErrorCode::InvalidArgument, "phi must be finite");
  Rng rng(seed);
  Fp64Matrix out(m, n);
  for (double& v : out.values()) {
    const double u = rng.uniform() - 0.5;
    v = u * std::exp(phi * rng.normal());
  }
  return out;
}

LuSolution lu_solve(const Fp64Matrix& a, const Fp64Matrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "lu_solve: A must be square");
  if (b.rows() != n) throw Error(ErrorCode::DimensionMismatch, "lu_solve: B has the wrong row count");
  require_finite(a, "lu_solve A");
  require_finite(b, "lu_solve B");

  Fp64Matrix lu = a;
  Fp64Matrix x = b;
  const std::size_t nrhs = b.cols();
  // Row operations are applied to the right-hand sides as the factorization
  // proceeds, which leaves U X = L^-1 P B for the back substitution.
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
    }
    if (!(std::abs(lu(piv, c)) > kPivotTolerance)) {
      throw Error(ErrorCode::Singular, "lu_solve: matrix is singular to working precision");
    }
    if (piv != c) {
      std::swap_ranges(lu.row(c).begin(), lu.row(c).end(), lu.row(piv).begin());
      std::swap_ranges(x.row(c).begin(), x.row(c).end(), x.row(piv).begin());
    }
    const double p = lu(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = lu(r, c) / p;
      if (f == 0.0) continue;
      lu(r, c) = f;
      for (std::size_t j = c + 1; j < n; ++j) lu(r, j) -= f * lu(c, j);
      for (std::size_t j = 0; j < nrhs; ++j) x(r, j) -= f * x(c, j);
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t j = 0; j < nrhs; ++j) x(c, j) /= lu(c, c);
    for (std::size_t r = 0; r < c; ++r) {
      const double f = lu(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < nrhs; ++j) x(r, j) -= f * x(c, j);
    }
  }

  LuSolution sol{std::move(x), 0.0};
  const Fp64Matrix ax = plain_dgemm(a, sol.x);
  for (std::size_t i = 0; i < ax.size(); ++i) {
    sol.residual = std::max(sol.residual, std::abs(ax.data()[i] - b.data()[i]));
  }
  return sol;
}

InversePair gen_inverse_pair(std::size_t n, RngSeed seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "gen_inverse_pair: n must be >= 1");
  InversePair pair;
  for (RngSeed s = seed;; ++s.stream) {
    Rng rng(s);
    Fp64Matrix a(n, n);
    for (double& v : a.values()) v = rng.normal();
    try {
      LuSolution sol = lu_solve(a, identity<double>(n));
      pair.a = std::move(a);
      pair.a_dag = std::move(sol.x);
      pair.residual = sol.residual;
      pair.stream = s.stream;
      return pair;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      ++pair.regenerated;
    }
  }
}

CpxMatrix haar_unitary(std::size_t dim, RngSeed seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "haar_unitary: dim must be >= 1");
  Rng rng(seed);
  const double scale = std::sqrt(0.5);
  Eigen::MatrixXcd z(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = {re * scale, im * scale};
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (std::size_t j = 0; j < dim; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  CpxMatrix u(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) u(i, j) = q(i, j);
  }
  return u;
}

}  // namespace ozimmu
