#include "ozimmu/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace ozimmu {
namespace {

constexpr char kMagic[4] = {'O', 'Z', 'M', 'M'};

template <class U>
void put_le(std::vector<unsigned char>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <class U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

void write_payload(const std::filesystem::path& path, std::size_t rows, std::size_t cols, bool complex,
                   const double* values, std::size_t count) {
  std::vector<unsigned char> buf;
  buf.reserve(25 + 8 * count);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(buf, kOzmmVersion);
  put_le<std::uint64_t>(buf, rows);
  put_le<std::uint64_t>(buf, cols);
  buf.push_back(complex ? 1 : 0);
  for (std::size_t i = 0; i < count; ++i) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(values[i]));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Fp64Matrix& m) {
  write_payload(path, m.rows(), m.cols(), false, m.data(), m.size());
}

void write_matrix(const std::filesystem::path& path, const CpxMatrix& m) {
  // std::complex<double> is layout-compatible with double[2].
  write_payload(path, m.rows(), m.cols(), true, reinterpret_cast<const double*>(m.data()), 2 * m.size());
}

AnyMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  auto bad = [&](const std::string& why) { return Error(ErrorCode::Io, path.string() + ": " + why); };
  if (buf.size() < 25 || std::memcmp(buf.data(), kMagic, 4) != 0) throw bad("not an OZMM file");
  if (get_le<std::uint32_t>(buf.data() + 4) != kOzmmVersion) throw bad("unsupported OZMM version");
  const auto rows = get_le<std::uint64_t>(buf.data() + 8);
  const auto cols = get_le<std::uint64_t>(buf.data() + 16);
  const unsigned flag = buf[24];
  if (flag > 1) throw bad("unknown element flag");
  const std::uint64_t per = flag ? 2 : 1;
  if (cols != 0 && rows > (buf.size() - 25) / 8 / per / cols) throw bad("payload shorter than its shape");
  const std::uint64_t count = rows * cols * per;
  if (buf.size() != 25 + 8 * count) throw bad("payload size does not match its shape");
  std::vector<double> vals(count);
  for (std::uint64_t i = 0; i < count; ++i) vals[i] = std::bit_cast<double>(get_le<std::uint64_t>(buf.data() + 25 + 8 * i));
  if (!flag) return Fp64Matrix(rows, cols, std::move(vals));
  CpxMatrix m(rows, cols);
  for (std::uint64_t i = 0; i < rows * cols; ++i) m.data()[i] = {vals[2 * i], vals[2 * i + 1]};
  return m;
}

Fp64Matrix read_real_matrix(const std::filesystem::path& path) {
  auto any = read_matrix(path);
  if (auto* m = std::get_if<Fp64Matrix>(&any)) return std::move(*m);
  throw Error(ErrorCode::Io, path.string() + ": expected a real matrix");
}

CpxMatrix read_complex_matrix(const std::filesystem::path& path) {
  auto any = read_matrix(path);
  if (auto* m = std::get_if<CpxMatrix>(&any)) return std::move(*m);
  auto& r = std::get<Fp64Matrix>(any);
  return make_complex(r, Fp64Matrix(r.rows(), r.cols()));
}

}  // namespace ozimmu
