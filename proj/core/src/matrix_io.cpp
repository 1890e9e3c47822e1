#include "gower/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>

#include "gower/error.hpp"

namespace gower {
namespace {

std::string number(double v) {
  if (!is_defined(v)) return "NA";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string id_at(const std::vector<std::string>& ids, std::size_t i) {
  return ids.empty() ? std::to_string(i + 1) : ids.at(i);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffU);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw Error("GWDM: truncated input");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
  return v;
}

}  // namespace

void write_square_csv(std::ostream& out, const DissimilarityMatrix& matrix,
                      const std::vector<std::string>& ids) {
  const std::size_t n = matrix.units();
  if (!ids.empty() && ids.size() != n) throw Error("unit id count does not match matrix");
  out << "id";
  for (std::size_t j = 0; j < n; ++j) out << ',' << id_at(ids, j);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << id_at(ids, i);
    for (std::size_t j = 0; j < n; ++j) out << ',' << number(matrix(i, j));
    out << '\n';
  }
}

void write_condensed_csv(std::ostream& out, const DissimilarityMatrix& matrix) {
  out << "i,j,d\n";
  const std::size_t n = matrix.units();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      out << i + 1 << ',' << j + 1 << ',' << number(matrix(i, j)) << '\n';
}

void write_rectangular_csv(std::ostream& out, const RectangularMatrix& matrix,
                           const std::vector<std::string>& row_ids,
                           const std::vector<std::string>& col_ids) {
  out << "id";
  for (std::size_t c = 0; c < matrix.cols(); ++c) out << ',' << id_at(col_ids, c);
  out << '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << id_at(row_ids, r);
    for (std::size_t c = 0; c < matrix.cols(); ++c) out << ',' << number(matrix(r, c));
    out << '\n';
  }
}

void write_pretty(std::ostream& out, const DissimilarityMatrix& matrix, int precision) {
  const std::size_t n = matrix.units();
  const int width = precision + 4;
  out << std::setw(6) << "";
  for (std::size_t j = 0; j < n; ++j) out << std::setw(width) << j + 1;
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << std::setw(6) << i + 1;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = matrix(i, j);
      if (is_defined(v))
        out << std::setw(width) << std::fixed << std::setprecision(precision) << v;
      else
        out << std::setw(width) << "NA";
    }
    out << '\n';
  }
}

void write_gwdm(std::ostream& out, const DissimilarityMatrix& matrix) {
  out.write("GWDM", 4);
  out.put(static_cast<char>(kGwdmVersion));
  put_u64(out, matrix.units());
  put_u64(out, matrix.pairs());
  for (double v : matrix.condensed()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("GWDM: write failed");
}

DissimilarityMatrix read_gwdm(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "GWDM")
    throw Error("GWDM: bad magic bytes");
  const int version = in.get();
  if (version != kGwdmVersion) throw Error("GWDM: unsupported version " + std::to_string(version));
  const auto n = get_u64(in);
  const auto m = get_u64(in);
  if (m != PairIndex::count(n)) throw Error("GWDM: pair count does not match unit count");
  std::vector<double> values(m);
  for (auto& v : values) v = std::bit_cast<double>(get_u64(in));
  return DissimilarityMatrix(n, std::move(values));
}

}  // namespace gower
