#include "spsg/io.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <stdexcept>

namespace spsg {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'P', 'S', 'G'};

template <class T>
void put_le(std::ostream& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) out.put(static_cast<char>((value >> (8 * b)) & 0xff));
}

template <class T>
T get_le(std::istream& in) {
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated SPSG matrix file");
    value |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return value;
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kMatrixFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(r, c)));
  if (!out) throw std::runtime_error("failed writing " + path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error(path + ": not an SPSG matrix file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kMatrixFormatVersion) throw std::runtime_error(path + ": unsupported SPSG version");
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  Matrix m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return m;
}

}  // namespace spsg
