#pragma once

#include <cstdint>
#include <string>

#include "spsg/types.hpp"

namespace spsg {

/// Flat binary matrix container: "SPSG", u32 version, u32 rows, u32 cols,
/// then rows*cols little-endian IEEE-754 doubles in row-major order.
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);

}  // namespace spsg
