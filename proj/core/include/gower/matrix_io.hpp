#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gower/dissimilarity.hpp"

namespace gower {

/// Square CSV: header "id,<id_1>,...,<id_n>", then one row per unit. Unit
/// identifiers default to 1..n. Undefined entries are written as NA.
void write_square_csv(std::ostream& out, const DissimilarityMatrix& matrix,
                      const std::vector<std::string>& ids = {});

/// Condensed CSV: "i,j,d" per pair (1-based unit ids).
void write_condensed_csv(std::ostream& out, const DissimilarityMatrix& matrix);

/// Rectangular CSV with reference ids as header and query ids as row labels.
void write_rectangular_csv(std::ostream& out, const RectangularMatrix& matrix,
                           const std::vector<std::string>& row_ids = {},
                           const std::vector<std::string>& col_ids = {});

/// Fixed-width human-readable square layout.
void write_pretty(std::ostream& out, const DissimilarityMatrix& matrix, int precision = 4);

/// Binary dump: "GWDM", version byte, n (u64 LE), m (u64 LE), then m
/// condensed values as IEEE-754 binary64 little-endian. NaN marks
/// undefined pairs.
inline constexpr unsigned char kGwdmVersion = 1;
void write_gwdm(std::ostream& out, const DissimilarityMatrix& matrix);
DissimilarityMatrix read_gwdm(std::istream& in);

}  // namespace gower
