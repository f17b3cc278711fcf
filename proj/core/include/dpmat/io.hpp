#pragma once

// Stream-row interchange: CSV (one row per line, comma-separated reals)
// and a binary format {magic "ROWS", d u32, then f64 little-endian per
// entry}. Readers throw InputError with a line/offset hint on malformed
// input; all rows in a file share one dimension.

#include <iosfwd>
#include <vector>

#include "dpmat/linalg.hpp"

namespace dpmat {

std::vector<Vector> read_rows_csv(std::istream& in);
std::vector<Vector> read_rows_bin(std::istream& in);

void write_rows_csv(std::ostream& out, const std::vector<Vector>& rows);
void write_rows_bin(std::ostream& out, const std::vector<Vector>& rows);

}  // namespace dpmat
