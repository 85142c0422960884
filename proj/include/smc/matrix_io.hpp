#pragma once

#include <filesystem>
#include <iosfwd>

#include "smc/linalg.hpp"

namespace smc {

// Dense text format: first line "rows cols", then one line per row of
// space-separated decimals. Values are written with 17 significant digits so a
// write/read cycle is exact.
void write_dense(std::ostream& out, const DenseMatrix& x);
DenseMatrix read_dense(std::istream& in);
void write_dense(const std::filesystem::path& path, const DenseMatrix& x);
DenseMatrix read_dense(const std::filesystem::path& path);

// Sparse triplet CSV: one "i,j,value" line per nonzero entry, 0-indexed, no
// header. The shape is not stored and must be supplied when reading.
void write_triplets(std::ostream& out, const DenseMatrix& x);
DenseMatrix read_triplets(std::istream& in, Eigen::Index rows, Eigen::Index cols);
void write_triplets(const std::filesystem::path& path, const DenseMatrix& x);
DenseMatrix read_triplets(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

}  // namespace smc
