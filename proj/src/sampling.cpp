#include "smc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "smc/error.hpp"

namespace smc {

namespace {

void require_same_shape(const DenseMatrix& x, const ObservationMask& mask, const char* what) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw ParameterError(std::string(what) + ": matrix and mask dimensions differ");
}

// Partial Fisher-Yates: marks `take` distinct members of `pool` as observed.
void pick_without_replacement(std::vector<Eigen::Index>& pool, std::size_t take, Rng& rng,
                              std::vector<unsigned char>& flags) {
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t remaining = pool.size() - k;
    const std::size_t pick = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(remaining));
    std::swap(pool[k], pool[std::min(pick, pool.size() - 1)]);
    flags[static_cast<std::size_t>(pool[k])] = 1;
  }
}

}  // namespace

ObservationMask::ObservationMask(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), flags_(static_cast<std::size_t>(rows * cols), 0) {
  require(rows >= 0 && cols >= 0, "ObservationMask: negative shape");
  index_missing();
}

ObservationMask ObservationMask::full(Eigen::Index rows, Eigen::Index cols) {
  return from_flags(rows, cols, std::vector<unsigned char>(static_cast<std::size_t>(rows * cols), 1));
}

ObservationMask ObservationMask::from_pairs(Eigen::Index rows, Eigen::Index cols,
                                            const std::vector<IndexPair>& pairs) {
  require(rows >= 0 && cols >= 0, "ObservationMask: negative shape");
  std::vector<unsigned char> flags(static_cast<std::size_t>(rows * cols), 0);
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= rows || j >= cols) throw ParameterError("ObservationMask: index out of bounds");
    auto& flag = flags[static_cast<std::size_t>(i * cols + j)];
    if (flag) throw ParameterError("ObservationMask: duplicate index pair");
    flag = 1;
  }
  return from_flags(rows, cols, std::move(flags));
}

ObservationMask ObservationMask::from_flags(Eigen::Index rows, Eigen::Index cols, std::vector<unsigned char> flags) {
  require(rows >= 0 && cols >= 0, "ObservationMask: negative shape");
  require(flags.size() == static_cast<std::size_t>(rows * cols), "ObservationMask: flag count mismatch");
  ObservationMask mask;
  mask.rows_ = rows;
  mask.cols_ = cols;
  mask.flags_ = std::move(flags);
  for (auto& f : mask.flags_) f = f ? 1 : 0;
  mask.index_missing();
  return mask;
}

void ObservationMask::index_missing() {
  missing_.clear();
  for (std::size_t k = 0; k < flags_.size(); ++k)
    if (!flags_[k]) missing_.push_back(static_cast<Eigen::Index>(k));
}

std::vector<IndexPair> ObservationMask::observed_pairs() const {
  std::vector<IndexPair> pairs;
  pairs.reserve(static_cast<std::size_t>(observed_count()));
  for (Eigen::Index i = 0; i < rows_; ++i)
    for (Eigen::Index j = 0; j < cols_; ++j)
      if (observed(i, j)) pairs.emplace_back(i, j);
  return pairs;
}

ObservationMask ObservationMask::complement() const {
  std::vector<unsigned char> flipped(flags_.size());
  std::transform(flags_.begin(), flags_.end(), flipped.begin(), [](unsigned char f) { return f ? 0 : 1; });
  return from_flags(rows_, cols_, std::move(flipped));
}

DenseMatrix project(const DenseMatrix& x, const ObservationMask& mask) {
  require_same_shape(x, mask, "project");
  DenseMatrix out = x;
  for (Eigen::Index k : mask.missing_indices()) out.data()[k] = 0.0;
  return out;
}

DenseMatrix project_complement(const DenseMatrix& x, const ObservationMask& mask) {
  require_same_shape(x, mask, "project_complement");
  DenseMatrix out = DenseMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index k : mask.missing_indices()) out.data()[k] = x.data()[k];
  return out;
}

MissingVector gather_missing(const DenseMatrix& x, const ObservationMask& mask) {
  require_same_shape(x, mask, "gather_missing");
  MissingVector z;
  z.index_map = mask.missing_indices();
  z.values.resize(static_cast<Eigen::Index>(z.index_map.size()));
  for (std::size_t k = 0; k < z.index_map.size(); ++k) z.values(static_cast<Eigen::Index>(k)) = x.data()[z.index_map[k]];
  return z;
}

DenseMatrix scatter_missing(const MissingVector& z, const DenseMatrix& x) {
  if (static_cast<std::size_t>(z.values.size()) != z.index_map.size())
    throw ParameterError("scatter_missing: values and index map lengths differ");
  DenseMatrix out = x;
  for (std::size_t k = 0; k < z.index_map.size(); ++k) {
    const Eigen::Index idx = z.index_map[k];
    if (idx < 0 || idx >= out.size()) throw ParameterError("scatter_missing: index outside matrix");
    out.data()[idx] = z.values(static_cast<Eigen::Index>(k));
  }
  return out;
}

ObservationMask structured_sample(const DenseMatrix& m, double rate_zero, double rate_nonzero, double zero_tol,
                                  Rng& rng, SamplingMode mode) {
  require(rate_zero >= 0.0 && rate_zero <= 1.0, "structured_sample: rate_zero outside [0, 1]");
  require(rate_nonzero >= 0.0 && rate_nonzero <= 1.0, "structured_sample: rate_nonzero outside [0, 1]");
  require(zero_tol >= 0.0, "structured_sample: zero_tol must be nonnegative");
  std::vector<unsigned char> flags(static_cast<std::size_t>(m.size()), 0);

  if (mode == SamplingMode::Bernoulli) {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const double rate = std::abs(m.data()[k]) <= zero_tol ? rate_zero : rate_nonzero;
      // A draw is consumed for every entry so masks at different rates share a stream.
      const double u = rng.uniform();
      flags[static_cast<std::size_t>(k)] = u < rate ? 1 : 0;
    }
  } else {
    std::vector<Eigen::Index> zeros, nonzeros;
    for (Eigen::Index k = 0; k < m.size(); ++k) (std::abs(m.data()[k]) <= zero_tol ? zeros : nonzeros).push_back(k);
    auto count = [](double rate, std::size_t n) {
      return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));
    };
    pick_without_replacement(zeros, count(rate_zero, zeros.size()), rng, flags);
    pick_without_replacement(nonzeros, count(rate_nonzero, nonzeros.size()), rng, flags);
  }
  return ObservationMask::from_flags(m.rows(), m.cols(), std::move(flags));
}

double degrees_of_freedom_ratio(Eigen::Index m, Eigen::Index n, Eigen::Index r, Eigen::Index observed) {
  require(observed >= 1, "degrees_of_freedom_ratio: no observed entries");
  require(r >= 0 && r <= std::min(m, n), "degrees_of_freedom_ratio: rank outside [0, min(m, n)]");
  return static_cast<double>(r * (m + n - r)) / static_cast<double>(observed);
}

void write_mask(std::ostream& out, const ObservationMask& mask) {
  out << mask.rows() << ',' << mask.cols() << '\n';
  for (const auto& [i, j] : mask.observed_pairs()) out << i << ',' << j << '\n';
  if (!out) throw IoError("mask write failed");
}

ObservationMask read_mask(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("mask: missing header");
  long long rows = -1, cols = -1;
  char comma = 0;
  std::istringstream header(line);
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0)
    throw ParameterError("mask: header must be 'rows,cols'");
  std::vector<IndexPair> pairs;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    long long i = -1, j = -1;
    if (!(row >> i >> comma >> j) || comma != ',') throw ParameterError("mask: expected 'i,j' line");
    pairs.emplace_back(i, j);
  }
  return ObservationMask::from_pairs(rows, cols, pairs);
}

void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_mask(out, mask);
}

ObservationMask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return read_mask(in);
}

}  // namespace smc
