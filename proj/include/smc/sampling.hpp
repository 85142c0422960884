#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "smc/linalg.hpp"
#include "smc/random.hpp"

namespace smc {

using IndexPair = std::pair<Eigen::Index, Eigen::Index>;

/// The set of observed entries of an m x n matrix. Immutable once built; the
/// row-major list of missing positions is computed at construction and defines
/// the ordering of every MissingVector taken against this mask.
class ObservationMask {
 public:
  ObservationMask() = default;
  /// Empty mask (nothing observed).
  ObservationMask(Eigen::Index rows, Eigen::Index cols);

  static ObservationMask full(Eigen::Index rows, Eigen::Index cols);
  /// Throws ParameterError on out-of-bounds or duplicate pairs.
  static ObservationMask from_pairs(Eigen::Index rows, Eigen::Index cols, const std::vector<IndexPair>& pairs);
  /// One flag per entry, row-major, nonzero meaning observed.
  static ObservationMask from_flags(Eigen::Index rows, Eigen::Index cols, std::vector<unsigned char> flags);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index observed_count() const { return rows_ * cols_ - static_cast<Eigen::Index>(missing_.size()); }
  Eigen::Index missing_count() const { return static_cast<Eigen::Index>(missing_.size()); }
  bool empty() const { return observed_count() == 0; }
  bool is_full() const { return missing_.empty(); }

  bool observed(Eigen::Index i, Eigen::Index j) const { return flags_[static_cast<std::size_t>(i * cols_ + j)] != 0; }
  /// Row-major linear indices of the missing entries.
  const std::vector<Eigen::Index>& missing_indices() const { return missing_; }
  std::vector<IndexPair> observed_pairs() const;
  ObservationMask complement() const;

  friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.flags_ == b.flags_;
  }

 private:
  void index_missing();

  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<unsigned char> flags_;
  std::vector<Eigen::Index> missing_;
};

/// z(X): the missing entries of X in row-major order, with their positions.
struct MissingVector {
  Vector values;
  std::vector<Eigen::Index> index_map;  // row-major linear indices

  Eigen::Index size() const { return values.size(); }
};

/// P_Omega: keep observed entries, zero the rest.
DenseMatrix project(const DenseMatrix& x, const ObservationMask& mask);
/// P_Omega^c: keep missing entries, zero the rest.
DenseMatrix project_complement(const DenseMatrix& x, const ObservationMask& mask);

MissingVector gather_missing(const DenseMatrix& x, const ObservationMask& mask);
/// Copy of x with the entries listed in z.index_map overwritten by z.values.
DenseMatrix scatter_missing(const MissingVector& z, const DenseMatrix& x);

enum class SamplingMode { Bernoulli, ExactCount };

/// Observe each entry with |m_ij| <= zero_tol with probability rate_zero and every
/// other entry with probability rate_nonzero. ExactCount instead picks
/// round(rate * class size) entries of each class uniformly without replacement.
ObservationMask structured_sample(const DenseMatrix& m, double rate_zero, double rate_nonzero, double zero_tol,
                                  Rng& rng, SamplingMode mode = SamplingMode::Bernoulli);

/// FR = r (m + n - r) / |Omega|.
double degrees_of_freedom_ratio(Eigen::Index m, Eigen::Index n, Eigen::Index r, Eigen::Index observed);

// Mask CSV: first line "rows,cols", then one "i,j" line per observed entry.
void write_mask(std::ostream& out, const ObservationMask& mask);
ObservationMask read_mask(std::istream& in);
void write_mask(const std::filesystem::path& path, const ObservationMask& mask);
ObservationMask read_mask(const std::filesystem::path& path);

}  // namespace smc
