#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace anisograph {

struct Triplet {
  std::uint64_t row;
  std::uint64_t col;
  double value;
};

/// Square compressed-sparse-row matrix with strictly increasing column
/// indices in every row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::uint64_t> row_ptr{0};
  std::vector<std::uint64_t> cols;
  std::vector<double> values;

  /// Sorts triplets by (row, col); duplicates are summed.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
  static CsrMatrix identity(std::size_t n, double scale = 1.0);

  std::size_t nnz() const noexcept { return cols.size(); }
  std::size_t row_begin(std::size_t i) const { return row_ptr[i]; }
  std::size_t row_end(std::size_t i) const { return row_ptr[i + 1]; }
  /// Entry (i, j), zero if not stored.
  double at(std::size_t i, std::size_t j) const;
  /// Position of (i, j) in cols/values, or nnz() if absent.
  std::size_t find(std::size_t i, std::size_t j) const;

  /// y = A x, column by column. Throws ShapeError on a row-count mismatch.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  void multiply_into(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const;

  Eigen::MatrixXd to_dense() const;
  /// Exact (bitwise) symmetry check.
  bool is_symmetric() const;
  /// Structural validity: sizes agree, columns in range and strictly increasing.
  bool is_well_formed() const;
  double frobenius_norm() const;
};

}  // namespace anisograph
