#include "anisograph/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "anisograph/error.hpp"

namespace anisograph {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.cols.reserve(triplets.size());
  m.values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= n || t.col >= n) throw ShapeError("csr: triplet index out of range");
    if (!m.cols.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      m.values.back() += t.value;
      continue;
    }
    m.cols.push_back(t.col);
    m.values.push_back(t.value);
    ++m.row_ptr[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n, double scale) {
  CsrMatrix m;
  m.n = n;
  m.row_ptr.resize(n + 1);
  m.cols.resize(n);
  m.values.assign(n, scale);
  for (std::size_t i = 0; i <= n; ++i) m.row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.cols[i] = i;
  return m;
}

std::size_t CsrMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return nnz();
  return static_cast<std::size_t>(it - cols.begin());
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto k = find(i, j);
  return k == nnz() ? 0.0 : values[k];
}

Eigen::MatrixXd CsrMatrix::multiply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y(x.rows(), x.cols());
  multiply_into(x, y);
  return y;
}

void CsrMatrix::multiply_into(const Eigen::MatrixXd& x, Eigen::MatrixXd& y) const {
  if (static_cast<std::size_t>(x.rows()) != n) {
    throw ShapeError("csr: signal has " + std::to_string(x.rows()) + " rows, matrix is " +
                     std::to_string(n) + "x" + std::to_string(n));
  }
  y.resize(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double* xc = x.col(c).data();
    double* yc = y.col(c).data();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += values[k] * xc[cols[k]];
      yc[i] = acc;
    }
  }
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = values[k];
    }
  }
  return d;
}

bool CsrMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n; ++i) {
    for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const auto t = find(cols[k], i);
      if (t == nnz() || values[t] != values[k]) return false;
    }
  }
  return true;
}

bool CsrMatrix::is_well_formed() const {
  if (row_ptr.size() != n + 1 || row_ptr.front() != 0 || row_ptr.back() != cols.size() ||
      cols.size() != values.size()) {
    return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (row_ptr[i] > row_ptr[i + 1]) return false;
    for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (cols[k] >= n) return false;
      if (k > row_ptr[i] && cols[k] <= cols[k - 1]) return false;
    }
  }
  return true;
}

double CsrMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

}  // namespace anisograph
