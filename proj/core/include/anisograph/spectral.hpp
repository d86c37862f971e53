#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anisograph/graph.hpp"

namespace anisograph {

/// |V| x d vertex features, one column per channel.
using Signal = Eigen::MatrixXd;

/// Chebyshev filter coefficients: R matrices Theta_j of shape d_in x d_out.
struct ChebCoeffs {
  std::vector<Eigen::MatrixXd> theta;

  ChebCoeffs() = default;
  ChebCoeffs(std::size_t order, std::size_t d_in, std::size_t d_out);
  explicit ChebCoeffs(std::vector<Eigen::MatrixXd> t) : theta(std::move(t)) {}

  std::size_t order() const noexcept { return theta.size(); }
  std::size_t d_in() const { return theta.empty() ? 0 : static_cast<std::size_t>(theta.front().rows()); }
  std::size_t d_out() const { return theta.empty() ? 0 : static_cast<std::size_t>(theta.front().cols()); }
  /// Throws ShapeError for R == 0, ragged shapes or non-finite entries.
  void validate() const;
};

/// Chebyshev basis z_0 = x, z_1 = L x, z_j = 2 L z_{j-1} - z_{j-2}, j < R.
/// `l` must be rescaled.
std::vector<Signal> cheb_basis(const Laplacian& l, const Signal& x, std::size_t order);

/// y = sum_j z_j Theta_j. If `basis` is non-null it receives z_0..z_{R-1}.
/// Throws StateError for an unrescaled Laplacian and ShapeError on
/// dimension mismatches.
Signal cheb_apply(const Laplacian& l, const Signal& x, const ChebCoeffs& theta,
                  std::vector<Signal>* basis = nullptr);

/// sum_j c_j T_j(L) x for scalar coefficients.
Signal cheb_polynomial_apply(const Laplacian& l, const Signal& x, std::span<const double> coeffs);

/// Coefficients c_0..c_order of the Chebyshev interpolant of f on [-1, 1]
/// (c_0 already halved), computed with Chebyshev-Gauss quadrature.
std::vector<double> chebyshev_coefficients(const std::function<double(double)>& f, std::size_t order);

/// exp(-tau L) x via a Chebyshev expansion of
/// t -> exp(-tau * lambda_max / 2 * (t + 1)) with `order` + 1 terms.
/// Uses `l.lambda_max` when set, otherwise the bound 2. Throws ArgumentError
/// for order < 1 or tau < 0.
Signal heat_diffuse(const Laplacian& l, const Signal& x, double tau, int order = 30);

struct EigenSystem {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< |V| x k, orthonormal columns

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
  bool full() const noexcept { return vectors.rows() == vectors.cols(); }
};

struct EigenOptions {
  /// Largest |V| solved densely; larger graphs use thick-restart Lanczos.
  std::size_t dense_cap = 5000;
  double tol = 1e-8;
  bool force_iterative = false;
  int max_restarts = 2000;
  std::uint64_t seed = 0x65696773ULL;
};

/// The k smallest eigenpairs, ascending, each vector's first non-negligible
/// entry made positive. Throws ArgumentError for k == 0 or k > |V|.
EigenSystem eigensystem(const Laplacian& l, std::size_t k, const EigenOptions& options = {});

/// Applies the sign convention in place.
void canonicalize_signs(Eigen::MatrixXd& vectors);

/// Phi^T f. Valid for partial systems (projection).
Eigen::MatrixXd gft(const EigenSystem& phi, const Signal& f);
/// Phi f_hat. Throws StateError unless the system is full.
Signal igft(const EigenSystem& phi, const Eigen::MatrixXd& coeffs);

/// perm[i] is the image of vertex i: (P x)[perm[i]] = x[i].
using Permutation = std::vector<std::uint64_t>;

bool is_permutation(const Permutation& p);
Permutation inverse_permutation(const Permutation& p);
/// (a then b): result[i] = b[a[i]].
Permutation compose_permutations(const Permutation& a, const Permutation& b);
Signal permute_rows(const Signal& x, const Permutation& p);

/// Quarter-turn rotation of a square SE2/R2 grid about its center, combined
/// with a roll of quarter_turns * n_orient / 2 orientation slots (wrapped
/// mod pi). Throws ArgumentError for non-square or non-planar grids, or odd
/// n_orient with an odd turn count on SE2.
Permutation rotation_permutation(const GridSpec& spec, int quarter_turns);

/// ||P^T L P - L||_F / ||L||_F, evaluated on the sparsity pattern.
double equivariance_error(const CsrMatrix& l, const Permutation& p);
double equivariance_error(const Laplacian& l, const Permutation& p);

/// Spread of a non-negative mass distribution inside one orientation slice,
/// measured along the slice's forward axis (cos theta_k, sin theta_k) and the
/// perpendicular axis. Negative values are clipped to zero.
struct SliceSpread {
  double mass = 0.0;
  double forward_variance = 0.0;
  double lateral_variance = 0.0;
  double ratio = 0.0;  ///< forward / lateral
};
SliceSpread slice_spread(const VertexSet& vertices, const Eigen::VectorXd& values,
                         std::size_t orient_index);

/// CLSG container: "CLSG", u32 version, u64 |V|, u32 d, row-major f64.
std::vector<std::uint8_t> serialize_signal(const Signal& s);
Signal deserialize_signal(std::span<const std::uint8_t> bytes);
void save_signal(const std::string& path, const Signal& s);
Signal load_signal(const std::string& path);

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);

/// One row per eigenpair: `k,lambda,v0,...,v{n-1}`.
std::string eigenmap_csv(const EigenSystem& phi);

}  // namespace anisograph
