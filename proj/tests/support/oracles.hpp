#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code they check.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "anisograph/graph.hpp"
#include "anisograph/network.hpp"
#include "anisograph/spectral.hpp"

namespace oracle {

/// exp(A) by a truncated power series with scaling and squaring.
Eigen::Matrix3d matrix_exp(const Eigen::Matrix3d& a, int terms = 40);

/// Principal matrix logarithm: repeated Denman-Beavers square roots until
/// ||X - I|| < 0.25, then `terms` terms of log(I + Y), then rescaling.
Eigen::Matrix3d matrix_log(const Eigen::Matrix3d& m, int terms = 60);

/// All-pairs K-NN with the same tie-group rule as the library, from an
/// explicit distance table.
std::vector<std::pair<std::uint64_t, std::uint64_t>> brute_force_knn(
    const std::vector<std::vector<double>>& dist, std::uint32_t k, double tie_tol);

/// Dense symmetric normalized Laplacian from a dense weight matrix.
Eigen::MatrixXd dense_laplacian(const Eigen::MatrixXd& w);

/// T_j(lambda) by the trigonometric / hyperbolic closed form.
double chebyshev_t(int j, double lambda);

/// sum_j Phi T_j(Lambda) Phi^T x Theta_j for a dense rescaled Laplacian.
Eigen::MatrixXd spectral_cheb(const Eigen::MatrixXd& l_rescaled, const Eigen::MatrixXd& x,
                              const std::vector<Eigen::MatrixXd>& theta);

/// Phi exp(-tau Lambda) Phi^T x for a dense Laplacian.
Eigen::MatrixXd spectral_heat(const Eigen::MatrixXd& l, const Eigen::MatrixXd& x, double tau);

/// Central differences of a scalar function of a flat parameter vector.
std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> at, double step = 1e-5);

double relative_error(const std::vector<double>& a, const std::vector<double>& b);
double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Random connected weighted graph: a ring plus `extra` random chords per
/// vertex, weights uniform in [0.1, 1].
anisograph::CsrMatrix random_graph(std::size_t n, std::size_t extra, std::uint64_t seed);

/// Number of connected components of a symmetric adjacency.
std::size_t components(const anisograph::CsrMatrix& adjacency);

/// Minimum distance of any ReLU input to 0 and of any max-pool / global-max
/// winner to its runner-up, over one forward pass through `model`.
double kink_margin(anisograph::Model model, const anisograph::Signal& x);

}  // namespace oracle
