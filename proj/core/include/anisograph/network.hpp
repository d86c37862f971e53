#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "anisograph/rng.hpp"
#include "anisograph/sampling.hpp"
#include "anisograph/spectral.hpp"

namespace anisograph {

/// Chebyshev convolution y = sum_j z_j Theta_j + 1 b^T on a rescaled Laplacian.
class ChebLayer {
 public:
  ChebLayer() = default;
  ChebLayer(std::shared_ptr<const Laplacian> lap, ChebCoeffs theta, Eigen::RowVectorXd bias);
  /// Uniform init in +-sqrt(6 / (R d_in + d_out)), zero bias.
  static ChebLayer random(std::shared_ptr<const Laplacian> lap, std::size_t order, std::size_t d_in,
                          std::size_t d_out, CounterRng& rng);

  Signal forward(const Signal& x);
  /// Returns dL/dx and accumulates dL/dTheta, dL/db. Throws StateError if no
  /// forward pass is cached.
  Signal backward(const Signal& dy);

  const Laplacian& laplacian() const;
  void set_laplacian(std::shared_ptr<const Laplacian> lap);

  ChebCoeffs theta;
  Eigen::RowVectorXd bias;
  ChebCoeffs grad_theta;
  Eigen::RowVectorXd grad_bias;

 private:
  std::shared_ptr<const Laplacian> lap_;
  std::vector<Signal> z_;
};

class ReluLayer {
 public:
  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);

 private:
  Signal x_;
};

enum class PoolMode : std::uint8_t { R2Rand = 0, R2Max = 1, S2Max = 2, S2Avg = 3 };

const char* to_string(PoolMode m) noexcept;

/// Fine-to-coarse cluster assignment.
struct PoolPlan {
  PoolMode mode = PoolMode::R2Max;
  std::size_t fine_size = 0;
  std::size_t coarse_size = 0;
  std::vector<std::uint64_t> cluster;               ///< fine id -> coarse id
  std::vector<std::vector<std::uint64_t>> members;  ///< coarse id -> ascending fine ids
  std::vector<std::uint64_t> selected;              ///< Rand mode: chosen member per cluster
  std::uint64_t seed = 0;
  /// Set when odd grid dimensions folded a trailing row/column into the last
  /// block of each axis.
  bool merged_trailing = false;

  bool is_random() const noexcept { return mode == PoolMode::R2Rand; }
  /// Redraws the selected members (Rand mode only; no-op otherwise).
  void reseed(std::uint64_t s);
  /// Rebuilds `members` and `selected` from `cluster`. Throws ArgumentError if
  /// a coarse vertex is empty or an id is out of range.
  void finalize();
};

/// Non-overlapping 2x2 spatial blocks on a planar grid, replicated per
/// orientation slice. Returns the plan and the coarse grid spec.
PoolPlan r2_pool_plan(const GridSpec& fine, PoolMode mode, std::uint64_t seed = 0);
GridSpec r2_coarse_spec(const GridSpec& fine);

/// Icosahedral level -> level - 1: every parent vertex keeps its id and each
/// midpoint joins one of its two parents (the one with fewer children so far,
/// lower id on ties). Replicated per orientation slice for SO3 grids.
PoolPlan s2_pool_plan(const GridSpec& fine, PoolMode mode, std::uint64_t seed = 0);
GridSpec s2_coarse_spec(const GridSpec& fine);

/// Max: per-cluster per-channel maximum (lowest id on ties). Avg: mean.
/// Rand: value of the selected member.
Signal pool_forward(const PoolPlan& plan, const Signal& x, std::vector<std::uint64_t>* argmax = nullptr);
Signal pool_backward(const PoolPlan& plan, const Signal& dy, std::span<const std::uint64_t> argmax);

/// Rand: value placed at the selected member, zeros elsewhere. Other modes:
/// value replicated to every member.
Signal unpool_forward(const PoolPlan& plan, const Signal& x);
Signal unpool_backward(const PoolPlan& plan, const Signal& dy);

class PoolLayer {
 public:
  PoolLayer() = default;
  explicit PoolLayer(std::shared_ptr<PoolPlan> plan) : plan_(std::move(plan)) {}
  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);
  const PoolPlan& plan() const { return *plan_; }
  PoolPlan& plan() { return *plan_; }

 private:
  std::shared_ptr<PoolPlan> plan_;
  std::vector<std::uint64_t> argmax_;
  bool cached_ = false;
};

class UnpoolLayer {
 public:
  UnpoolLayer() = default;
  explicit UnpoolLayer(std::shared_ptr<PoolPlan> plan) : plan_(std::move(plan)) {}
  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);
  const PoolPlan& plan() const { return *plan_; }
  PoolPlan& plan() { return *plan_; }

 private:
  std::shared_ptr<PoolPlan> plan_;
};

/// Per-channel max over all vertices; output is 1 x d.
class GlobalMaxPoolLayer {
 public:
  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);

 private:
  std::vector<Eigen::Index> argmax_;
  Eigen::Index rows_ = 0;
};

/// y = x W + b for row inputs.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(Eigen::MatrixXd w, Eigen::RowVectorXd b);
  static DenseLayer random(std::size_t d_in, std::size_t d_out, CounterRng& rng);

  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);

  Eigen::MatrixXd weight;
  Eigen::RowVectorXd bias;
  Eigen::MatrixXd grad_weight;
  Eigen::RowVectorXd grad_bias;

 private:
  Signal x_;
};

/// Row-wise log-softmax.
class LogSoftmaxLayer {
 public:
  Signal forward(const Signal& x);
  Signal backward(const Signal& dy);

 private:
  Signal y_;
};

using Layer = std::variant<ChebLayer, ReluLayer, PoolLayer, UnpoolLayer, GlobalMaxPoolLayer, DenseLayer,
                           LogSoftmaxLayer>;

/// Mean negative log-likelihood of row-wise log-probabilities, and its gradient.
double nll_loss(const Signal& log_probs, std::span<const int> labels, Signal* grad = nullptr);

class Model {
 public:
  std::vector<Layer> layers;

  /// Checks that adjacent layer dimensions agree for an input of
  /// `n_vertices` x `d_in`. Throws ShapeError otherwise.
  void validate(std::size_t n_vertices, std::size_t d_in) const;

  Signal forward(const Signal& x);
  /// Back-propagates dL/d(output), accumulating parameter gradients.
  Signal backward(const Signal& dy);
  void zero_grad();
  void sgd_step(double lr);
  /// Redraws the members of every Rand-mode pool plan.
  void reseed_pools(std::uint64_t seed);
  std::size_t parameter_count() const;
  /// All parameters flattened in layer order (used for checkpoints and tests).
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  std::vector<double> gradients() const;
};

/// CLMD checkpoint. Laplacians are not stored: Cheb layers record a graph
/// level index and are re-attached with `attach` after loading.
struct ModelFile {
  Model model;
  std::vector<std::uint32_t> cheb_levels;  ///< one per ChebLayer, in order
};
std::vector<std::uint8_t> serialize_model(const Model& m, std::span<const std::uint32_t> cheb_levels);
ModelFile deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const std::string& path, const Model& m, std::span<const std::uint32_t> cheb_levels);
ModelFile load_model(const std::string& path);
/// Points every ChebLayer at levels[cheb_levels[i]].
void attach(ModelFile& file, std::span<const std::shared_ptr<const Laplacian>> levels);

}  // namespace anisograph
