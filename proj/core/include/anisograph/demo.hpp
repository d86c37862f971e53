#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "anisograph/network.hpp"

namespace anisograph {

/// Synthetic oriented-bar task on a lifted SE2 grid. Class c holds bars at an
/// angle of 15 c degrees from the nearest grid axis (c = 0..3), so labels are
/// invariant under the quarter turns and reflections of the square grid.
struct DemoConfig {
  std::uint32_t grid = 12;
  std::uint32_t n_orient = 8;
  double epsilon = 0.31622776601683794;  ///< epsilon^2 = 0.1
  double alpha = 1.0;
  std::uint32_t knn = 16;
  std::uint32_t order = 4;
  std::uint32_t channels = 8;
  PoolMode pool = PoolMode::R2Max;
  std::size_t train_size = 256;
  std::size_t test_size = 128;
  int epochs = 30;
  double lr = 1e-2;
  std::size_t batch = 1;
  std::uint64_t seed = 1;
};

inline constexpr int kDemoClasses = 4;

struct DemoDataset {
  std::vector<Signal> inputs;  ///< lifted, |V| x 1
  std::vector<int> labels;
};

/// Renders `count` anti-aliased bars with light noise and lifts each image by
/// copying it into every orientation slice.
DemoDataset make_oriented_bars(const GridSpec& spec, std::size_t count, std::uint64_t seed);

struct DemoGraphs {
  GridSpec fine;
  GridSpec coarse;
  std::shared_ptr<const Laplacian> fine_laplacian;   ///< rescaled
  std::shared_ptr<const Laplacian> coarse_laplacian;  ///< rescaled
  Permutation rotation;  ///< quarter turn on the fine grid
  double equivariance_error = 0.0;
};

DemoGraphs build_demo_graphs(const DemoConfig& config);

/// Cheb(1->C) ReLU Pool Cheb(C->C) ReLU GlobalMax Dense(C->4) LogSoftmax.
Model make_demo_model(const DemoGraphs& graphs, const DemoConfig& config, std::uint64_t seed);
/// Graph levels of the Cheb layers of make_demo_model, for checkpoints.
std::vector<std::uint32_t> demo_cheb_levels();

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;      ///< mean train NLL after the epoch
  double accuracy = 0.0;  ///< train accuracy after the epoch
  double rotation_consistency = 0.0;  ///< test predictions unchanged by a quarter turn
  double test_accuracy = 0.0;
};

struct DemoResult {
  std::vector<EpochMetrics> history;  ///< epoch 0 is the untrained model
  Model model;
  DemoGraphs graphs;
  DemoDataset test;
};

/// Plain per-batch SGD on NLL. Throws DivergenceError if the loss turns
/// non-finite.
DemoResult train_demo(const DemoConfig& config);

int predict(Model& model, const Signal& x);

/// `epoch,loss,accuracy,rotation_consistency` with 17 significant digits.
std::string metrics_csv(const std::vector<EpochMetrics>& history);

}  // namespace anisograph
