#include "anisograph/demo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "anisograph/error.hpp"
#include "anisograph/graph.hpp"

namespace anisograph {
namespace {

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - a - t * ab).norm();
}

std::shared_ptr<const Laplacian> rescaled_laplacian(const GridSpec& spec, const DemoConfig& config) {
  const double xi = xi_from_alpha(config.alpha, spec.n_orient, spec.spatial_count());
  GraphConfig gc{Metric(config.epsilon, xi), config.alpha, config.knn};
  const ManifoldGraph g = build_graph(make_vertices(spec), gc);
  const Laplacian l = laplacian(g);
  return std::make_shared<const Laplacian>(rescale(l, lambda_max(l).value));
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(Model& model, const DemoDataset& data) {
  Evaluation e;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    const Signal out = model.forward(data.inputs[i]);
    const int label = data.labels[i];
    e.loss += nll_loss(out, std::span<const int>(&label, 1));
    Eigen::Index best = 0;
    out.row(0).maxCoeff(&best);
    if (best == label) e.accuracy += 1.0;
  }
  const double n = static_cast<double>(data.inputs.size());
  e.loss /= n;
  e.accuracy /= n;
  return e;
}

double rotation_consistency(Model& model, const DemoDataset& data, const Permutation& rotation) {
  double same = 0.0;
  for (const auto& x : data.inputs) {
    if (predict(model, x) == predict(model, permute_rows(x, rotation))) same += 1.0;
  }
  return data.inputs.empty() ? 1.0 : same / static_cast<double>(data.inputs.size());
}

}  // namespace

DemoDataset make_oriented_bars(const GridSpec& spec, std::size_t count, std::uint64_t seed) {
  if (spec.kind != Manifold::SE2 && spec.kind != Manifold::R2) throw ArgumentError("demo: planar grid required");
  CounterRng rng(seed);
  const std::size_t vs = spec.spatial_count();
  const double cx = 0.5 * (spec.nx - 1.0);
  const double cy = 0.5 * (spec.ny - 1.0);
  const double size = std::min(spec.nx, spec.ny);
  DemoDataset d;
  d.inputs.reserve(count);
  d.labels.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const int label = static_cast<int>(rng.below(kDemoClasses));
    const double sign = rng.below(2) == 0 ? 1.0 : -1.0;
    const double quarter = 90.0 * static_cast<double>(rng.below(2));
    const double phi = (sign * 15.0 * label + quarter) * std::numbers::pi / 180.0;
    const Eigen::Vector2d center(cx + rng.uniform(-1.5, 1.5), cy + rng.uniform(-1.5, 1.5));
    const double half = rng.uniform(0.3, 0.4) * size;
    const Eigen::Vector2d dir(std::cos(phi), std::sin(phi));
    const Eigen::Vector2d a = center - half * dir;
    const Eigen::Vector2d b = center + half * dir;
    Eigen::VectorXd image(static_cast<Eigen::Index>(vs));
    for (std::size_t iy = 0; iy < spec.ny; ++iy) {
      for (std::size_t ix = 0; ix < spec.nx; ++ix) {
        const double dist = segment_distance(Eigen::Vector2d(ix, iy), a, b);
        image[static_cast<Eigen::Index>(iy * spec.nx + ix)] = std::max(0.0, 1.0 - dist) + 0.05 * rng.normal();
      }
    }
    Signal x(static_cast<Eigen::Index>(spec.vertex_count()), 1);
    for (std::size_t k = 0; k < spec.n_orient; ++k) {
      x.col(0).segment(static_cast<Eigen::Index>(k * vs), static_cast<Eigen::Index>(vs)) = image;
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(label);
  }
  return d;
}

DemoGraphs build_demo_graphs(const DemoConfig& config) {
  DemoGraphs g;
  g.fine = GridSpec{Manifold::SE2, config.grid, config.grid, 0, config.n_orient};
  g.fine.validate();
  g.coarse = r2_coarse_spec(g.fine);
  g.fine_laplacian = rescaled_laplacian(g.fine, config);
  g.coarse_laplacian = rescaled_laplacian(g.coarse, config);
  g.rotation = rotation_permutation(g.fine, 1);
  g.equivariance_error = equivariance_error(*g.fine_laplacian, g.rotation);
  return g;
}

Model make_demo_model(const DemoGraphs& graphs, const DemoConfig& config, std::uint64_t seed) {
  CounterRng rng(CounterRng::derive(seed, 0x696e6974));
  Model m;
  m.layers.emplace_back(ChebLayer::random(graphs.fine_laplacian, config.order, 1, config.channels, rng));
  m.layers.emplace_back(ReluLayer{});
  m.layers.emplace_back(
      PoolLayer(std::make_shared<PoolPlan>(r2_pool_plan(graphs.fine, config.pool, CounterRng::derive(seed, 1)))));
  m.layers.emplace_back(
      ChebLayer::random(graphs.coarse_laplacian, config.order, config.channels, config.channels, rng));
  m.layers.emplace_back(ReluLayer{});
  m.layers.emplace_back(GlobalMaxPoolLayer{});
  m.layers.emplace_back(DenseLayer::random(config.channels, kDemoClasses, rng));
  m.layers.emplace_back(LogSoftmaxLayer{});
  m.validate(graphs.fine.vertex_count(), 1);
  return m;
}

std::vector<std::uint32_t> demo_cheb_levels() { return {0, 1}; }

int predict(Model& model, const Signal& x) {
  Eigen::Index best = 0;
  model.forward(x).row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

DemoResult train_demo(const DemoConfig& config) {
  if (config.epochs < 0) throw ArgumentError("demo: epochs must be >= 0");
  if (!(config.lr > 0.0)) throw ArgumentError("demo: lr must be positive");
  if (config.batch == 0 || config.train_size == 0) throw ArgumentError("demo: batch and train size must be positive");

  DemoResult r;
  r.graphs = build_demo_graphs(config);
  const DemoDataset train = make_oriented_bars(r.graphs.fine, config.train_size, CounterRng::derive(config.seed, 2));
  r.test = make_oriented_bars(r.graphs.fine, config.test_size, CounterRng::derive(config.seed, 3));
  r.model = make_demo_model(r.graphs, config, config.seed);

  auto record = [&](int epoch) {
    const Evaluation e = evaluate(r.model, train);
    if (!std::isfinite(e.loss)) {
      throw DivergenceError("demo: non-finite loss after epoch " + std::to_string(epoch) + " (lr " +
                            format_double(config.lr) + ", seed " + std::to_string(config.seed) + ")");
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.loss = e.loss;
    m.accuracy = e.accuracy;
    m.rotation_consistency = rotation_consistency(r.model, r.test, r.graphs.rotation);
    m.test_accuracy = evaluate(r.model, r.test).accuracy;
    r.history.push_back(m);
  };
  record(0);

  std::vector<std::size_t> order(train.inputs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterRng shuffle(CounterRng::derive(config.seed, 4));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    r.model.reseed_pools(CounterRng::derive(config.seed, 100 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      r.model.zero_grad();
      for (std::size_t s = start; s < end; ++s) {
        const auto idx = order[s];
        const Signal out = r.model.forward(train.inputs[idx]);
        Signal grad;
        const double loss = nll_loss(out, std::span<const int>(&train.labels[idx], 1), &grad);
        if (!std::isfinite(loss)) {
          throw DivergenceError("demo: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                                std::to_string(idx) + " (lr " + format_double(config.lr) + ")");
        }
        r.model.backward(grad / static_cast<double>(end - start));
      }
      r.model.sgd_step(config.lr);
    }
    record(epoch);
  }
  return r;
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out << "epoch,loss,accuracy,rotation_consistency\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << format_double(m.loss) << ',' << format_double(m.accuracy) << ','
        << format_double(m.rotation_consistency) << '\n';
  }
  return out.str();
}

}  // namespace anisograph
