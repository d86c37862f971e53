#include "anisograph/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anisograph/error.hpp"

namespace anisograph {
namespace {

std::string dims(Eigen::Index r, Eigen::Index c) { return std::to_string(r) + "x" + std::to_string(c); }

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

std::size_t take(std::span<const double> src, std::size_t at, Eigen::MatrixXd& m) {
  std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(at), m.size(), m.data());
  return at + static_cast<std::size_t>(m.size());
}

std::size_t take(std::span<const double> src, std::size_t at, Eigen::RowVectorXd& v) {
  std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(at), v.size(), v.data());
  return at + static_cast<std::size_t>(v.size());
}

}  // namespace

// ---------------------------------------------------------------- Chebyshev

ChebLayer::ChebLayer(std::shared_ptr<const Laplacian> lap, ChebCoeffs t, Eigen::RowVectorXd b)
    : theta(std::move(t)), bias(std::move(b)), lap_(std::move(lap)) {
  theta.validate();
  if (static_cast<std::size_t>(bias.size()) != theta.d_out()) throw ShapeError("cheb: bias length != d_out");
  grad_theta = ChebCoeffs(theta.order(), theta.d_in(), theta.d_out());
  grad_bias = Eigen::RowVectorXd::Zero(bias.size());
}

ChebLayer ChebLayer::random(std::shared_ptr<const Laplacian> lap, std::size_t order, std::size_t d_in,
                            std::size_t d_out, CounterRng& rng) {
  if (order == 0 || d_in == 0 || d_out == 0) throw ArgumentError("cheb: order and widths must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(order * d_in + d_out));
  ChebCoeffs t(order, d_in, d_out);
  for (auto& m : t.theta) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  }
  return ChebLayer(std::move(lap), std::move(t), Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(d_out)));
}

const Laplacian& ChebLayer::laplacian() const {
  if (!lap_) throw StateError("cheb: no Laplacian attached");
  return *lap_;
}

void ChebLayer::set_laplacian(std::shared_ptr<const Laplacian> lap) {
  lap_ = std::move(lap);
  z_.clear();
}

Signal ChebLayer::forward(const Signal& x) {
  Signal y = cheb_apply(laplacian(), x, theta, &z_);
  y.rowwise() += bias;
  return y;
}

Signal ChebLayer::backward(const Signal& dy) {
  if (z_.empty()) throw StateError("cheb: backward called before forward");
  if (dy.rows() != z_[0].rows() || static_cast<std::size_t>(dy.cols()) != theta.d_out()) {
    throw ShapeError("cheb backward: gradient is " + dims(dy.rows(), dy.cols()));
  }
  const auto r = theta.order();
  for (std::size_t j = 0; j < r; ++j) grad_theta.theta[j].noalias() += z_[j].transpose() * dy;
  grad_bias += dy.colwise().sum();

  // dx = sum_j T_j(L) (dy Theta_j^T), evaluated with Clenshaw's recurrence.
  const CsrMatrix& l = laplacian().matrix;
  Signal b1 = Signal::Zero(dy.rows(), static_cast<Eigen::Index>(theta.d_in()));
  Signal b2 = b1;
  for (std::size_t k = r - 1; k >= 1; --k) {
    Signal bk = dy * theta.theta[k].transpose();
    bk += 2.0 * l.multiply(b1) - b2;
    b2 = std::move(b1);
    b1 = std::move(bk);
  }
  Signal dx = dy * theta.theta[0].transpose();
  if (r > 1) dx += l.multiply(b1) - b2;
  return dx;
}

// --------------------------------------------------------------------- ReLU

Signal ReluLayer::forward(const Signal& x) {
  x_ = x;
  return x.cwiseMax(0.0);
}

Signal ReluLayer::backward(const Signal& dy) {
  if (x_.size() == 0 && dy.size() != 0) throw StateError("relu: backward called before forward");
  if (dy.rows() != x_.rows() || dy.cols() != x_.cols()) throw ShapeError("relu backward: shape mismatch");
  return (x_.array() > 0.0).select(dy, 0.0);
}

// ------------------------------------------------------------------ Pooling

const char* to_string(PoolMode m) noexcept {
  switch (m) {
    case PoolMode::R2Rand: return "R2Rand";
    case PoolMode::R2Max: return "R2Max";
    case PoolMode::S2Max: return "S2Max";
    case PoolMode::S2Avg: return "S2Avg";
  }
  return "?";
}

void PoolPlan::finalize() {
  if (cluster.size() != fine_size) throw ArgumentError("pool plan: cluster map size != fine size");
  members.assign(coarse_size, {});
  for (std::size_t v = 0; v < fine_size; ++v) {
    if (cluster[v] >= coarse_size) throw ArgumentError("pool plan: coarse id out of range");
    members[cluster[v]].push_back(v);
  }
  for (const auto& m : members) {
    if (m.empty()) throw ArgumentError("pool plan: empty cluster");
  }
  reseed(seed);
}

void PoolPlan::reseed(std::uint64_t s) {
  seed = s;
  selected.clear();
  if (!is_random()) return;
  selected.resize(coarse_size);
  CounterRng rng(seed);
  for (std::size_t c = 0; c < coarse_size; ++c) selected[c] = members[c][rng.below(members[c].size())];
}

GridSpec r2_coarse_spec(const GridSpec& fine) {
  if (fine.kind != Manifold::SE2 && fine.kind != Manifold::R2) throw ArgumentError("r2 pool: planar grid required");
  if (fine.nx < 2 || fine.ny < 2) throw ArgumentError("r2 pool: grid must be at least 2x2");
  GridSpec c = fine;
  c.nx = fine.nx / 2;
  c.ny = fine.ny / 2;
  return c;
}

PoolPlan r2_pool_plan(const GridSpec& fine, PoolMode mode, std::uint64_t seed) {
  if (mode != PoolMode::R2Rand && mode != PoolMode::R2Max) throw ArgumentError("r2 pool: mode must be R2Rand or R2Max");
  const GridSpec coarse = r2_coarse_spec(fine);
  PoolPlan p;
  p.mode = mode;
  p.seed = seed;
  p.fine_size = fine.vertex_count();
  p.coarse_size = coarse.vertex_count();
  p.merged_trailing = (fine.nx % 2) != 0 || (fine.ny % 2) != 0;
  p.cluster.resize(p.fine_size);
  const std::size_t fs = fine.spatial_count();
  const std::size_t cs = coarse.spatial_count();
  for (std::size_t k = 0; k < fine.n_orient; ++k) {
    for (std::size_t iy = 0; iy < fine.ny; ++iy) {
      for (std::size_t ix = 0; ix < fine.nx; ++ix) {
        const std::size_t cx = std::min<std::size_t>(ix / 2, coarse.nx - 1);
        const std::size_t cy = std::min<std::size_t>(iy / 2, coarse.ny - 1);
        p.cluster[k * fs + iy * fine.nx + ix] = k * cs + cy * coarse.nx + cx;
      }
    }
  }
  p.finalize();
  return p;
}

GridSpec s2_coarse_spec(const GridSpec& fine) {
  if (fine.kind != Manifold::S2 && fine.kind != Manifold::SO3) throw ArgumentError("s2 pool: spherical grid required");
  if (fine.level == 0) throw ArgumentError("s2 pool: level 0 cannot be coarsened");
  GridSpec c = fine;
  c.level = fine.level - 1;
  return c;
}

PoolPlan s2_pool_plan(const GridSpec& fine, PoolMode mode, std::uint64_t seed) {
  if (mode != PoolMode::S2Max && mode != PoolMode::S2Avg) throw ArgumentError("s2 pool: mode must be S2Max or S2Avg");
  const GridSpec coarse = s2_coarse_spec(fine);
  const IcosahedralMesh mesh = icosahedral_mesh(fine.level);
  const std::size_t fs = mesh.points.size();
  const std::size_t cs = icosahedral_count(coarse.level);

  std::vector<std::uint64_t> spatial(fs);
  std::vector<std::size_t> children(cs, 0);
  for (std::size_t v = 0; v < cs; ++v) spatial[v] = v;
  for (std::size_t v = cs; v < fs; ++v) {
    // midpoint_parents accumulates over all levels, starting after the 12 base vertices.
    const auto [lo, hi] = mesh.midpoint_parents[v - 12];
    const std::uint32_t pick = children[hi] < children[lo] ? hi : lo;
    spatial[v] = pick;
    ++children[pick];
  }

  PoolPlan p;
  p.mode = mode;
  p.seed = seed;
  const std::size_t no = fine.kind == Manifold::SO3 ? fine.n_orient : 1;
  p.fine_size = fs * no;
  p.coarse_size = cs * no;
  p.cluster.resize(p.fine_size);
  for (std::size_t k = 0; k < no; ++k) {
    for (std::size_t v = 0; v < fs; ++v) p.cluster[k * fs + v] = k * cs + spatial[v];
  }
  p.finalize();
  return p;
}

Signal pool_forward(const PoolPlan& plan, const Signal& x, std::vector<std::uint64_t>* argmax) {
  if (static_cast<std::size_t>(x.rows()) != plan.fine_size) {
    throw ShapeError("pool: signal has " + std::to_string(x.rows()) + " rows, plan expects " +
                     std::to_string(plan.fine_size));
  }
  const Eigen::Index d = x.cols();
  Signal y(static_cast<Eigen::Index>(plan.coarse_size), d);
  if (argmax) argmax->assign(plan.coarse_size * static_cast<std::size_t>(d), 0);
  for (std::size_t c = 0; c < plan.coarse_size; ++c) {
    const auto& m = plan.members[c];
    const auto ci = static_cast<Eigen::Index>(c);
    switch (plan.mode) {
      case PoolMode::R2Rand:
        y.row(ci) = x.row(static_cast<Eigen::Index>(plan.selected[c]));
        if (argmax) {
          for (Eigen::Index ch = 0; ch < d; ++ch) (*argmax)[c * d + ch] = plan.selected[c];
        }
        break;
      case PoolMode::S2Avg: {
        Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(d);
        for (auto v : m) s += x.row(static_cast<Eigen::Index>(v));
        y.row(ci) = s / static_cast<double>(m.size());
        break;
      }
      case PoolMode::R2Max:
      case PoolMode::S2Max:
        for (Eigen::Index ch = 0; ch < d; ++ch) {
          std::uint64_t best = m[0];
          for (auto v : m) {
            if (x(static_cast<Eigen::Index>(v), ch) > x(static_cast<Eigen::Index>(best), ch)) best = v;
          }
          y(ci, ch) = x(static_cast<Eigen::Index>(best), ch);
          if (argmax) (*argmax)[c * d + ch] = best;
        }
        break;
    }
  }
  return y;
}

Signal pool_backward(const PoolPlan& plan, const Signal& dy, std::span<const std::uint64_t> argmax) {
  if (static_cast<std::size_t>(dy.rows()) != plan.coarse_size) throw ShapeError("pool backward: size mismatch");
  const Eigen::Index d = dy.cols();
  Signal dx = Signal::Zero(static_cast<Eigen::Index>(plan.fine_size), d);
  if (plan.mode == PoolMode::S2Avg) {
    for (std::size_t c = 0; c < plan.coarse_size; ++c) {
      const double inv = 1.0 / static_cast<double>(plan.members[c].size());
      for (auto v : plan.members[c]) dx.row(static_cast<Eigen::Index>(v)) = inv * dy.row(static_cast<Eigen::Index>(c));
    }
    return dx;
  }
  if (argmax.size() != plan.coarse_size * static_cast<std::size_t>(d)) {
    throw StateError("pool backward: no cached selection (call forward first)");
  }
  for (std::size_t c = 0; c < plan.coarse_size; ++c) {
    for (Eigen::Index ch = 0; ch < d; ++ch) {
      dx(static_cast<Eigen::Index>(argmax[c * d + ch]), ch) += dy(static_cast<Eigen::Index>(c), ch);
    }
  }
  return dx;
}

Signal unpool_forward(const PoolPlan& plan, const Signal& x) {
  if (static_cast<std::size_t>(x.rows()) != plan.coarse_size) {
    throw ShapeError("unpool: signal has " + std::to_string(x.rows()) + " rows, plan expects " +
                     std::to_string(plan.coarse_size));
  }
  Signal y = Signal::Zero(static_cast<Eigen::Index>(plan.fine_size), x.cols());
  if (plan.is_random()) {
    for (std::size_t c = 0; c < plan.coarse_size; ++c) {
      y.row(static_cast<Eigen::Index>(plan.selected[c])) = x.row(static_cast<Eigen::Index>(c));
    }
  } else {
    for (std::size_t v = 0; v < plan.fine_size; ++v) {
      y.row(static_cast<Eigen::Index>(v)) = x.row(static_cast<Eigen::Index>(plan.cluster[v]));
    }
  }
  return y;
}

Signal unpool_backward(const PoolPlan& plan, const Signal& dy) {
  if (static_cast<std::size_t>(dy.rows()) != plan.fine_size) throw ShapeError("unpool backward: size mismatch");
  Signal dx = Signal::Zero(static_cast<Eigen::Index>(plan.coarse_size), dy.cols());
  if (plan.is_random()) {
    for (std::size_t c = 0; c < plan.coarse_size; ++c) {
      dx.row(static_cast<Eigen::Index>(c)) = dy.row(static_cast<Eigen::Index>(plan.selected[c]));
    }
  } else {
    for (std::size_t v = 0; v < plan.fine_size; ++v) {
      dx.row(static_cast<Eigen::Index>(plan.cluster[v])) += dy.row(static_cast<Eigen::Index>(v));
    }
  }
  return dx;
}

Signal PoolLayer::forward(const Signal& x) {
  cached_ = true;
  return pool_forward(*plan_, x, &argmax_);
}

Signal PoolLayer::backward(const Signal& dy) {
  if (!cached_) throw StateError("pool: backward called before forward");
  return pool_backward(*plan_, dy, argmax_);
}

Signal UnpoolLayer::forward(const Signal& x) { return unpool_forward(*plan_, x); }
Signal UnpoolLayer::backward(const Signal& dy) { return unpool_backward(*plan_, dy); }

Signal GlobalMaxPoolLayer::forward(const Signal& x) {
  if (x.rows() == 0) throw ShapeError("global max pool: empty signal");
  rows_ = x.rows();
  argmax_.assign(static_cast<std::size_t>(x.cols()), 0);
  Signal y(1, x.cols());
  for (Eigen::Index ch = 0; ch < x.cols(); ++ch) {
    Eigen::Index best = 0;
    for (Eigen::Index v = 1; v < x.rows(); ++v) {
      if (x(v, ch) > x(best, ch)) best = v;
    }
    argmax_[static_cast<std::size_t>(ch)] = best;
    y(0, ch) = x(best, ch);
  }
  return y;
}

Signal GlobalMaxPoolLayer::backward(const Signal& dy) {
  if (rows_ == 0) throw StateError("global max pool: backward called before forward");
  if (dy.rows() != 1 || static_cast<std::size_t>(dy.cols()) != argmax_.size()) {
    throw ShapeError("global max pool backward: shape mismatch");
  }
  Signal dx = Signal::Zero(rows_, dy.cols());
  for (Eigen::Index ch = 0; ch < dy.cols(); ++ch) dx(argmax_[static_cast<std::size_t>(ch)], ch) = dy(0, ch);
  return dx;
}

// -------------------------------------------------------------------- Dense

DenseLayer::DenseLayer(Eigen::MatrixXd w, Eigen::RowVectorXd b) : weight(std::move(w)), bias(std::move(b)) {
  if (bias.size() != weight.cols()) throw ShapeError("dense: bias length != output width");
  grad_weight = Eigen::MatrixXd::Zero(weight.rows(), weight.cols());
  grad_bias = Eigen::RowVectorXd::Zero(bias.size());
}

DenseLayer DenseLayer::random(std::size_t d_in, std::size_t d_out, CounterRng& rng) {
  if (d_in == 0 || d_out == 0) throw ArgumentError("dense: widths must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
  Eigen::MatrixXd w(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  return DenseLayer(std::move(w), Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(d_out)));
}

Signal DenseLayer::forward(const Signal& x) {
  if (x.cols() != weight.rows()) throw ShapeError("dense: input is " + dims(x.rows(), x.cols()));
  x_ = x;
  Signal y = x * weight;
  y.rowwise() += bias;
  return y;
}

Signal DenseLayer::backward(const Signal& dy) {
  if (x_.size() == 0) throw StateError("dense: backward called before forward");
  if (dy.rows() != x_.rows() || dy.cols() != weight.cols()) throw ShapeError("dense backward: shape mismatch");
  grad_weight.noalias() += x_.transpose() * dy;
  grad_bias += dy.colwise().sum();
  return dy * weight.transpose();
}

Signal LogSoftmaxLayer::forward(const Signal& x) {
  y_.resize(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    const auto shifted = (x.row(r).array() - m).eval();
    y_.row(r) = shifted - std::log(shifted.exp().sum());
  }
  return y_;
}

Signal LogSoftmaxLayer::backward(const Signal& dy) {
  if (y_.size() == 0) throw StateError("log-softmax: backward called before forward");
  if (dy.rows() != y_.rows() || dy.cols() != y_.cols()) throw ShapeError("log-softmax backward: shape mismatch");
  Signal dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    dx.row(r) = dy.row(r).array() - y_.row(r).array().exp() * dy.row(r).sum();
  }
  return dx;
}

double nll_loss(const Signal& log_probs, std::span<const int> labels, Signal* grad) {
  if (static_cast<std::size_t>(log_probs.rows()) != labels.size()) throw ShapeError("nll: label count mismatch");
  const double n = static_cast<double>(labels.size());
  double loss = 0.0;
  if (grad) *grad = Signal::Zero(log_probs.rows(), log_probs.cols());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= log_probs.cols()) throw ArgumentError("nll: label out of range");
    loss -= log_probs(static_cast<Eigen::Index>(r), labels[r]);
    if (grad) (*grad)(static_cast<Eigen::Index>(r), labels[r]) = -1.0 / n;
  }
  return loss / n;
}

// -------------------------------------------------------------------- Model

void Model::validate(std::size_t n_vertices, std::size_t d_in) const {
  auto rows = n_vertices;
  auto cols = d_in;
  std::size_t index = 0;
  auto fail = [&](const std::string& what) {
    throw ShapeError("layer " + std::to_string(index) + ": " + what + " (input " + std::to_string(rows) + "x" +
                     std::to_string(cols) + ")");
  };
  for (const auto& layer : layers) {
    std::visit(Overloaded{
                   [&](const ChebLayer& l) {
                     if (rows != l.laplacian().size()) fail("graph size mismatch");
                     if (cols != l.theta.d_in()) fail("channel mismatch");
                     if (!l.laplacian().rescaled) fail("Laplacian not rescaled");
                     cols = l.theta.d_out();
                   },
                   [&](const ReluLayer&) {},
                   [&](const PoolLayer& l) {
                     if (rows != l.plan().fine_size) fail("pool expects " + std::to_string(l.plan().fine_size));
                     rows = l.plan().coarse_size;
                   },
                   [&](const UnpoolLayer& l) {
                     if (rows != l.plan().coarse_size) fail("unpool expects " + std::to_string(l.plan().coarse_size));
                     rows = l.plan().fine_size;
                   },
                   [&](const GlobalMaxPoolLayer&) { rows = 1; },
                   [&](const DenseLayer& l) {
                     if (cols != static_cast<std::size_t>(l.weight.rows())) fail("dense width mismatch");
                     cols = static_cast<std::size_t>(l.weight.cols());
                   },
                   [&](const LogSoftmaxLayer&) {},
               },
               layer);
    ++index;
  }
}

Signal Model::forward(const Signal& x) {
  Signal h = x;
  for (auto& layer : layers) h = std::visit([&](auto& l) { return l.forward(h); }, layer);
  return h;
}

Signal Model::backward(const Signal& dy) {
  Signal g = dy;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    g = std::visit([&](auto& l) { return l.backward(g); }, *it);
  }
  return g;
}

void Model::zero_grad() {
  for (auto& layer : layers) {
    std::visit(Overloaded{
                   [](ChebLayer& l) {
                     for (auto& m : l.grad_theta.theta) m.setZero();
                     l.grad_bias.setZero();
                   },
                   [](DenseLayer& l) {
                     l.grad_weight.setZero();
                     l.grad_bias.setZero();
                   },
                   [](auto&) {},
               },
               layer);
  }
}

void Model::sgd_step(double lr) {
  for (auto& layer : layers) {
    std::visit(Overloaded{
                   [lr](ChebLayer& l) {
                     for (std::size_t j = 0; j < l.theta.order(); ++j) l.theta.theta[j] -= lr * l.grad_theta.theta[j];
                     l.bias -= lr * l.grad_bias;
                   },
                   [lr](DenseLayer& l) {
                     l.weight -= lr * l.grad_weight;
                     l.bias -= lr * l.grad_bias;
                   },
                   [](auto&) {},
               },
               layer);
  }
}

void Model::reseed_pools(std::uint64_t seed) {
  std::uint64_t stream = 0;
  for (auto& layer : layers) {
    if (auto* p = std::get_if<PoolLayer>(&layer)) {
      if (p->plan().is_random()) p->plan().reseed(CounterRng::derive(seed, stream));
      ++stream;
    }
  }
}

std::vector<double> Model::parameters() const {
  std::vector<double> out;
  for (const auto& layer : layers) {
    if (const auto* c = std::get_if<ChebLayer>(&layer)) {
      for (const auto& m : c->theta.theta) append(out, m);
      append(out, c->bias);
    } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      append(out, d->weight);
      append(out, d->bias);
    }
  }
  return out;
}

std::vector<double> Model::gradients() const {
  std::vector<double> out;
  for (const auto& layer : layers) {
    if (const auto* c = std::get_if<ChebLayer>(&layer)) {
      for (const auto& m : c->grad_theta.theta) append(out, m);
      append(out, c->grad_bias);
    } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      append(out, d->grad_weight);
      append(out, d->grad_bias);
    }
  }
  return out;
}

std::size_t Model::parameter_count() const { return parameters().size(); }

void Model::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ShapeError("set_parameters: expected " +
                                                           std::to_string(parameter_count()) + " values");
  std::size_t at = 0;
  for (auto& layer : layers) {
    if (auto* c = std::get_if<ChebLayer>(&layer)) {
      for (auto& m : c->theta.theta) at = take(values, at, m);
      at = take(values, at, c->bias);
    } else if (auto* d = std::get_if<DenseLayer>(&layer)) {
      at = take(values, at, d->weight);
      at = take(values, at, d->bias);
    }
  }
}

}  // namespace anisograph
