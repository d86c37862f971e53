#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <variant>

#include <Eigen/Dense>

#include "anisograph/rng.hpp"

namespace oracle {

Eigen::Matrix3d matrix_exp(const Eigen::Matrix3d& a, int terms) {
  int squarings = 0;
  double norm = a.norm();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::Matrix3d s = a / std::pow(2.0, squarings);
  Eigen::Matrix3d sum = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * s / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Eigen::Matrix3d matrix_log(const Eigen::Matrix3d& m, int terms) {
  Eigen::Matrix3d x = m;
  int roots = 0;
  while ((x - Eigen::Matrix3d::Identity()).norm() > 0.25) {
    // Denman-Beavers iteration for the principal square root.
    Eigen::Matrix3d y = x;
    Eigen::Matrix3d z = Eigen::Matrix3d::Identity();
    for (int it = 0; it < 100; ++it) {
      const Eigen::Matrix3d yn = 0.5 * (y + z.inverse());
      const Eigen::Matrix3d zn = 0.5 * (z + y.inverse());
      const double change = (yn - y).norm();
      y = yn;
      z = zn;
      if (change < 1e-15) break;
    }
    x = y;
    ++roots;
  }
  const Eigen::Matrix3d e = x - Eigen::Matrix3d::Identity();
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= terms; ++k) {
    power = power * e;
    sum += ((k % 2 == 1) ? 1.0 : -1.0) * power / static_cast<double>(k);
  }
  return std::pow(2.0, roots) * sum;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> brute_force_knn(
    const std::vector<std::vector<double>>& dist, std::uint32_t k, double tie_tol) {
  const std::size_t n = dist.size();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint64_t>> row;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(dist[i][j], j);
    }
    std::sort(row.begin(), row.end());
    const std::size_t kk = std::min<std::size_t>(k, row.size());
    const double dk = row[kk - 1].first;
    const double tol = tie_tol * dk;
    std::size_t take = 0;
    std::size_t group_start = kk - 1;
    while (group_start > 0 && row[group_start - 1].first >= dk - tol) --group_start;
    std::size_t group_end = kk;
    while (group_end < row.size() && row[group_end].first <= dk + tol) ++group_end;
    if (group_end <= kk) {
      take = group_end;
    } else if (group_start > 0) {
      take = group_start;
    } else {
      take = group_end;
    }
    for (std::size_t t = 0; t < take; ++t) {
      pairs.emplace_back(std::min<std::uint64_t>(i, row[t].second), std::max<std::uint64_t>(i, row[t].second));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

Eigen::MatrixXd dense_laplacian(const Eigen::MatrixXd& w) {
  const Eigen::Index n = w.rows();
  const Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (deg[i] > 0.0) l(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && w(i, j) != 0.0) l(i, j) = -w(i, j) / std::sqrt(deg[i] * deg[j]);
    }
  }
  return l;
}

double chebyshev_t(int j, double lambda) {
  if (std::abs(lambda) <= 1.0) return std::cos(j * std::acos(lambda));
  const double sign = (lambda < 0.0 && j % 2 == 1) ? -1.0 : 1.0;
  return sign * std::cosh(j * std::acosh(std::abs(lambda)));
}

Eigen::MatrixXd spectral_cheb(const Eigen::MatrixXd& l_rescaled, const Eigen::MatrixXd& x,
                              const std::vector<Eigen::MatrixXd>& theta) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l_rescaled);
  const Eigen::MatrixXd& phi = es.eigenvectors();
  const Eigen::MatrixXd xhat = phi.transpose() * x;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), theta.front().cols());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    Eigen::VectorXd t(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = chebyshev_t(static_cast<int>(j), es.eigenvalues()[i]);
    y += phi * (t.asDiagonal() * xhat) * theta[j];
  }
  return y;
}

Eigen::MatrixXd spectral_heat(const Eigen::MatrixXd& l, const Eigen::MatrixXd& x, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  const Eigen::VectorXd h = (-tau * es.eigenvalues().array()).exp();
  return es.eigenvectors() * h.asDiagonal() * es.eigenvectors().transpose() * x;
}

std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> at, double step) {
  std::vector<double> g(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = at[i];
    at[i] = saved + step;
    const double up = f(at);
    at[i] = saved - step;
    const double down = f(at);
    at[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / scale;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

anisograph::CsrMatrix random_graph(std::size_t n, std::size_t extra, std::uint64_t seed) {
  anisograph::CounterRng rng(seed);
  std::vector<anisograph::Triplet> t;
  auto add = [&](std::uint64_t i, std::uint64_t j) {
    if (i == j) return;
    const double w = rng.uniform(0.1, 1.0);
    t.push_back({i, j, w});
    t.push_back({j, i, w});
  };
  for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < extra; ++e) add(i, rng.below(n));
  }
  // Duplicate pairs are summed, which keeps the matrix symmetric.
  return anisograph::CsrMatrix::from_triplets(n, t);
}

std::size_t components(const anisograph::CsrMatrix& a) {
  std::vector<int> seen(a.n, 0);
  std::size_t count = 0;
  for (std::size_t s = 0; s < a.n; ++s) {
    if (seen[s]) continue;
    ++count;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto k = a.row_begin(v); k < a.row_end(v); ++k) {
        const auto u = a.cols[k];
        if (!seen[u] && a.values[k] != 0.0) {
          seen[u] = 1;
          q.push(u);
        }
      }
    }
  }
  return count;
}

namespace {

double max_margin(const Eigen::MatrixXd& x, const std::vector<std::vector<std::uint64_t>>& groups) {
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (const auto& g : groups) {
      if (g.size() < 2) continue;
      std::vector<double> v;
      for (auto i : g) v.push_back(x(static_cast<Eigen::Index>(i), c));
      std::partial_sort(v.begin(), v.begin() + 2, v.end(), std::greater<>());
      // Exact zeros come from inactive ReLUs and stay zero under small steps.
      if (v[0] == 0.0 && v[1] == 0.0) continue;
      margin = std::min(margin, v[0] - v[1]);
    }
  }
  return margin;
}

}  // namespace

double kink_margin(anisograph::Model model, const anisograph::Signal& x) {
  using namespace anisograph;
  double margin = std::numeric_limits<double>::infinity();
  Signal h = x;
  for (auto& layer : model.layers) {
    if (std::holds_alternative<ReluLayer>(layer)) {
      margin = std::min(margin, h.cwiseAbs().minCoeff());
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      const auto mode = p->plan().mode;
      if (mode == PoolMode::R2Max || mode == PoolMode::S2Max) margin = std::min(margin, max_margin(h, p->plan().members));
    } else if (std::holds_alternative<GlobalMaxPoolLayer>(layer)) {
      std::vector<std::uint64_t> all(static_cast<std::size_t>(h.rows()));
      std::iota(all.begin(), all.end(), 0);
      margin = std::min(margin, max_margin(h, {all}));
    }
    h = std::visit([&](auto& l) { return l.forward(h); }, layer);
  }
  return margin;
}

}  // namespace oracle
