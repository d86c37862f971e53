#include "anisograph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anisograph/error.hpp"
#include "anisograph/rng.hpp"
#include "parallel.hpp"

namespace anisograph {
namespace {

struct Candidate {
  double d;
  std::uint64_t j;
};

// Indices of the neighbors row `i` selects; `cand` is scratch space.
void select_neighbors(std::vector<Candidate>& cand, std::uint32_t k,
                      std::vector<std::uint64_t>& out) {
  out.clear();
  const auto by_distance = [](const Candidate& a, const Candidate& b) {
    return a.d != b.d ? a.d < b.d : a.j < b.j;
  };
  const std::size_t kth = k - 1;
  std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(kth), cand.end(),
                   by_distance);
  const double dk = cand[kth].d;
  const double tol = kKnnTieTolerance * std::max(dk, 1e-300);

  std::size_t upper = 0;  // #{d <= dk + tol}
  std::size_t lower = 0;  // #{d <  dk - tol}
  for (const auto& c : cand) {
    if (c.d <= dk + tol) ++upper;
    if (c.d < dk - tol) ++lower;
  }
  if (upper <= k) {
    for (const auto& c : cand) {
      if (c.d <= dk + tol) out.push_back(c.j);
    }
    return;
  }
  if (lower > 0) {
    for (const auto& c : cand) {
      if (c.d < dk - tol) out.push_back(c.j);
    }
    return;
  }
  // The nearest tie group alone exceeds K: keep it whole.
  for (const auto& c : cand) {
    if (c.d <= dk + tol) out.push_back(c.j);
  }
}

ManifoldGraph rebuild(const ManifoldGraph& g, VertexSet vertices, std::span<const Edge> edges,
                      GraphMetadata meta) {
  return assemble_graph(std::move(vertices), edges, g.metric, g.alpha, g.knn, g.bandwidth,
                        std::move(meta));
}

}  // namespace

double xi_from_alpha(double alpha, std::size_t n_orient, std::size_t n_spatial) {
  if (!(alpha > 0.0) || n_orient == 0 || n_spatial == 0) {
    throw ArgumentError("xi_from_alpha: inputs must be positive");
  }
  return std::sqrt(alpha * static_cast<double>(n_orient) / static_cast<double>(n_spatial));
}

KnnResult knn_edges(const VertexSet& vertices, const Metric& metric, std::uint32_t k) {
  const std::size_t n = vertices.size();
  if (k == 0) throw ArgumentError("knn: K must be >= 1");
  if (n < 2) throw ArgumentError("knn: need at least two vertices");

  KnnResult result;
  result.k_requested = k;
  if (k >= n) {
    k = static_cast<std::uint32_t>(n - 1);
    result.clamped = true;
  }
  result.k_effective = k;

  const Manifold manifold = vertices.spec.kind;
  std::vector<std::vector<std::uint64_t>> selected(n);
  detail::parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
    std::vector<Candidate> cand;
    cand.reserve(n - 1);
    for (std::size_t i = begin; i < end; ++i) {
      cand.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        cand.push_back({distance(vertices.elements[i], vertices.elements[j], metric, manifold), j});
      }
      select_neighbors(cand, k, selected[i]);
    }
  });

  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : selected[i]) pairs.emplace_back(std::min<std::uint64_t>(i, j), std::max<std::uint64_t>(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  result.edges.resize(pairs.size());
  detail::parallel_chunks(pairs.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const auto [i, j] = pairs[e];
      result.edges[e] = {i, j, distance(vertices.elements[i], vertices.elements[j], metric, manifold)};
    }
  });
  return result;
}

double bandwidth_from_distances(std::span<const double> distances) {
  if (distances.empty()) throw ArgumentError("bandwidth: graph has no edges");
  double sum = 0.0;
  for (double d : distances) sum += d * d;
  return 0.2 * sum / static_cast<double>(distances.size());
}

double bandwidth(std::span<const Edge> edges) {
  std::vector<double> d;
  d.reserve(edges.size());
  for (const auto& e : edges) d.push_back(e.distance);
  return bandwidth_from_distances(d);
}

double gaussian_weight(double distance, double t) {
  if (!(t > 0.0)) throw ArgumentError("gaussian_weight: bandwidth must be positive");
  return std::exp(-distance * distance / (4.0 * t));
}

std::vector<double> gaussian_weights(std::span<const Edge> edges, double t) {
  std::vector<double> w;
  w.reserve(edges.size());
  for (const auto& e : edges) w.push_back(gaussian_weight(e.distance, t));
  return w;
}

std::uint32_t default_knn(Manifold kind) { return has_orientation_axis(kind) ? 16 : 8; }

std::vector<Edge> ManifoldGraph::edge_list() const {
  std::vector<Edge> edges;
  edges.reserve(edge_count());
  for (std::size_t i = 0; i < adjacency.n; ++i) {
    for (auto k = adjacency.row_begin(i); k < adjacency.row_end(i); ++k) {
      if (adjacency.cols[k] > i) edges.push_back({i, adjacency.cols[k], distances[k]});
    }
  }
  return edges;
}

ManifoldGraph assemble_graph(VertexSet vertices, std::span<const Edge> edges, const Metric& metric,
                             double alpha, std::uint32_t knn, double t, GraphMetadata meta) {
  const std::size_t n = vertices.size();
  std::vector<Triplet> w;
  std::vector<Triplet> d;
  w.reserve(2 * edges.size());
  d.reserve(2 * edges.size());
  for (const auto& e : edges) {
    if (e.i == e.j) throw ArgumentError("graph: self-loops are not allowed");
    if (e.i >= n || e.j >= n) throw ShapeError("graph: edge endpoint out of range");
    const double weight = gaussian_weight(e.distance, t);
    w.push_back({e.i, e.j, weight});
    w.push_back({e.j, e.i, weight});
    d.push_back({e.i, e.j, e.distance});
    d.push_back({e.j, e.i, e.distance});
  }
  ManifoldGraph g;
  g.vertices = std::move(vertices);
  g.adjacency = CsrMatrix::from_triplets(n, std::move(w));
  g.distances = CsrMatrix::from_triplets(n, std::move(d)).values;
  if (g.distances.size() != g.adjacency.nnz()) throw ArgumentError("graph: duplicate edges");
  g.metric = metric;
  g.alpha = alpha;
  g.knn = knn;
  g.bandwidth = t;
  g.meta = std::move(meta);
  return g;
}

ManifoldGraph build_graph(const VertexSet& vertices, const GraphConfig& config) {
  KnnResult knn = knn_edges(vertices, config.metric, config.knn);
  const double t = bandwidth(knn.edges);
  GraphMetadata meta;
  meta.knn_clamped = knn.clamped;
  meta.knn_effective = knn.k_effective;
  return assemble_graph(vertices, knn.edges, config.metric, config.alpha, config.knn, t,
                        std::move(meta));
}

NeighborRatio neighbor_ratio(const ManifoldGraph& g) {
  const std::size_t vs = g.vertices.spec.spatial_count();
  std::size_t same = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < g.adjacency.n; ++i) {
    const auto oi = g.source_id(i) / vs;
    for (auto k = g.adjacency.row_begin(i); k < g.adjacency.row_end(i); ++k) {
      if (g.source_id(g.adjacency.cols[k]) / vs == oi) ++same;
      ++total;
    }
  }
  if (total == 0) return {};
  const double in = static_cast<double>(same) / static_cast<double>(total);
  return {in, 1.0 - in};
}

Laplacian laplacian(const CsrMatrix& a) {
  const std::size_t n = a.n;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto k = a.row_begin(i); k < a.row_end(i); ++k) {
      if (a.cols[k] == i) throw ArgumentError("laplacian: adjacency has a self-loop");
      deg[i] += a.values[k];
    }
  }

  Laplacian l;
  CsrMatrix& m = l.matrix;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.cols.reserve(a.nnz() + n);
  m.values.reserve(a.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diag_done = false;
    auto emit_diag = [&] {
      m.cols.push_back(i);
      m.values.push_back(deg[i] > 0.0 ? 1.0 : 0.0);
      diag_done = true;
    };
    for (auto k = a.row_begin(i); k < a.row_end(i); ++k) {
      const auto j = a.cols[k];
      if (!diag_done && j > i) emit_diag();
      m.cols.push_back(j);
      m.values.push_back(-a.values[k] / std::sqrt(deg[i] * deg[j]));
    }
    if (!diag_done) emit_diag();
    m.row_ptr[i + 1] = m.cols.size();
  }
  return l;
}

Laplacian laplacian(const ManifoldGraph& g) { return laplacian(g.adjacency); }

LambdaMaxEstimate lambda_max(const Laplacian& l, const LambdaMaxOptions& options) {
  if (l.rescaled) throw StateError("lambda_max: expects an unrescaled Laplacian");
  LambdaMaxEstimate est;
  if (options.fast || l.size() == 0) return est;

  const auto n = static_cast<Eigen::Index>(l.size());
  Eigen::MatrixXd x(n, 1);
  CounterRng rng(options.seed);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = rng.uniform(-1.0, 1.0);
  x /= x.norm();

  Eigen::MatrixXd y(n, 1);
  double rho_prev = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    l.matrix.multiply_into(x, y);
    const double rho = x.col(0).dot(y.col(0));
    const double norm = y.norm();
    est.iterations = it;
    if (norm == 0.0) {
      // Zero Laplacian (edgeless graph): any positive value rescales to -I.
      est.value = 2.0;
      return est;
    }
    x = y / norm;
    if (it > 1 && std::abs(rho - rho_prev) <= options.tol * std::abs(rho)) {
      est.value = std::clamp(rho, std::numeric_limits<double>::min(), 2.0);
      return est;
    }
    rho_prev = rho;
  }
  est.value = 2.0;
  est.converged = false;
  return est;
}

Laplacian rescale(const Laplacian& l, double lambda_max) {
  if (l.rescaled) throw StateError("rescale: Laplacian is already rescaled");
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw ArgumentError("rescale: lambda_max must be positive");
  }
  const double s = 2.0 / lambda_max;
  std::vector<Triplet> t;
  t.reserve(l.matrix.nnz() + l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    for (auto k = l.matrix.row_begin(i); k < l.matrix.row_end(i); ++k) {
      t.push_back({i, l.matrix.cols[k], s * l.matrix.values[k]});
    }
    t.push_back({i, i, -1.0});
  }
  Laplacian out;
  out.matrix = CsrMatrix::from_triplets(l.size(), std::move(t));
  out.lambda_max = lambda_max;
  out.rescaled = true;
  return out;
}

std::vector<double> edge_keep_probabilities(std::span<const double> weights, double kappa) {
  if (!(kappa > 0.0) || kappa > 1.0) throw ArgumentError("sample_edges: rate must be in (0, 1]");
  std::vector<double> p(weights.size(), 1.0);
  if (weights.empty() || kappa == 1.0) return p;

  const double target = kappa * static_cast<double>(weights.size());
  const double w_min = *std::min_element(weights.begin(), weights.end());
  if (!(w_min > 0.0)) throw ArgumentError("sample_edges: weights must be positive");
  auto total = [&](double c) {
    double s = 0.0;
    for (double w : weights) s += std::min(1.0, c * w);
    return s;
  };
  double lo = 0.0;
  double hi = 1.0 / w_min;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < target ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  for (std::size_t k = 0; k < weights.size(); ++k) p[k] = std::min(1.0, c * weights[k]);
  return p;
}

ManifoldGraph sample_edges(const ManifoldGraph& g, double kappa, std::uint64_t seed) {
  const auto edges = g.edge_list();
  std::vector<double> weights;
  weights.reserve(edges.size());
  for (std::size_t i = 0; i < g.adjacency.n; ++i) {
    for (auto k = g.adjacency.row_begin(i); k < g.adjacency.row_end(i); ++k) {
      if (g.adjacency.cols[k] > i) weights.push_back(g.adjacency.values[k]);
    }
  }
  const auto p = edge_keep_probabilities(weights, kappa);

  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (p[k] >= 1.0 || CounterRng::uniform_at(seed, k) < p[k]) kept.push_back(edges[k]);
  }
  GraphMetadata meta = g.meta;
  meta.edge_rate *= kappa;
  return rebuild(g, g.vertices, kept, std::move(meta));
}

ManifoldGraph sample_vertices(const ManifoldGraph& g, double kappa, std::uint64_t seed) {
  if (!(kappa > 0.0) || kappa > 1.0) throw ArgumentError("sample_vertices: rate must be in (0, 1]");
  const std::size_t n = g.vertex_count();
  const auto m = static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(n) - 1e-9));
  if (m == 0) throw ArgumentError("sample_vertices: no vertices would remain");

  std::vector<std::uint64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + rng.below(n - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());

  std::vector<std::int64_t> new_id(n, -1);
  for (std::size_t k = 0; k < m; ++k) new_id[ids[k]] = static_cast<std::int64_t>(k);

  VertexSet vs;
  vs.spec = g.vertices.spec;
  vs.elements.reserve(m);
  GraphMetadata meta = g.meta;
  meta.id_map.clear();
  for (auto old : ids) {
    vs.elements.push_back(g.vertices.elements[old]);
    meta.id_map.push_back(g.source_id(old));
  }
  meta.vertex_rate *= kappa;

  std::vector<Edge> kept;
  for (const auto& e : g.edge_list()) {
    if (new_id[e.i] >= 0 && new_id[e.j] >= 0) {
      kept.push_back({static_cast<std::uint64_t>(new_id[e.i]),
                      static_cast<std::uint64_t>(new_id[e.j]), e.distance});
    }
  }
  return rebuild(g, std::move(vs), kept, std::move(meta));
}

}  // namespace anisograph
