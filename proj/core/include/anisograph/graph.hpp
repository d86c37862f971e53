#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisograph/lie_group.hpp"
#include "anisograph/sampling.hpp"
#include "anisograph/sparse.hpp"

namespace anisograph {

/// Undirected edge, i < j, with its cached Riemannian distance.
struct Edge {
  std::uint64_t i;
  std::uint64_t j;
  double distance;
};

/// sqrt(alpha * n_orient / n_spatial), i.e. xi^2 = alpha |V_o| / |V_s|.
double xi_from_alpha(double alpha, std::size_t n_orient, std::size_t n_spatial);

struct KnnResult {
  std::vector<Edge> edges;  ///< sorted by (i, j), unique
  std::uint32_t k_requested = 0;
  std::uint32_t k_effective = 0;
  bool clamped = false;  ///< K >= |V| was reduced to |V| - 1
};

/// Relative tolerance under which two distances from one vertex count as tied.
inline constexpr double kKnnTieTolerance = 1e-9;

/// K-nearest-neighbor edges under `distance`, symmetrized by union.
///
/// Each vertex selects at most K neighbors. Distances within
/// kKnnTieTolerance (relative) of the K-th smallest form a tie group; if that
/// group would overflow K it is dropped entirely, so the selection never
/// depends on vertex numbering. When even the nearest group overflows K, the
/// nearest group is kept so no vertex is left without neighbors.
/// Throws ArgumentError if K == 0 or |V| < 2.
KnnResult knn_edges(const VertexSet& vertices, const Metric& metric, std::uint32_t k);

/// 0.2 * mean(d^2) over unique undirected edges. Throws ArgumentError on an
/// empty edge set.
double bandwidth(std::span<const Edge> edges);
double bandwidth_from_distances(std::span<const double> distances);

/// exp(-d^2 / (4 t)).
double gaussian_weight(double distance, double t);
std::vector<double> gaussian_weights(std::span<const Edge> edges, double t);

struct GraphConfig {
  Metric metric;
  /// Recorded alongside the metric; 0 when xi was given directly.
  double alpha = 0.0;
  std::uint32_t knn = 16;
};

/// Default K: 16 for lifted graphs, 8 for base-space graphs.
std::uint32_t default_knn(Manifold kind);

struct GraphMetadata {
  bool knn_clamped = false;
  std::uint32_t knn_effective = 0;
  /// Compacted id -> id in the originating complete grid. Empty means identity.
  std::vector<std::uint64_t> id_map;
  double edge_rate = 1.0;
  double vertex_rate = 1.0;
};

/// Vertices plus symmetric CSR adjacency. `distances` runs parallel to
/// `adjacency.values`.
struct ManifoldGraph {
  VertexSet vertices;
  CsrMatrix adjacency;
  std::vector<double> distances;
  Metric metric;
  double alpha = 0.0;
  std::uint32_t knn = 0;
  double bandwidth = 0.0;
  GraphMetadata meta;

  Manifold kind() const noexcept { return vertices.spec.kind; }
  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t edge_count() const noexcept { return adjacency.nnz() / 2; }
  /// Unique undirected edges (i < j) in row-major order.
  std::vector<Edge> edge_list() const;
  std::size_t degree(std::size_t v) const { return adjacency.row_end(v) - adjacency.row_begin(v); }
  /// Id of vertex v in the complete grid it was sampled from.
  std::uint64_t source_id(std::size_t v) const { return meta.id_map.empty() ? v : meta.id_map[v]; }
};

/// Builds the symmetric adjacency from an edge list: w = exp(-d^2 / 4t) stored
/// once and mirrored.
ManifoldGraph assemble_graph(VertexSet vertices, std::span<const Edge> edges, const Metric& metric,
                             double alpha, std::uint32_t knn, double t, GraphMetadata meta = {});

/// Full pipeline: K-NN edges, 20% bandwidth heuristic, Gaussian weights.
ManifoldGraph build_graph(const VertexSet& vertices, const GraphConfig& config);

/// Fraction of directed neighbor relations that stay in the same
/// orientation slice. Only meaningful on SE2/SO3 graphs.
struct NeighborRatio {
  double in_slice = 0.0;
  double cross_slice = 0.0;
};
NeighborRatio neighbor_ratio(const ManifoldGraph& g);

/// Symmetric normalized Laplacian, or its rescaled form 2/lambda_max * L - I.
struct Laplacian {
  CsrMatrix matrix;
  double lambda_max = 0.0;  ///< 0 until estimated
  bool rescaled = false;

  std::size_t size() const noexcept { return matrix.n; }
};

/// L_ii = 1 if deg(i) > 0 else 0, L_ij = -w_ij / sqrt(deg_i deg_j).
/// Diagonal entries are always stored (explicit zeros for isolated vertices).
Laplacian laplacian(const CsrMatrix& adjacency);
Laplacian laplacian(const ManifoldGraph& g);

struct LambdaMaxOptions {
  double tol = 1e-6;
  int max_iterations = 1000;
  /// Skip the estimate and return 2.0.
  bool fast = false;
  std::uint64_t seed = 0x6c616d626461ULL;
};

struct LambdaMaxEstimate {
  double value = 2.0;
  int iterations = 0;
  bool converged = true;  ///< false means the 2.0 fallback was returned
};

/// Power-iteration estimate of the largest eigenvalue, clamped to (0, 2].
/// Throws StateError on a rescaled Laplacian.
LambdaMaxEstimate lambda_max(const Laplacian& l, const LambdaMaxOptions& options = {});

/// 2/lambda_max * L - I. Throws ArgumentError if lambda_max <= 0 and
/// StateError if `l` is already rescaled.
Laplacian rescale(const Laplacian& l, double lambda_max);

/// Keep probabilities min(1, c w) for each weight, with c chosen by bisection
/// so that they sum to kappa * |E|.
std::vector<double> edge_keep_probabilities(std::span<const double> weights, double kappa);

/// Weight-biased random edge subsampling with expected kept fraction kappa.
/// Edge k (row-major order of edge_list()) survives iff
/// CounterRng::uniform_at(seed, k) < p_k. Throws ArgumentError unless
/// 0 < kappa <= 1.
ManifoldGraph sample_edges(const ManifoldGraph& g, double kappa, std::uint64_t seed);

/// Keeps a uniform random subset of ceil(kappa |V|) vertices (partial
/// Fisher-Yates), drops edges touching removed vertices and compacts ids.
ManifoldGraph sample_vertices(const ManifoldGraph& g, double kappa, std::uint64_t seed);

/// Contents of a CLGR container.
struct GraphFile {
  ManifoldGraph graph;
  std::optional<Laplacian> laplacian;
};

/// CLGR little-endian container; see README for the byte layout.
std::vector<std::uint8_t> serialize_graph(const ManifoldGraph& g, const Laplacian* lap = nullptr);
/// Throws FormatError on bad magic, unsupported version, truncation or
/// inconsistent contents.
GraphFile deserialize_graph(std::span<const std::uint8_t> bytes);

void save_graph(const std::string& path, const ManifoldGraph& g, const Laplacian* lap = nullptr);
GraphFile load_graph(const std::string& path);

}  // namespace anisograph
