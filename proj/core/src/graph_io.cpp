#include <fstream>
#include <iterator>

#include "anisograph/error.hpp"
#include "anisograph/graph.hpp"
#include "binary_io.hpp"

namespace anisograph {
namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace detail

namespace {

constexpr std::string_view kGraphMagic = "CLGR";
constexpr std::string_view kLaplacianMagic = "LAPL";
constexpr std::uint32_t kGraphVersion = 1;

void write_csr(detail::ByteWriter& w, const CsrMatrix& m) {
  w.u64s(m.row_ptr);
  w.u64(m.nnz());
}

CsrMatrix read_csr_structure(detail::ByteReader& r, std::uint64_t n, std::vector<double>* second) {
  CsrMatrix m;
  m.n = n;
  const auto at = r.position();
  m.row_ptr = r.u64s(n + 1);
  const auto nnz = r.u64();
  m.cols = r.u64s(nnz);
  m.values = r.f64s(nnz);
  if (second) *second = r.f64s(nnz);
  if (!m.is_well_formed()) throw FormatError("malformed CSR section", at);
  return m;
}

}  // namespace

std::vector<std::uint8_t> serialize_graph(const ManifoldGraph& g, const Laplacian* lap) {
  detail::ByteWriter w;
  w.magic(kGraphMagic);
  w.u32(kGraphVersion);
  const auto& spec = g.vertices.spec;
  w.u8(static_cast<std::uint8_t>(spec.kind));
  w.u32(spec.nx);
  w.u32(spec.ny);
  w.u32(spec.level);
  w.u32(spec.n_orient);
  w.f64(g.metric.epsilon());
  w.f64(g.metric.xi());
  w.f64(g.alpha);
  w.u32(g.knn);
  w.f64(g.bandwidth);
  w.u64(g.vertex_count());
  for (const auto& v : g.vertices.elements) {
    w.f64(v.params()[0]);
    w.f64(v.params()[1]);
    w.f64(v.params()[2]);
  }
  write_csr(w, g.adjacency);
  w.u64s(g.adjacency.cols);
  w.f64s(g.adjacency.values);
  w.f64s(g.distances);

  if (lap) {
    if (lap->size() != g.vertex_count()) throw ShapeError("serialize: Laplacian size mismatch");
    w.magic(kLaplacianMagic);
    w.u8(lap->rescaled ? 1 : 0);
    write_csr(w, lap->matrix);
    w.u64s(lap->matrix.cols);
    w.f64s(lap->matrix.values);
    w.f64(lap->lambda_max);
  }
  return w.take();
}

GraphFile deserialize_graph(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kGraphMagic);
  r.expect_version(kGraphVersion);

  const auto kind_at = r.position();
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(Manifold::S2)) throw FormatError("unknown manifold kind", kind_at);
  GridSpec spec;
  spec.kind = static_cast<Manifold>(kind);
  spec.nx = r.u32();
  spec.ny = r.u32();
  spec.level = r.u32();
  spec.n_orient = r.u32();

  const auto metric_at = r.position();
  const double epsilon = r.f64();
  const double xi = r.f64();
  const double alpha = r.f64();
  const auto knn = r.u32();
  const double t = r.f64();
  const auto n = r.u64();

  GraphFile file;
  ManifoldGraph& g = file.graph;
  try {
    spec.validate();
    g.metric = Metric(epsilon, xi);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid header: ") + e.what(), metric_at);
  }
  g.vertices.spec = spec;
  g.alpha = alpha;
  g.knn = knn;
  g.bandwidth = t;

  const auto params_at = r.position();
  const auto params = r.f64s(3 * n);
  const GroupKind group = group_of(spec.kind);
  g.vertices.elements.reserve(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    const Eigen::Vector3d p(params[3 * v], params[3 * v + 1], params[3 * v + 2]);
    if (!p.allFinite()) throw FormatError("non-finite vertex parameters", params_at + 24 * v);
    g.vertices.elements.push_back(GroupElement::from_params(group, p));
  }
  const auto csr_at = r.position();
  g.adjacency = read_csr_structure(r, n, &g.distances);
  if (!g.adjacency.is_symmetric()) throw FormatError("adjacency is not symmetric", csr_at);

  if (!r.at_end()) {
    r.expect_magic(kLaplacianMagic);
    Laplacian lap;
    lap.rescaled = r.u8() != 0;
    lap.matrix = read_csr_structure(r, n, nullptr);
    lap.lambda_max = r.f64();
    file.laplacian = std::move(lap);
  }
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  return file;
}

void save_graph(const std::string& path, const ManifoldGraph& g, const Laplacian* lap) {
  detail::write_file(path, serialize_graph(g, lap));
}

GraphFile load_graph(const std::string& path) { return deserialize_graph(detail::read_file(path)); }

}  // namespace anisograph
