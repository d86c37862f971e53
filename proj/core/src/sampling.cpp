#include "anisograph/sampling.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "anisograph/error.hpp"

namespace anisograph {
namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

IcosahedralMesh base_icosahedron() {
  IcosahedralMesh mesh;
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  mesh.points.emplace_back(0.0, 0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double phi = 2.0 * kPi * k / 5.0;
    mesh.points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  for (int k = 0; k < 5; ++k) {
    const double phi = 2.0 * kPi * k / 5.0 + kPi / 5.0;
    mesh.points.emplace_back(r * std::cos(phi), r * std::sin(phi), -z);
  }
  mesh.points.emplace_back(0.0, 0.0, -1.0);

  auto upper = [](int k) { return static_cast<std::uint32_t>(1 + (k % 5)); };
  auto lower = [](int k) { return static_cast<std::uint32_t>(6 + (k % 5)); };
  for (int k = 0; k < 5; ++k) {
    mesh.faces.push_back({0, upper(k), upper(k + 1)});
    mesh.faces.push_back({upper(k), lower(k), upper(k + 1)});
    mesh.faces.push_back({lower(k), lower(k + 1), upper(k + 1)});
    mesh.faces.push_back({11, lower(k + 1), lower(k)});
  }
  return mesh;
}

}  // namespace

std::size_t GridSpec::spatial_count() const {
  switch (kind) {
    case Manifold::SE2:
    case Manifold::R2:
      return static_cast<std::size_t>(nx) * ny;
    case Manifold::SO3:
    case Manifold::S2:
      return icosahedral_count(level);
  }
  return 0;
}

void GridSpec::validate() const {
  if (kind == Manifold::SE2 || kind == Manifold::R2) {
    if (nx == 0 || ny == 0) throw ArgumentError("grid: nx and ny must be >= 1");
  }
  if (n_orient == 0) throw ArgumentError("grid: n_orient must be >= 1");
  if (!has_orientation_axis(kind) && n_orient != 1) {
    throw ArgumentError("grid: isotropic base spaces have exactly one orientation");
  }
  if ((kind == Manifold::SO3 || kind == Manifold::S2) && level > 12) {
    throw ArgumentError("grid: icosahedral level above 12 is not supported");
  }
}

std::size_t icosahedral_count(std::uint32_t level) {
  return 10 * (std::size_t{1} << (2 * level)) + 2;
}

std::size_t VertexSet::flat_id(std::size_t spatial_index, std::size_t orient_index) const {
  if (!complete()) throw StateError("vertex set is not a complete grid");
  return orient_index * spec.spatial_count() + spatial_index;
}

std::size_t VertexSet::spatial_index(std::size_t flat) const {
  if (!complete()) throw StateError("vertex set is not a complete grid");
  return flat % spec.spatial_count();
}

std::size_t VertexSet::orient_index(std::size_t flat) const {
  if (!complete()) throw StateError("vertex set is not a complete grid");
  return flat / spec.spatial_count();
}

double VertexSet::orientation(std::size_t orient_index) const {
  return -0.5 * kPi + static_cast<double>(orient_index) * kPi / spec.n_orient;
}

std::vector<double> orientation_samples(std::uint32_t n_orient) {
  std::vector<double> out(n_orient);
  for (std::uint32_t k = 0; k < n_orient; ++k) out[k] = -0.5 * kPi + k * kPi / n_orient;
  return out;
}

VertexSet grid_se2(std::uint32_t nx, std::uint32_t ny, std::uint32_t n_orient) {
  VertexSet vs;
  vs.spec = GridSpec{Manifold::SE2, nx, ny, 0, n_orient};
  vs.spec.validate();
  vs.elements.reserve(vs.spec.vertex_count());
  for (double theta : orientation_samples(n_orient)) {
    for (std::uint32_t iy = 0; iy < ny; ++iy) {
      for (std::uint32_t ix = 0; ix < nx; ++ix) {
        vs.elements.push_back(GroupElement::se2(static_cast<double>(ix) / nx,
                                                static_cast<double>(iy) / ny, theta));
      }
    }
  }
  return vs;
}

VertexSet grid_r2(std::uint32_t nx, std::uint32_t ny) {
  VertexSet vs = grid_se2(nx, ny, 1);
  vs.spec.kind = Manifold::R2;
  return vs;
}

IcosahedralMesh icosahedral_mesh(std::uint32_t level) {
  GridSpec{Manifold::S2, 1, 1, level, 1}.validate();
  IcosahedralMesh mesh = base_icosahedron();
  for (std::uint32_t l = 0; l < level; ++l) {
    std::unordered_map<std::uint64_t, std::uint32_t> midpoints;
    midpoints.reserve(mesh.faces.size() * 2);
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = edge_key(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(mesh.points.size());
      mesh.points.push_back((mesh.points[a] + mesh.points[b]).normalized());
      mesh.midpoint_parents.push_back({std::min(a, b), std::max(a, b)});
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> faces;
    faces.reserve(mesh.faces.size() * 4);
    for (const auto& [a, b, c] : mesh.faces) {
      const auto ab = midpoint(a, b);
      const auto bc = midpoint(b, c);
      const auto ca = midpoint(c, a);
      faces.push_back({a, ab, ca});
      faces.push_back({b, bc, ab});
      faces.push_back({c, ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
    mesh.level = l + 1;
  }
  return mesh;
}

std::vector<Eigen::Vector3d> icosahedral_sphere(std::uint32_t level) {
  return icosahedral_mesh(level).points;
}

std::array<double, 2> sphere_angles(const Eigen::Vector3d& p) {
  const double rho = std::hypot(p.x(), p.y());
  const double beta = std::atan2(rho, p.z());
  const double gamma = rho < 1e-12 ? 0.0 : std::atan2(p.y(), p.x());
  return {beta, gamma};
}

VertexSet grid_so3(std::uint32_t level, std::uint32_t n_orient) {
  VertexSet vs;
  vs.spec = GridSpec{Manifold::SO3, 1, 1, level, n_orient};
  vs.spec.validate();
  const auto points = icosahedral_sphere(level);
  vs.elements.reserve(points.size() * n_orient);
  for (double alpha : orientation_samples(n_orient)) {
    for (const auto& p : points) {
      const auto [beta, gamma] = sphere_angles(p);
      vs.elements.push_back(GroupElement::so3(alpha, beta, gamma));
    }
  }
  return vs;
}

VertexSet grid_s2(std::uint32_t level) {
  VertexSet vs = grid_so3(level, 1);
  vs.spec.kind = Manifold::S2;
  return vs;
}

VertexSet make_vertices(const GridSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case Manifold::SE2: return grid_se2(spec.nx, spec.ny, spec.n_orient);
    case Manifold::R2: return grid_r2(spec.nx, spec.ny);
    case Manifold::SO3: return grid_so3(spec.level, spec.n_orient);
    case Manifold::S2: return grid_s2(spec.level);
  }
  throw ArgumentError("grid: unknown manifold kind");
}

}  // namespace anisograph
