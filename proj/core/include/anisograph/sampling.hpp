#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "anisograph/lie_group.hpp"

namespace anisograph {

/// Resolution of a grid on one of the four manifolds.
///
/// SE2/R2 use nx, ny (spatial) and SO3/S2 use the icosahedral `level`.
/// R2 and S2 always have n_orient == 1.
struct GridSpec {
  Manifold kind = Manifold::SE2;
  std::uint32_t nx = 1;
  std::uint32_t ny = 1;
  std::uint32_t level = 0;
  std::uint32_t n_orient = 1;

  std::size_t spatial_count() const;
  std::size_t vertex_count() const { return spatial_count() * n_orient; }
  /// Throws ArgumentError if a dimension is zero or R2/S2 has n_orient != 1.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Number of points of the icosahedral sphere at `level`: 10 * 4^level + 2.
std::size_t icosahedral_count(std::uint32_t level);

/// Ordered vertices of a graph plus the grid they came from.
///
/// For a complete grid, flat id = orientation_index * |V_s| + spatial_index.
/// On SE2/R2 grids spatial_index = iy * nx + ix. Sub-sampled sets keep the
/// originating spec but are no longer complete, and the index helpers throw.
struct VertexSet {
  GridSpec spec;
  std::vector<GroupElement> elements;

  std::size_t size() const noexcept { return elements.size(); }
  bool complete() const noexcept { return elements.size() == spec.vertex_count(); }

  std::size_t flat_id(std::size_t spatial_index, std::size_t orient_index) const;
  std::size_t spatial_index(std::size_t flat) const;
  std::size_t orient_index(std::size_t flat) const;
  /// Orientation angle of slice k: -pi/2 + k * pi / n_orient.
  double orientation(std::size_t orient_index) const;
};

/// Orientation samples -pi/2 + k * pi / n, k = 0..n-1.
std::vector<double> orientation_samples(std::uint32_t n_orient);

/// Regular grid x_i = i/nx, y_j = j/ny on [0,1)^2, lifted over n_orient
/// orientations in [-pi/2, pi/2).
VertexSet grid_se2(std::uint32_t nx, std::uint32_t ny, std::uint32_t n_orient);
VertexSet grid_r2(std::uint32_t nx, std::uint32_t ny);

/// Icosahedral sphere built by repeated edge-midpoint subdivision.
///
/// The base icosahedron has vertices at both poles. Level-(l-1) points keep
/// their ids at level l, so `points` of a coarser level are a prefix of the
/// finer one. `midpoint_parents[i]` gives the two coarser-level endpoints of
/// the edge whose midpoint created vertex 12 + i.
struct IcosahedralMesh {
  std::uint32_t level = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<std::array<std::uint32_t, 2>> midpoint_parents;
};

IcosahedralMesh icosahedral_mesh(std::uint32_t level);
std::vector<Eigen::Vector3d> icosahedral_sphere(std::uint32_t level);

/// ZYZ (beta, gamma) locating a unit vector: p = Rz(gamma) Ry(beta) e_z.
/// Poles get gamma = 0.
std::array<double, 2> sphere_angles(const Eigen::Vector3d& p);

VertexSet grid_so3(std::uint32_t level, std::uint32_t n_orient);
VertexSet grid_s2(std::uint32_t level);

VertexSet make_vertices(const GridSpec& spec);

}  // namespace anisograph
