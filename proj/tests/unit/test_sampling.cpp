#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "anisograph/error.hpp"
#include "anisograph/sampling.hpp"

namespace ag = anisograph;
using std::numbers::pi;

TEST(GridSe2, Counts) {
  EXPECT_EQ(ag::grid_se2(28, 28, 6).size(), 4704u);
  EXPECT_EQ(ag::grid_se2(32, 32, 6).size(), 6144u);
  EXPECT_THROW(ag::grid_se2(0, 4, 4), ag::ArgumentError);
  EXPECT_THROW(ag::grid_se2(4, 4, 0), ag::ArgumentError);
}

TEST(GridSe2, SingleVertex) {
  const auto v = ag::grid_se2(1, 1, 1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v.elements[0].params(), Eigen::Vector3d(0, 0, -pi / 2));
}

TEST(GridSe2, LayoutAndRanges) {
  const auto v = ag::grid_se2(5, 3, 4);
  std::set<std::tuple<double, double, double>> seen;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t iy = 0; iy < 3; ++iy) {
      for (std::size_t ix = 0; ix < 5; ++ix) {
        const auto id = v.flat_id(iy * 5 + ix, k);
        EXPECT_EQ(id, k * 15 + iy * 5 + ix);
        EXPECT_EQ(v.orient_index(id), k);
        EXPECT_EQ(v.spatial_index(id), iy * 5 + ix);
        const auto& p = v.elements[id].params();
        EXPECT_DOUBLE_EQ(p[0], ix / 5.0);
        EXPECT_DOUBLE_EQ(p[1], iy / 3.0);
        EXPECT_DOUBLE_EQ(p[2], -pi / 2 + k * pi / 4);
        EXPECT_GE(p[2], -pi / 2);
        EXPECT_LT(p[2], pi / 2);
        seen.insert({p[0], p[1], p[2]});
      }
    }
  }
  EXPECT_EQ(seen.size(), v.size());
}

TEST(GridR2, IsSingleSlice) {
  const auto v = ag::grid_r2(4, 6);
  EXPECT_EQ(v.spec.kind, ag::Manifold::R2);
  EXPECT_EQ(v.size(), 24u);
  EXPECT_EQ(v.spec.n_orient, 1u);
}

TEST(Icosahedral, Counts) {
  EXPECT_EQ(ag::icosahedral_sphere(0).size(), 12u);
  EXPECT_EQ(ag::icosahedral_sphere(3).size(), 642u);
  EXPECT_EQ(ag::icosahedral_sphere(5).size(), 10242u);
  for (std::uint32_t l = 0; l <= 6; ++l) {
    EXPECT_EQ(ag::icosahedral_count(l), 10 * (std::size_t{1} << (2 * l)) + 2);
  }
  EXPECT_EQ(ag::icosahedral_mesh(6).points.size(), ag::icosahedral_count(6));
}

TEST(Icosahedral, UnitNormAndNesting) {
  const auto fine = ag::icosahedral_sphere(3);
  const auto coarse = ag::icosahedral_sphere(2);
  for (const auto& p : fine) EXPECT_NEAR(p.norm(), 1.0, 1e-12);
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_EQ(fine[i], coarse[i]);
}

TEST(Icosahedral, MeshIsClosedTriangulation) {
  const auto mesh = ag::icosahedral_mesh(2);
  // Euler characteristic V - E + F = 2 with E = 3F/2.
  const auto f = mesh.faces.size();
  EXPECT_EQ(mesh.points.size() + f - 3 * f / 2, 2u);
  EXPECT_EQ(mesh.midpoint_parents.size(), mesh.points.size() - 12);
}

TEST(GridSo3, CountsAndOrientations) {
  EXPECT_EQ(ag::grid_so3(5, 6).size(), 61452u);
  const auto v = ag::grid_so3(0, 1);
  ASSERT_EQ(v.size(), 12u);
  for (const auto& g : v.elements) EXPECT_DOUBLE_EQ(g.params()[0], -pi / 2);
}

TEST(GridSo3, ElementsLocateSpherePoints) {
  const auto v = ag::grid_so3(2, 3);
  const auto pts = ag::icosahedral_sphere(2);
  const Eigen::Vector3d ez(0, 0, 1);
  for (std::size_t id = 0; id < v.size(); ++id) {
    const auto& g = v.elements[id];
    EXPECT_LE((g.matrix() * ez - pts[v.spatial_index(id)]).norm(), 1e-12);
    EXPECT_LE((g.matrix() * g.matrix().transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-10);
    EXPECT_DOUBLE_EQ(g.params()[0], -pi / 2 + v.orient_index(id) * pi / 3);
  }
}

TEST(GridSo3, PolesUseGammaZero) {
  const auto v = ag::grid_s2(1);
  int poles = 0;
  for (const auto& g : v.elements) {
    const double beta = g.params()[1];
    if (beta < 1e-12 || beta > pi - 1e-12) {
      ++poles;
      EXPECT_EQ(g.params()[2], 0.0);
    }
  }
  EXPECT_EQ(poles, 2);
}

TEST(GridSpec, Validation) {
  EXPECT_THROW((ag::GridSpec{ag::Manifold::R2, 4, 4, 0, 2}.validate()), ag::ArgumentError);
  EXPECT_THROW((ag::GridSpec{ag::Manifold::S2, 1, 1, 0, 3}.validate()), ag::ArgumentError);
  EXPECT_NO_THROW((ag::GridSpec{ag::Manifold::SO3, 1, 1, 2, 3}.validate()));
  EXPECT_EQ(ag::make_vertices(ag::GridSpec{ag::Manifold::SO3, 1, 1, 1, 2}).size(), 84u);
}
