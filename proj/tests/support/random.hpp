#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "anisograph/lie_group.hpp"
#include "anisograph/rng.hpp"

namespace oracle {

inline anisograph::GroupElement random_se2(anisograph::CounterRng& rng, double extent = 2.0) {
  return anisograph::GroupElement::se2(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                                       rng.uniform(-std::numbers::pi, std::numbers::pi));
}

/// Haar-distributed rotation from a normalized Gaussian quaternion.
inline anisograph::GroupElement random_so3(anisograph::CounterRng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return anisograph::GroupElement::from_matrix(anisograph::GroupKind::SO3, q.toRotationMatrix());
}

inline anisograph::GroupElement random_element(anisograph::GroupKind kind, anisograph::CounterRng& rng) {
  return kind == anisograph::GroupKind::SE2 ? random_se2(rng) : random_so3(rng);
}

}  // namespace oracle
