#include "anisograph/lie_group.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anisograph/error.hpp"

namespace anisograph {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSmallAngle = 1e-6;
constexpr double kNearPiTrace = 1e-8;
constexpr double kPoleTolerance = 1e-12;

// theta/2 * cot(theta/2), with the Laurent series below the switch angle.
double half_cot_half(double theta) {
  if (std::abs(theta) < kSmallAngle) {
    const double t2 = theta * theta;
    return 1.0 - t2 / 12.0 - t2 * t2 / 720.0;
  }
  const double half = 0.5 * theta;
  return half * std::cos(half) / std::sin(half);
}

AlgebraVector se2_log_params(double x, double y, double theta) {
  const double k = half_cot_half(theta);
  const double half = 0.5 * theta;
  return {half * y + k * x, -half * x + k * y, theta};
}

Eigen::Vector3d so3_params_from_matrix(const Eigen::Matrix3d& m) {
  // G = Rz(gamma) Ry(beta) Rz(alpha):
  //   G e_z = (cos(gamma) sin(beta), sin(gamma) sin(beta), cos(beta))
  //   e_z^T G = (-sin(beta) cos(alpha), sin(beta) sin(alpha), cos(beta))
  const double sb = std::hypot(m(0, 2), m(1, 2));
  const double beta = std::atan2(sb, m(2, 2));
  double alpha = 0.0;
  double gamma = 0.0;
  if (sb < kPoleTolerance) {
    // Pole gauge: gamma = 0, all rotation about z goes to alpha.
    if (m(2, 2) > 0.0) {
      alpha = std::atan2(m(1, 0), m(0, 0));
    } else {
      alpha = std::atan2(m(1, 0), m(1, 1));
    }
  } else {
    gamma = std::atan2(m(1, 2), m(0, 2));
    alpha = std::atan2(m(2, 1), -m(2, 0));
  }
  return {wrap_angle(alpha), beta, wrap_angle(gamma)};
}

}  // namespace

GroupKind group_of(Manifold m) noexcept {
  return (m == Manifold::SE2 || m == Manifold::R2) ? GroupKind::SE2 : GroupKind::SO3;
}

bool has_orientation_axis(Manifold m) noexcept {
  return m == Manifold::SE2 || m == Manifold::SO3;
}

const char* to_string(Manifold m) noexcept {
  switch (m) {
    case Manifold::SE2: return "se2";
    case Manifold::SO3: return "so3";
    case Manifold::R2: return "r2";
    case Manifold::S2: return "s2";
  }
  return "?";
}

double wrap_angle(double a) noexcept {
  double r = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  if (r >= kPi) r -= 2.0 * kPi;
  if (r < -kPi) r += 2.0 * kPi;
  return r;
}

Eigen::Matrix3d rot_z(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_y(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Eigen::Matrix3d hat(GroupKind kind, const AlgebraVector& u) {
  const double c1 = u[0];
  const double c2 = u[1];
  const double c3 = u[2];
  Eigen::Matrix3d a;
  if (kind == GroupKind::SE2) {
    a << 0, -c3, c1, c3, 0, c2, 0, 0, 0;
  } else {
    a << 0, -c2, c1, c2, 0, -c3, -c1, c3, 0;
  }
  return a;
}

AlgebraVector vee(GroupKind kind, const Eigen::Matrix3d& a) {
  if (kind == GroupKind::SE2) return {a(0, 2), a(1, 2), a(1, 0)};
  return {a(0, 2), a(1, 0), a(2, 1)};
}

GroupElement GroupElement::se2(double x, double y, double theta) {
  const double t = wrap_angle(theta);
  Eigen::Matrix3d m = rot_z(t);
  m(0, 2) = x;
  m(1, 2) = y;
  return GroupElement(GroupKind::SE2, Eigen::Vector3d(x, y, t), m);
}

GroupElement GroupElement::so3(double alpha, double beta, double gamma) {
  const Eigen::Matrix3d m = rot_z(gamma) * rot_y(beta) * rot_z(alpha);
  return GroupElement(GroupKind::SO3, so3_params_from_matrix(m), m);
}

GroupElement GroupElement::from_params(GroupKind kind, const Eigen::Vector3d& params) {
  if (!params.allFinite()) throw ArgumentError("group element: non-finite parameters");
  if (kind == GroupKind::SE2) {
    Eigen::Matrix3d m = rot_z(params[2]);
    m(0, 2) = params[0];
    m(1, 2) = params[1];
    return GroupElement(kind, params, m);
  }
  return GroupElement(kind, params, rot_z(params[2]) * rot_y(params[1]) * rot_z(params[0]));
}

GroupElement GroupElement::identity(GroupKind kind) {
  return GroupElement(kind, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity());
}

GroupElement GroupElement::from_matrix(GroupKind kind, const Eigen::Matrix3d& m) {
  if (kind == GroupKind::SE2) {
    Eigen::Matrix3d clean = m;
    clean.row(2) << 0, 0, 1;
    const double theta = wrap_angle(std::atan2(m(1, 0), m(0, 0)));
    return GroupElement(kind, Eigen::Vector3d(m(0, 2), m(1, 2), theta), clean);
  }
  return GroupElement(kind, so3_params_from_matrix(m), m);
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  if (g.kind() != h.kind()) {
    throw KindMismatchError("compose: cannot combine SE(2) and SO(3) elements");
  }
  return GroupElement::from_matrix(g.kind(), g.matrix() * h.matrix());
}

GroupElement inverse(const GroupElement& g) {
  if (g.kind() == GroupKind::SO3) {
    return GroupElement::from_matrix(GroupKind::SO3, g.matrix().transpose());
  }
  const Eigen::Matrix2d rt = g.matrix().topLeftCorner<2, 2>().transpose();
  Eigen::Matrix3d inv = Eigen::Matrix3d::Identity();
  inv.topLeftCorner<2, 2>() = rt;
  inv.topRightCorner<2, 1>() = -rt * g.matrix().topRightCorner<2, 1>();
  return GroupElement::from_matrix(GroupKind::SE2, inv);
}

AlgebraVector se2_log(const GroupElement& g) {
  if (g.kind() != GroupKind::SE2) throw KindMismatchError("se2_log: element is not in SE(2)");
  const auto& p = g.params();
  return se2_log_params(p[0], p[1], p[2]);
}

AlgebraVector so3_log(const GroupElement& g) {
  if (g.kind() != GroupKind::SO3) throw KindMismatchError("so3_log: element is not in SO(3)");
  return so3_log(g.matrix());
}

AlgebraVector so3_log(const Eigen::Matrix3d& r) {
  // Rotation vector w (x, y, z components); coordinates are (w_y, w_z, w_x).
  const Eigen::Vector3d skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double trace = r.trace();
  const double cos_t = std::clamp(0.5 * (trace - 1.0), -1.0, 1.0);
  const double sin_t = 0.5 * skew.norm();
  const double theta = std::atan2(sin_t, cos_t);

  Eigen::Vector3d w;
  if (trace <= -1.0 + kNearPiTrace) {
    // (R + R^T)/2 - cos(t) I = (1 - cos(t)) n n^T.
    const Eigen::Matrix3d nn =
        (0.5 * (r + r.transpose()) - cos_t * Eigen::Matrix3d::Identity()) / (1.0 - cos_t);
    int k = 0;
    nn.diagonal().maxCoeff(&k);
    Eigen::Vector3d n = nn.col(k) / std::sqrt(std::max(nn(k, k), 0.0));
    n.normalize();
    if (n.dot(skew) < 0.0) n = -n;
    w = theta * n;
  } else if (theta < kSmallAngle) {
    w = (0.5 + theta * theta / 12.0) * skew;
  } else {
    w = theta / (2.0 * sin_t) * skew;
  }
  return {w.y(), w.z(), w.x()};
}

AlgebraVector sphere_log(const GroupElement& g) {
  if (g.kind() != GroupKind::SO3) throw KindMismatchError("sphere_log: element is not in SO(3)");
  return sphere_log(g.matrix());
}

AlgebraVector sphere_log(const Eigen::Matrix3d& r) {
  const double sb = std::hypot(r(0, 2), r(1, 2));
  const double beta = std::atan2(sb, r(2, 2));
  const double gamma = sb < kPoleTolerance ? 0.0 : std::atan2(r(1, 2), r(0, 2));
  AlgebraVector u = so3_log(rot_z(gamma) * rot_y(beta) * rot_z(-gamma));
  u.c[1] = 0.0;  // exactly zero in exact arithmetic
  return u;
}

Metric::Metric(double epsilon, double xi, Slots so3_slots)
    : epsilon_(epsilon), xi_(xi), so3_slots_(so3_slots) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon) || !(xi > 0.0) || !std::isfinite(xi)) {
    throw ArgumentError("metric: epsilon and xi must be positive and finite");
  }
  Slots sorted = so3_slots;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != Slots{0, 1, 2}) {
    throw ArgumentError("metric: so3 slots must be a permutation of {0, 1, 2}");
  }
  base_ = Eigen::Vector3d(1.0, 1.0 / (epsilon * epsilon), xi * xi);
  if (!base_.allFinite() || (base_.array() <= 0.0).any()) {
    throw ArgumentError("metric: derived weights must be positive and finite");
  }
}

Eigen::Vector3d Metric::weights(GroupKind kind) const {
  if (kind == GroupKind::SE2) return base_;
  return {base_[so3_slots_[0]], base_[so3_slots_[1]], base_[so3_slots_[2]]};
}

Metric Metric::scaled(double s2) const {
  if (!(s2 > 0.0) || !std::isfinite(s2)) throw ArgumentError("metric: scale must be positive");
  Metric out = *this;
  out.scale_ = scale_ * s2;
  out.base_ = base_ * s2;
  return out;
}

double metric_norm(const AlgebraVector& u, const Metric& m, GroupKind kind) {
  const Eigen::Vector3d w = m.weights(kind);
  return std::sqrt(w[0] * u[0] * u[0] + w[1] * u[1] * u[1] + w[2] * u[2] * u[2]);
}

double distance(const GroupElement& g, const GroupElement& h, const Metric& m,
                Manifold manifold) {
  const GroupKind kind = group_of(manifold);
  if (g.kind() != kind || h.kind() != kind) {
    throw KindMismatchError("distance: elements do not belong to the graph's group");
  }

  if (kind == GroupKind::SE2) {
    // g^-1 h in closed form.
    const auto& pg = g.params();
    const auto& ph = h.params();
    const double dx = ph[0] - pg[0];
    const double dy = ph[1] - pg[1];
    const double c = std::cos(pg[2]);
    const double s = std::sin(pg[2]);
    const double x = c * dx + s * dy;
    const double y = -s * dx + c * dy;
    const double theta = wrap_angle(ph[2] - pg[2]);
    double d = metric_norm(se2_log_params(x, y, theta), m, kind);
    if (manifold == Manifold::SE2) {
      d = std::min(d, metric_norm(se2_log_params(x, y, wrap_angle(theta + kPi)), m, kind));
    }
    return d;
  }

  const Eigen::Matrix3d rel = g.matrix().transpose() * h.matrix();
  if (manifold == Manifold::S2) return metric_norm(sphere_log(rel), m, kind);
  double d = metric_norm(so3_log(rel), m, kind);
  // rel * Rz(pi): alpha shifted by pi.
  Eigen::Matrix3d shifted = rel;
  shifted.col(0) = -rel.col(0);
  shifted.col(1) = -rel.col(1);
  return std::min(d, metric_norm(so3_log(shifted), m, kind));
}

}  // namespace anisograph
