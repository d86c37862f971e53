#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace anisograph {

enum class GroupKind : std::uint8_t { SE2 = 0, SO3 = 1 };

/// Domain a graph lives on. R2 and S2 are the isotropic base spaces,
/// represented by SE(2)/SO(3) elements with a single orientation sample.
enum class Manifold : std::uint8_t { SE2 = 0, SO3 = 1, R2 = 2, S2 = 3 };

GroupKind group_of(Manifold m) noexcept;
/// True for SE2/SO3, false for the isotropic base spaces.
bool has_orientation_axis(Manifold m) noexcept;
const char* to_string(Manifold m) noexcept;

/// Wraps an angle to [-pi, pi).
double wrap_angle(double a) noexcept;

Eigen::Matrix3d rot_z(double a);
Eigen::Matrix3d rot_y(double a);

/// Coordinates (c1, c2, c3) in the left-invariant basis {A1, A2, A3}.
///
/// SE(2): A1 = forward translation, A2 = lateral translation, A3 = rotation;
///        hat(c) = [[0, -c3, c1], [c3, 0, c2], [0, 0, 0]].
/// SO(3): A1 = rotation about y, A2 = rotation about z, A3 = rotation about x;
///        hat(c) = [[0, -c2, c1], [c2, 0, -c3], [-c1, c3, 0]].
/// A2 generates the z-rotations Rz(alpha) that fix the reference point e_z.
struct AlgebraVector {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();

  AlgebraVector() = default;
  AlgebraVector(double c1, double c2, double c3) : c(c1, c2, c3) {}
  explicit AlgebraVector(const Eigen::Vector3d& v) : c(v) {}

  double operator[](int i) const { return c[i]; }
};

Eigen::Matrix3d hat(GroupKind kind, const AlgebraVector& u);
AlgebraVector vee(GroupKind kind, const Eigen::Matrix3d& a);

/// Element of SE(2) or SO(3), kept in parameter and 3x3 matrix form.
///
/// SE(2) params are (x, y, theta), theta in [-pi, pi).
/// SO(3) params are ZYZ angles (alpha, beta, gamma) with
/// G = Rz(gamma) Ry(beta) Rz(alpha); alpha, gamma in [-pi, pi) and beta the
/// colatitude in [0, pi] of the point G e_z. At the poles (beta = 0 or pi)
/// gamma is fixed to 0.
class GroupElement {
 public:
  static GroupElement se2(double x, double y, double theta);
  static GroupElement so3(double alpha, double beta, double gamma);
  static GroupElement identity(GroupKind kind);
  /// Re-extracts canonical params from a matrix of the given kind.
  static GroupElement from_matrix(GroupKind kind, const Eigen::Matrix3d& m);
  /// Keeps `params` verbatim (they must already be canonical) and rebuilds the
  /// matrix from them. Used when decoding stored vertices.
  static GroupElement from_params(GroupKind kind, const Eigen::Vector3d& params);

  GroupKind kind() const noexcept { return kind_; }
  const Eigen::Vector3d& params() const noexcept { return params_; }
  const Eigen::Matrix3d& matrix() const noexcept { return matrix_; }

 private:
  GroupElement(GroupKind kind, const Eigen::Vector3d& params, const Eigen::Matrix3d& m)
      : kind_(kind), params_(params), matrix_(m) {}

  GroupKind kind_ = GroupKind::SE2;
  Eigen::Vector3d params_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d matrix_ = Eigen::Matrix3d::Identity();
};

/// Throws KindMismatchError on mixed kinds.
GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);

AlgebraVector se2_log(const GroupElement& g);
AlgebraVector so3_log(const GroupElement& g);
AlgebraVector so3_log(const Eigen::Matrix3d& rotation);
/// Torsion-free logarithm used for isotropic S2 graphs: the log of
/// Rz(gamma) Ry(beta) Rz(-gamma) where (beta, gamma) locate g e_z. The A2
/// (orientation) component of the result is zero.
AlgebraVector sphere_log(const GroupElement& g);
AlgebraVector sphere_log(const Eigen::Matrix3d& rotation);

/// Diagonal metric tensor diag(1, eps^-2, xi^2) relative to the left-invariant
/// frame.
///
/// For SE(2) the three weights apply to (c1, c2, c3) in that order. For SO(3)
/// the weights are permuted by `so3_slots`: component i gets base weight
/// `so3_slots[i]`. The default {0, 2, 1} puts xi^2 on A2 (the generator that
/// fixes the reference point), 1 on A1 and eps^-2 on A3.
class Metric {
 public:
  using Slots = std::array<std::uint8_t, 3>;
  static constexpr Slots kDefaultSo3Slots{0, 2, 1};

  Metric() : Metric(1.0, 1.0) {}
  /// Throws ArgumentError unless epsilon, xi are positive and finite and
  /// `so3_slots` is a permutation of {0, 1, 2}.
  Metric(double epsilon, double xi, Slots so3_slots = kDefaultSo3Slots);

  static Metric isotropic() { return Metric(1.0, 1.0); }

  double epsilon() const noexcept { return epsilon_; }
  double xi() const noexcept { return xi_; }
  const Slots& so3_slots() const noexcept { return so3_slots_; }
  /// scale * (1, eps^-2, xi^2); scale is 1 unless produced by `scaled`.
  const Eigen::Vector3d& base_weights() const noexcept { return base_; }
  Eigen::Vector3d weights(GroupKind kind) const;
  /// Returns a metric whose three weights are all multiplied by `s2`.
  Metric scaled(double s2) const;

 private:
  double epsilon_;
  double xi_;
  double scale_ = 1.0;
  Slots so3_slots_;
  Eigen::Vector3d base_;
};

double metric_norm(const AlgebraVector& u, const Metric& m, GroupKind kind);

/// Approximate left-invariant distance ||log(g^-1 h)||_R.
///
/// On SE2/SO3 the orientation axis is pi-periodic: the result is the minimum
/// over the relative element and its copy with the orientation coordinate
/// shifted by pi (shifts of -pi and +pi coincide after wrapping). R2 and S2
/// distances use no shift; S2 uses `sphere_log`.
double distance(const GroupElement& g, const GroupElement& h, const Metric& m,
                Manifold manifold);

}  // namespace anisograph
