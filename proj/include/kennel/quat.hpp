#pragma once

#include <array>
#include <span>

namespace kennel::quat {

/// Unit rotation quaternion (w, x, y, z) stored with a canonical sign:
/// w > 0, or w == 0 and the first nonzero of (x, y, z) is positive.
/// Instances are only produced by `canonicalize` and the operations below,
/// so every value in circulation satisfies both invariants.
class UnitQuaternion {
 public:
  UnitQuaternion() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}

  static UnitQuaternion identity() { return {}; }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  std::array<double, 4> components() const { return {w_, x_, y_, z_}; }

  /// Exact component equality; use geodesic_distance for rotation equality.
  friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

 private:
  UnitQuaternion(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}
  friend UnitQuaternion canonicalize(double w, double x, double y, double z);

  double w_, x_, y_, z_;
};

/// Normalizes and applies the sign rule. Throws `quat.degenerate` when the
/// input norm is at most 1e-12.
UnitQuaternion canonicalize(double w, double x, double y, double z);
inline UnitQuaternion canonicalize(const std::array<double, 4>& q) {
  return canonicalize(q[0], q[1], q[2], q[3]);
}

/// Rotation by `angle` radians about `axis` (need not be normalized).
UnitQuaternion from_axis_angle(const std::array<double, 3>& axis, double angle);

/// Raw 4-vector inner product.
double dot(const UnitQuaternion& a, const UnitQuaternion& b);

/// Hamilton product a*b (apply b in the frame of a), canonicalized.
UnitQuaternion multiply(const UnitQuaternion& a, const UnitQuaternion& b);

UnitQuaternion inverse(const UnitQuaternion& q);

/// q1^-1 * q2: the rotation taking q1 to q2, so multiply(q1, relative(q1, q2)) == q2.
UnitQuaternion relative(const UnitQuaternion& q1, const UnitQuaternion& q2);

/// 2 acos(|<q1,q2>|), in [0, pi]. Insensitive to the sign of either input.
double geodesic_distance(const UnitQuaternion& q1, const UnitQuaternion& q2);

/// acos(2 <q_pred,q_gt>^2 - 1), in [0, pi]; the continuous angular error.
double angular_error(const UnitQuaternion& q_pred, const UnitQuaternion& q_gt);

/// Rotation angle of q, in [0, pi].
double rotation_angle(const UnitQuaternion& q);

/// Sign-aligned arithmetic mean: every element is flipped onto the
/// hemisphere of qs[0] before averaging. Throws `data.empty` on an empty
/// list and `quat.degenerate_mean` if the averaged vector has norm < 1e-6.
UnitQuaternion mean(std::span<const UnitQuaternion> qs);

/// Shorter-arc spherical interpolation; t = 0 gives q1, t = 1 gives q2.
UnitQuaternion slerp(const UnitQuaternion& q1, const UnitQuaternion& q2, double t);

}  // namespace kennel::quat
