#include "kennel/quat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kennel/error.hpp"

namespace kennel::quat {

UnitQuaternion canonicalize(double w, double x, double y, double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 1e-12)) {
    fail(errc::kDegenerateQuaternion, "quaternion norm " + std::to_string(norm) + " is too small");
  }
  // Already-unit inputs keep their exact bits, so canonicalize is idempotent.
  if (std::abs(norm - 1.0) > 1e-15) {
    w /= norm;
    x /= norm;
    y /= norm;
    z /= norm;
  }

  bool flip = false;
  if (w < 0.0) {
    flip = true;
  } else if (w == 0.0) {
    const double lead = x != 0.0 ? x : (y != 0.0 ? y : z);
    flip = lead < 0.0;
  }
  if (flip) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  // Avoid carrying a negative zero around; it would break bit-exact round trips.
  return UnitQuaternion(w + 0.0, x + 0.0, y + 0.0, z + 0.0);
}

UnitQuaternion from_axis_angle(const std::array<double, 3>& axis, double angle) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(n > 1e-12)) fail(errc::kDegenerateQuaternion, "rotation axis has zero length");
  const double s = std::sin(angle / 2.0) / n;
  return canonicalize(std::cos(angle / 2.0), axis[0] * s, axis[1] * s, axis[2] * s);
}

double dot(const UnitQuaternion& a, const UnitQuaternion& b) {
  return a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
}

UnitQuaternion multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
  return canonicalize(a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
                      a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
                      a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
                      a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w());
}

UnitQuaternion inverse(const UnitQuaternion& q) {
  return canonicalize(q.w(), -q.x(), -q.y(), -q.z());
}

UnitQuaternion relative(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  return multiply(inverse(q1), q2);
}

double geodesic_distance(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  // Equal to 2 acos(|<q1,q2>|), evaluated through the chord lengths so that
  // nearly coincident rotations keep full precision (acos bottoms out at ~3e-8).
  const double s = dot(q1, q2) < 0.0 ? -1.0 : 1.0;
  const double dw = q1.w() - s * q2.w(), dx = q1.x() - s * q2.x(), dy = q1.y() - s * q2.y(), dz = q1.z() - s * q2.z();
  const double pw = q1.w() + s * q2.w(), px = q1.x() + s * q2.x(), py = q1.y() + s * q2.y(), pz = q1.z() + s * q2.z();
  const double minus = std::sqrt(dw * dw + dx * dx + dy * dy + dz * dz);
  const double plus = std::sqrt(pw * pw + px * px + py * py + pz * pz);
  return 4.0 * std::atan2(minus, plus);
}

double angular_error(const UnitQuaternion& q_pred, const UnitQuaternion& q_gt) {
  const double d = dot(q_pred, q_gt);
  return std::acos(std::clamp(2.0 * d * d - 1.0, -1.0, 1.0));
}

double rotation_angle(const UnitQuaternion& q) {
  return geodesic_distance(UnitQuaternion::identity(), q);
}

UnitQuaternion mean(std::span<const UnitQuaternion> qs) {
  if (qs.empty()) fail(errc::kEmptyInput, "mean of an empty quaternion list");
  const UnitQuaternion& ref = qs.front();
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  for (const auto& q : qs) {
    const double s = dot(ref, q) < 0.0 ? -1.0 : 1.0;
    w += s * q.w();
    x += s * q.x();
    y += s * q.y();
    z += s * q.z();
  }
  const double n = static_cast<double>(qs.size());
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  if (std::sqrt(w * w + x * x + y * y + z * z) < 1e-6) {
    fail(errc::kDegenerateMean, "quaternions are spread antipodally; mean is undefined");
  }
  return canonicalize(w, x, y, z);
}

UnitQuaternion slerp(const UnitQuaternion& q1, const UnitQuaternion& q2, double t) {
  double d = dot(q1, q2);
  double sign = 1.0;
  if (d < 0.0) {
    sign = -1.0;
    d = -d;
  }
  if (t <= 0.0 || d >= 1.0) return q1;
  if (t >= 1.0) return q2;

  double a, b;
  const double theta = std::acos(d);
  const double sin_theta = std::sin(theta);
  if (sin_theta < 1e-12) {
    a = 1.0 - t;
    b = t;
  } else {
    a = std::sin((1.0 - t) * theta) / sin_theta;
    b = std::sin(t * theta) / sin_theta;
  }
  b *= sign;
  return canonicalize(a * q1.w() + b * q2.w(), a * q1.x() + b * q2.x(), a * q1.y() + b * q2.y(),
                      a * q1.z() + b * q2.z());
}

}  // namespace kennel::quat
