#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace dexlink::kin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform stored as rotation matrix + translation (meters).
/// `a * b` applies b first, then a; chains compose parent-to-child.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }

  /// Fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Transform from_rpy_xyz(const Vec3& rpy, const Vec3& xyz) {
    Transform t;
    t.rotation = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
    t.translation = xyz;
    return t;
  }

  static Transform rotation_about(const Vec3& unit_axis, double angle) {
    Transform t;
    t.rotation = Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
    return t;
  }

  Transform operator*(const Transform& child) const {
    Transform out;
    out.rotation = rotation * child.rotation;
    out.translation = rotation * child.translation + translation;
    return out;
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Transform inverse() const {
    Transform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  bool operator==(const Transform&) const = default;
};

}  // namespace dexlink::kin
