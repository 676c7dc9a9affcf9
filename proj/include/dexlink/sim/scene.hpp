#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "dexlink/error.hpp"
#include "dexlink/kinematics/transform.hpp"

namespace dexlink::sim {

struct Sphere {
  double radius = 0.0;
};
struct Box {
  kin::Vec3 half_extents = kin::Vec3::Zero();
};
/// Axis along the object's local z.
struct Cylinder {
  double radius = 0.0;
  double half_height = 0.0;
};

using Shape = std::variant<Sphere, Box, Cylinder>;

struct SceneObject {
  std::string id;
  Shape shape;
  kin::Transform pose;       // object frame -> world (hand base) frame
  double stiffness_k = 0.0;  // grams per meter of penetration
  std::string softness;

  void validate() const {
    if (id.empty()) throw ValidationError("scene object needs an id");
    if (!(std::isfinite(stiffness_k) && stiffness_k > 0.0)) throw ValidationError("object '" + id + "': k must be > 0");
    const bool ok = std::visit(
        [](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Sphere>) return s.radius > 0.0;
          else if constexpr (std::is_same_v<S, Box>) return (s.half_extents.array() > 0.0).all();
          else return s.radius > 0.0 && s.half_height > 0.0;
        },
        shape);
    if (!ok) throw ValidationError("object '" + id + "': dimensions must be > 0");
  }
};

/// Signed penetration depth of a point: positive inside (distance to the
/// nearest surface), negative outside.
inline double penetration_depth(const SceneObject& obj, const kin::Vec3& world_point) {
  const kin::Vec3 p = obj.pose.inverse().apply(world_point);
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Sphere>) {
          return s.radius - p.norm();
        } else if constexpr (std::is_same_v<S, Box>) {
          const kin::Vec3 d = s.half_extents - p.cwiseAbs();
          if ((d.array() > 0.0).all()) return d.minCoeff();
          return -d.cwiseMin(0.0).norm();
        } else {
          const double radial = s.radius - std::hypot(p.x(), p.y());
          const double axial = s.half_height - std::abs(p.z());
          if (radial > 0.0 && axial > 0.0) return std::min(radial, axial);
          return -std::hypot(std::min(radial, 0.0), std::min(axial, 0.0));
        }
      },
      obj.shape);
}

}  // namespace dexlink::sim
