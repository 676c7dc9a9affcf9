#pragma once

#include <array>
#include <cmath>
#include <string>

#include "json.hpp"
#include "dexlink/error.hpp"
#include "dexlink/kinematics/hand_model.hpp"

namespace dexlink::retarget {

struct RetargetConfig {
  double scale = 1.3;
  double damping = 1e-2;  // lambda, meters
  /// Maximum change of any joint across one solve call (rate limit).
  double step_limit = 0.15;
  /// Maximum change of any joint within one DLS iteration.
  double iteration_step_limit = 0.3;
  int max_iters = 100;
  double pos_tolerance = 5e-4;
  std::array<double, kin::kFingerCount> finger_weights = {2.0, 1.0, 1.0, 1.0, 1.0};
  kin::Vec3 robot_origin_offset = kin::Vec3::Zero();

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(scale)) throw ValidationError("retarget.scale must be > 0");
    if (!positive(damping)) throw ValidationError("retarget.damping must be > 0");
    if (!positive(step_limit)) throw ValidationError("retarget.step_limit must be > 0");
    if (!positive(iteration_step_limit)) throw ValidationError("retarget.iteration_step_limit must be > 0");
    if (!positive(pos_tolerance)) throw ValidationError("retarget.pos_tolerance must be > 0");
    if (max_iters < 1) throw ValidationError("retarget.max_iters must be >= 1");
    for (double w : finger_weights) {
      if (!positive(w)) throw ValidationError("retarget.finger_weights must be > 0");
    }
    if (!robot_origin_offset.allFinite()) throw ValidationError("retarget.robot_origin_offset must be finite");
  }
};

/// Reads the `retarget` config section; absent keys keep their defaults.
inline RetargetConfig retarget_config_from_json(const nlohmann::json& j) {
  RetargetConfig c;
  try {
    c.scale = j.value("scale", c.scale);
    c.damping = j.value("damping", c.damping);
    c.step_limit = j.value("step_limit", c.step_limit);
    c.iteration_step_limit = j.value("iteration_step_limit", c.iteration_step_limit);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.pos_tolerance = j.value("pos_tolerance", c.pos_tolerance);
    if (j.contains("finger_weights")) c.finger_weights = j.at("finger_weights").get<std::array<double, kin::kFingerCount>>();
    if (j.contains("robot_origin_offset")) {
      const auto v = j.at("robot_origin_offset").get<std::array<double, 3>>();
      c.robot_origin_offset = {v[0], v[1], v[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("retarget section: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json to_json(const RetargetConfig& c) {
  return nlohmann::json{{"scale", c.scale},
                        {"damping", c.damping},
                        {"step_limit", c.step_limit},
                        {"iteration_step_limit", c.iteration_step_limit},
                        {"max_iters", c.max_iters},
                        {"pos_tolerance", c.pos_tolerance},
                        {"finger_weights", c.finger_weights},
                        {"robot_origin_offset",
                         {c.robot_origin_offset.x(), c.robot_origin_offset.y(), c.robot_origin_offset.z()}}};
}

}  // namespace dexlink::retarget
