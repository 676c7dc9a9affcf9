#pragma once

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "dexlink/haptic/feedback.hpp"
#include "dexlink/kinematics/forward_kinematics.hpp"
#include "dexlink/kinematics/model_loader.hpp"
#include "dexlink/retarget/ik.hpp"
#include "dexlink/sim/scene.hpp"

namespace dexlink::sim {

inline constexpr double kDefaultOmegaMax = 4.0;  // rad/s

struct SimState {
  kin::JointVector q_actual;
  kin::JointVector q_target;
  std::vector<SceneObject> objects;
  double time = 0.0;
  std::string scenario;
};

/// First-order joint servos: each joint slews toward its target at no more
/// than omega_max. Deterministic; objects are static.
inline SimState step(const SimState& state, const retarget::RobotCommand& command, double dt,
                     double omega_max = kDefaultOmegaMax) {
  if (!(dt > 0.0 && dt <= 0.1)) throw InvalidDt("dt must lie in (0, 0.1] s");
  if (command.q_robot.size() != state.q_actual.size()) {
    throw DimensionMismatch(state.q_actual.size(), command.q_robot.size());
  }
  SimState next = state;
  next.q_target = command.q_robot;
  const double max_step = omega_max * dt;
  for (std::size_t i = 0; i < next.q_actual.size(); ++i) {
    next.q_actual[i] += std::clamp(next.q_target[i] - next.q_actual[i], -max_step, max_step);
  }
  next.time = state.time + dt;
  return next;
}

/// Spring-penetration fingertip force sensors: grams = round(clamp(k d, 0,
/// 3000)) with d the deepest penetration over all objects.
inline std::array<haptic::ForceReading, kin::kFingerCount> contact_forces(const SimState& state,
                                                                          const kin::HandModel& robot_model) {
  const kin::FingertipSet tips = kin::forward_kinematics(robot_model, state.q_actual);
  std::array<haptic::ForceReading, kin::kFingerCount> out;
  const auto t_ns = static_cast<std::int64_t>(std::llround(state.time * 1e9));
  for (kin::FingerId f : kin::kAllFingers) {
    double force = 0.0;
    for (const SceneObject& obj : state.objects) {
      const double d = penetration_depth(obj, tips[f]);
      if (d > 0.0) force = std::max(force, obj.stiffness_k * d);
    }
    haptic::ForceReading& r = out[kin::finger_index(f)];
    r.finger = f;
    r.overrange = force > haptic::kSensorMaxGrams;
    r.grams = std::round(std::clamp(force, 0.0, haptic::kSensorMaxGrams));
    r.timestamp_ns = t_ns;
  }
  return out;
}

/// Scenario document:
/// {name, objects:[{id, shape, params, pose:{xyz, rpy}, k, softness}], initial_q:[...]}
/// with shape "sphere" {radius}, "box" {half_extents:[3]} or "cylinder"
/// {radius, half_height}. A missing initial_q means the zero pose.
inline SimState scenario_load(std::string_view document, const kin::HandModel& robot_model) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  SimState s;
  try {
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    s.scenario = doc.value("name", std::string{});
    std::set<std::string> ids;
    if (doc.contains("objects")) {
      for (const json& jo : doc.at("objects")) {
        SceneObject obj;
        obj.id = jo.at("id").get<std::string>();
        if (!ids.insert(obj.id).second) throw ValidationError("duplicate object id '" + obj.id + "'");
        const std::string shape = jo.at("shape").get<std::string>();
        const json& p = jo.at("params");
        if (shape == "sphere") {
          obj.shape = Sphere{p.at("radius").get<double>()};
        } else if (shape == "box") {
          const auto h = p.at("half_extents").get<std::array<double, 3>>();
          obj.shape = Box{{h[0], h[1], h[2]}};
        } else if (shape == "cylinder") {
          obj.shape = Cylinder{p.at("radius").get<double>(), p.at("half_height").get<double>()};
        } else {
          throw ParseError("object '" + obj.id + "': unknown shape '" + shape + "'");
        }
        obj.pose = jo.contains("pose") ? kin::detail::read_pose(jo.at("pose"), "pose") : kin::Transform{};
        obj.stiffness_k = jo.at("k").get<double>();
        obj.softness = jo.value("softness", std::string{});
        obj.validate();
        s.objects.push_back(std::move(obj));
      }
    }
    if (doc.contains("initial_q")) {
      const auto q = doc.at("initial_q").get<std::vector<double>>();
      if (q.size() != robot_model.dof_count()) throw DimensionMismatch(robot_model.dof_count(), q.size());
      s.q_actual = kin::JointVector::from_std(q);
      if (!s.q_actual.all_finite()) throw ValidationError("initial_q must be finite");
      if (!robot_model.within_limits(s.q_actual)) throw ValidationError("initial_q violates joint limits");
    } else {
      s.q_actual = kin::JointVector(robot_model.dof_count());
      s.q_actual = kin::clamp_to_limits(robot_model, s.q_actual);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
  s.q_target = s.q_actual;
  return s;
}

inline SimState scenario_load_file(const std::string& path, const kin::HandModel& robot_model) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_load(ss.str(), robot_model);
}

}  // namespace dexlink::sim
