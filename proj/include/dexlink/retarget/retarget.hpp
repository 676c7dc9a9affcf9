#pragma once

#include "dexlink/glove/glove_state.hpp"
#include "dexlink/kinematics/forward_kinematics.hpp"
#include "dexlink/retarget/ik.hpp"

namespace dexlink::retarget {

/// Glove fingertip positions relative to the glove base, via glove FK.
inline kin::FingertipSet glove_fingertips(const kin::HandModel& glove_model, const glove::GloveJointState& state) {
  return kin::forward_kinematics(glove_model, state.q);
}

/// target = scale * tip + robot_origin_offset, uniformly for every finger.
inline kin::FingertipSet scale_targets(const kin::FingertipSet& tips, const RetargetConfig& config,
                                       const kin::Vec3& robot_origin_offset) {
  kin::FingertipSet out;
  for (std::size_t i = 0; i < kin::kFingerCount; ++i) {
    out.positions[i] = config.scale * tips.positions[i] + robot_origin_offset;
  }
  return out;
}

/// One teleoperation step: glove FK -> scaled targets -> IK warm-started at q_prev.
inline RobotCommand retarget_step(const kin::HandModel& glove_model, const kin::HandModel& robot_model,
                                  const glove::GloveJointState& state, const kin::JointVector& q_prev,
                                  const RetargetConfig& config) {
  const auto targets = scale_targets(glove_fingertips(glove_model, state), config, config.robot_origin_offset);
  RobotCommand cmd = solve_ik(robot_model, q_prev, targets, config);
  cmd.timestamp_ns = state.timestamp_ns;
  return cmd;
}

}  // namespace dexlink::retarget
