#pragma once

#include <algorithm>
#include <vector>

#include "dexlink/kinematics/hand_model.hpp"

namespace dexlink::kin {

using FingerJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

inline void require_dof(const HandModel& model, const JointVector& q) {
  if (q.size() != model.dof_count()) throw DimensionMismatch(model.dof_count(), q.size());
}

/// World (base-frame) transform of every link at configuration q.
inline std::vector<Transform> link_transforms(const HandModel& model, const JointVector& q) {
  require_dof(model, q);
  const auto& links = model.links();
  std::vector<Transform> world(links.size());
  for (std::size_t li : model.topological_order()) {
    const Link& l = links[li];
    if (l.parent < 0) continue;
    const JointSpec& j = model.joints()[*l.joint];
    world[li] = world[static_cast<std::size_t>(l.parent)] * j.origin *
                Transform::rotation_about(j.axis, q[*l.joint]);
  }
  return world;
}

inline FingertipSet forward_kinematics(const HandModel& model, const JointVector& q) {
  const auto world = link_transforms(model, q);
  FingertipSet tips;
  for (FingerId f : kAllFingers) {
    const FingertipFrame& frame = model.fingertip(f);
    tips[f] = (world[frame.link] * frame.offset).translation;
  }
  return tips;
}

/// Fingertips and all five Jacobians from one transform sweep.
struct FingertipKinematics {
  FingertipSet tips;
  std::array<FingerJacobian, kFingerCount> jacobians;
};

inline FingertipKinematics fingertip_kinematics(const HandModel& model, const JointVector& q) {
  const auto world = link_transforms(model, q);
  FingertipKinematics out;
  for (FingerId f : kAllFingers) {
    const FingertipFrame& frame = model.fingertip(f);
    const Vec3 tip = (world[frame.link] * frame.offset).translation;
    out.tips[f] = tip;
    auto& jac = out.jacobians[finger_index(f)];
    jac = FingerJacobian::Zero(3, static_cast<Eigen::Index>(model.dof_count()));
    for (int li = static_cast<int>(frame.link); li > 0; li = model.links()[static_cast<std::size_t>(li)].parent) {
      const std::size_t j = *model.links()[static_cast<std::size_t>(li)].joint;
      // The child link frame shares its origin and axis with the joint frame.
      const Transform& joint_frame = world[static_cast<std::size_t>(li)];
      jac.col(static_cast<Eigen::Index>(j)) =
          (joint_frame.rotation * model.joints()[j].axis).cross(tip - joint_frame.translation);
    }
  }
  return out;
}

/// Positional Jacobian of one fingertip: column j is d p / d q_j.
inline FingerJacobian fingertip_jacobian(const HandModel& model, const JointVector& q, FingerId finger) {
  if (finger_index(finger) >= kFingerCount) throw UnknownFinger("unknown finger id");
  return fingertip_kinematics(model, q).jacobians[finger_index(finger)];
}

inline FingerJacobian fingertip_jacobian(const HandModel& model, const JointVector& q, std::string_view finger) {
  const auto f = finger_from_name(finger);
  if (!f) throw UnknownFinger("unknown finger '" + std::string(finger) + "'");
  return fingertip_jacobian(model, q, *f);
}

inline JointVector clamp_to_limits(const HandModel& model, const JointVector& q) {
  require_dof(model, q);
  JointVector out = q;
  const auto& joints = model.joints();
  for (std::size_t i = 0; i < joints.size(); ++i) out[i] = std::clamp(q[i], joints[i].lower, joints[i].upper);
  return out;
}

}  // namespace dexlink::kin
