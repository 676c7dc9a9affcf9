#pragma once

// Input generators shared by the retarget tests and the acceptance run.

#include <fstream>
#include <random>
#include <string>

#include "dexlink/kinematics.hpp"
#include "dexlink/retarget/retarget.hpp"

namespace poses {

inline const std::string kData = DEXLINK_DATA_DIR;
inline std::string glove_path() { return kData + "/models/glove21.hand.json"; }
inline std::string robot_path() { return kData + "/models/leaphand16.hand.json"; }

inline dexlink::kin::JointVector midpoint(const dexlink::kin::HandModel& m) {
  dexlink::kin::JointVector q(m.dof_count());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = 0.5 * (m.joints()[i].lower + m.joints()[i].upper);
  return q;
}

inline dexlink::kin::JointVector random_q(const dexlink::kin::HandModel& m, std::mt19937_64& rng) {
  dexlink::kin::JointVector q(m.dof_count());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = std::uniform_real_distribution<double>(m.joints()[i].lower, m.joints()[i].upper)(rng);
  }
  return q;
}

/// Random glove pose the robot hand can reproduce: thumb_rot and the
/// pinky, which the robot lacks, stay at zero.
inline dexlink::kin::JointVector reproducible_q(const dexlink::kin::HandModel& glove, std::mt19937_64& rng) {
  dexlink::kin::JointVector q = random_q(glove, rng);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::string& n = glove.joints()[i].name;
    if (n == "thumb_rot" || n.starts_with("pinky")) q[i] = 0.0;
  }
  return q;
}

/// Pinch pose generator. Starts from a random glove pose and pulls the
/// thumb tip onto the index tip (plus a small offset) with thumb_rot held
/// at zero, since the robot thumb has no matching joint.
class PinchGenerator {
 public:
  explicit PinchGenerator(const dexlink::kin::HandModel& glove) : glove_(glove), pinned_(pinned_model()) {
    config_.step_limit = 10.0;
    config_.max_iters = 300;
    config_.finger_weights = {10.0, 1.0, 1.0, 1.0, 1.0};
  }

  /// Returns a glove pose whose thumb-index distance is below `max_gap`.
  dexlink::kin::JointVector next(std::mt19937_64& rng, double max_gap = 0.005) {
    using namespace dexlink;
    for (;;) {
      kin::JointVector q = random_q(glove_, rng);
      q[*glove_.joint_index("thumb_rot")] = 0.0;
      const kin::FingertipSet tips = kin::forward_kinematics(glove_, q);
      kin::FingertipSet target = tips;
      kin::Vec3 offset;
      for (int i = 0; i < 3; ++i) offset[i] = std::uniform_real_distribution<double>(-0.002, 0.002)(rng);
      target.positions[0] = tips.positions[1] + offset;
      const kin::JointVector out = retarget::solve_ik(pinned_, q, target, config_).q_robot;
      const kin::FingertipSet got = kin::forward_kinematics(glove_, out);
      if ((got.positions[0] - got.positions[1]).norm() < max_gap) return out;
    }
  }

 private:
  static dexlink::kin::HandModel pinned_model() {
    std::ifstream in(glove_path());
    nlohmann::json doc = nlohmann::json::parse(in);
    for (auto& l : doc.at("links")) {
      if (l.contains("joint") && l["joint"]["name"] == "thumb_rot") l["joint"]["limits"] = {0.0, 0.0};
    }
    return dexlink::kin::load_hand_model(doc.dump());
  }

  const dexlink::kin::HandModel& glove_;
  dexlink::kin::HandModel pinned_;
  dexlink::retarget::RetargetConfig config_;
};

}  // namespace poses
