#pragma once

#include <bitset>
#include <cstdint>

#include "dexlink/kinematics/hand_model.hpp"

namespace dexlink::glove {

inline constexpr std::size_t kEncoderChannels = 16;
inline constexpr std::size_t kServoChannels = 5;
inline constexpr std::size_t kGloveDof = kEncoderChannels + kServoChannels;

/// Calibrated 21-angle glove state in glove-model joint order.
struct GloveJointState {
  kin::JointVector q = kin::JointVector(kGloveDof);
  std::int64_t timestamp_ns = 0;
  std::uint32_t seq = 0;
  std::bitset<kGloveDof> clamped;  // joints pulled back into their limits
  bool adc_overrange = false;      // some code exceeded the reference

  bool warning() const { return clamped.any() || adc_overrange; }
};

}  // namespace dexlink::glove
