#pragma once

#include <array>
#include <numbers>
#include <string_view>

#include "dexlink/glove/calibration.hpp"
#include "dexlink/glove/wire.hpp"
#include "dexlink/kinematics/forward_kinematics.hpp"

namespace dexlink::glove {

// Joint sensed by each encoder channel. The thumb pronation joint has no
// documented sensor; it takes the last encoder slot.
inline constexpr std::array<std::string_view, kEncoderChannels> kEncoderJointNames = {
    "index_mcp_s", "index_pip", "index_dip",   "middle_mcp_s", "middle_pip", "middle_dip",
    "ring_mcp_s",  "ring_pip",  "ring_dip",    "pinky_mcp_s",  "pinky_pip",  "pinky_dip",
    "thumb_tm_s",  "thumb_mcp", "thumb_ip",    "thumb_rot"};

// Force-feedback servos sit on the flexion half of each MCP (TM for the thumb)
// and double as that joint's position sensor.
inline constexpr std::array<std::string_view, kServoChannels> kServoJointNames = {
    "thumb_tm_b", "index_mcp_b", "middle_mcp_b", "ring_mcp_b", "pinky_mcp_b"};

enum class SensorKind { encoder, servo };

struct SensorSource {
  SensorKind kind = SensorKind::encoder;
  std::size_t channel = 0;
};

/// Joint index <-> sensor channel assignment for a glove model.
class ChannelMap {
 public:
  explicit ChannelMap(const kin::HandModel& glove_model) {
    if (glove_model.dof_count() != kGloveDof) throw DimensionMismatch(kGloveDof, glove_model.dof_count());
    std::array<bool, kGloveDof> assigned{};
    auto bind = [&](std::string_view name, SensorSource src) {
      auto j = glove_model.joint_index(name);
      if (!j) throw ValidationError("glove model lacks sensed joint '" + std::string(name) + "'");
      sources_[*j] = src;
      assigned[*j] = true;
      if (src.kind == SensorKind::encoder) encoder_joint_[src.channel] = *j;
      else servo_joint_[src.channel] = *j;
    };
    for (std::size_t ch = 0; ch < kEncoderChannels; ++ch) bind(kEncoderJointNames[ch], {SensorKind::encoder, ch});
    for (std::size_t ch = 0; ch < kServoChannels; ++ch) bind(kServoJointNames[ch], {SensorKind::servo, ch});
    for (std::size_t j = 0; j < kGloveDof; ++j) {
      if (!assigned[j]) throw ValidationError("glove joint '" + glove_model.joints()[j].name + "' has no sensor");
    }
  }

  const SensorSource& source(std::size_t joint) const { return sources_[joint]; }
  std::size_t encoder_joint(std::size_t channel) const { return encoder_joint_[channel]; }
  std::size_t servo_joint(std::size_t channel) const { return servo_joint_[channel]; }

 private:
  std::array<SensorSource, kGloveDof> sources_{};
  std::array<std::size_t, kEncoderChannels> encoder_joint_{};
  std::array<std::size_t, kServoChannels> servo_joint_{};
};

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Sensor readings -> calibrated glove joint state. Encoders go through the
/// ratiometric conversion and their channel's correction table; servo
/// channels are read uncorrected. Angles are zeroed, converted to radians
/// and clamped into the glove model's limits (1e-6 rad grace).
inline GloveJointState assemble_glove_state(const kin::HandModel& glove_model, const ChannelMap& channels,
                                            const EncoderFrame& frame, const ServoState& servos,
                                            const GloveCalibration& calibration, std::int64_t timestamp_ns = 0) {
  GloveJointState state;
  state.timestamp_ns = timestamp_ns;
  state.seq = frame.seq;
  for (std::size_t j = 0; j < kGloveDof; ++j) {
    const SensorSource& src = channels.source(j);
    double deg = 0.0;
    if (src.kind == SensorKind::encoder) {
      const AngleReading raw = raw_to_angle_checked(frame.adc_codes[src.channel], frame.vcc_code);
      state.adc_overrange = state.adc_overrange || raw.clamped;
      deg = apply_calibration(calibration.tables[src.channel], raw.degrees);
    } else {
      deg = servo_ticks_to_angle(servos.positions[src.channel]);
    }
    const double q = (deg - calibration.zero_offsets_deg[j]) * kDegToRad;
    const auto& spec = glove_model.joints()[j];
    if (q > spec.upper + 1e-6 || q < spec.lower - 1e-6) state.clamped.set(j);
    state.q[j] = std::clamp(q, spec.lower, spec.upper);
  }
  return state;
}

}  // namespace dexlink::glove
