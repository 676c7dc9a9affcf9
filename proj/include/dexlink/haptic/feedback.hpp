#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "json.hpp"
#include "dexlink/error.hpp"
#include "dexlink/kinematics/hand_model.hpp"

namespace dexlink::haptic {

inline constexpr double kSensorMaxGrams = 3000.0;
inline constexpr int kHapticWaveformId = 56;  // "Pulsing Sharp 1-100%"

struct ForceReading {
  kin::FingerId finger = kin::FingerId::thumb;
  double grams = 0.0;  // 1 g resolution, [0, 3000]
  bool overrange = false;
  std::int64_t timestamp_ns = 0;
};

/// Rows of the haptic/force combination table, ordered by force.
enum class FeedbackClass : std::uint8_t { none = 0, haptic_only = 1, haptic_and_force = 2, force_only = 3 };

constexpr bool haptic_enabled(FeedbackClass c) {
  return c == FeedbackClass::haptic_only || c == FeedbackClass::haptic_and_force;
}
constexpr bool force_enabled(FeedbackClass c) {
  return c == FeedbackClass::haptic_and_force || c == FeedbackClass::force_only;
}

constexpr std::string_view class_name(FeedbackClass c) {
  switch (c) {
    case FeedbackClass::none: return "none";
    case FeedbackClass::haptic_only: return "haptic";
    case FeedbackClass::haptic_and_force: return "haptic+force";
    case FeedbackClass::force_only: return "force";
  }
  return "none";
}

/// Lower edges (grams) of the haptic-only, haptic+force and force-only
/// rows. Each edge belongs to the row above it.
struct Thresholds {
  std::array<double, 3> edges = {10.0, 50.0, 100.0};

  void validate() const {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (std::isnan(edges[i]) || edges[i] <= 0.0) throw ValidationError("feedback thresholds must be > 0");
      if (i > 0 && edges[i] < edges[i - 1]) throw ValidationError("feedback thresholds must be non-decreasing");
    }
  }
};

inline FeedbackClass classify_force(double grams, const Thresholds& t = {}) {
  if (std::isnan(grams) || grams < 0.0) throw NegativeForce("force reading must be >= 0 g");
  if (grams >= t.edges[2]) return FeedbackClass::force_only;
  if (grams >= t.edges[1]) return FeedbackClass::haptic_and_force;
  if (grams >= t.edges[0]) return FeedbackClass::haptic_only;
  return FeedbackClass::none;
}

/// clamp(grams, 0, 3000) / 3000 * kp_max.
inline double force_to_kp(double grams, double kp_max) {
  return std::clamp(grams, 0.0, kSensorMaxGrams) / kSensorMaxGrams * kp_max;
}

struct FeedbackParams {
  double kp_max = 800.0;
  double hysteresis_g = 2.0;
  Thresholds thresholds;

  void validate() const {
    if (!(std::isfinite(kp_max) && kp_max > 0.0)) throw ValidationError("feedback.kp_max must be > 0");
    if (!(std::isfinite(hysteresis_g) && hysteresis_g >= 0.0)) throw ValidationError("feedback.hysteresis_g must be >= 0");
    thresholds.validate();
    // Keeps every force-enabled state strictly above 0 g.
    if (thresholds.edges[0] <= hysteresis_g) throw ValidationError("feedback thresholds must exceed hysteresis_g");
  }
};

struct FeedbackCommand {
  kin::FingerId finger = kin::FingerId::thumb;
  double servo_kp = 0.0;
  std::uint16_t servo_goal = 0;  // ticks; hold the glove servo where it is
  bool haptic_active = false;
  int waveform_id = 0;
  FeedbackClass feedback_class = FeedbackClass::none;
};

/// Per-finger hysteresis state machine. Moving to a higher row needs the
/// reading to clear that row's edge by +hysteresis; moving down needs it to
/// fall below the edge by more than hysteresis. Single owner.
class FingerFeedback {
 public:
  explicit FingerFeedback(kin::FingerId finger, FeedbackParams params = {}) : finger_(finger), params_(params) {
    params_.validate();
  }

  FeedbackClass current() const { return class_; }
  const FeedbackParams& params() const { return params_; }
  void set_params(const FeedbackParams& p) {
    p.validate();
    params_ = p;
  }
  void reset() { class_ = FeedbackClass::none; }

  FeedbackClass update_class(double grams) {
    if (std::isnan(grams) || grams < 0.0) throw NegativeForce("force reading must be >= 0 g");
    const double h = params_.hysteresis_g;
    const FeedbackClass up = classify_force(std::max(0.0, grams - h), params_.thresholds);
    const FeedbackClass down = classify_force(grams + h, params_.thresholds);
    if (up > class_) class_ = up;
    else if (down < class_) class_ = down;
    return class_;
  }

  FeedbackCommand update(const ForceReading& reading, std::uint16_t glove_servo_ticks) {
    FeedbackCommand cmd;
    cmd.finger = finger_;
    cmd.feedback_class = update_class(reading.grams);
    cmd.servo_goal = glove_servo_ticks;
    cmd.servo_kp = force_enabled(cmd.feedback_class) ? force_to_kp(reading.grams, params_.kp_max) : 0.0;
    cmd.haptic_active = haptic_enabled(cmd.feedback_class);
    cmd.waveform_id = cmd.haptic_active ? kHapticWaveformId : 0;
    return cmd;
  }

 private:
  kin::FingerId finger_;
  FeedbackParams params_;
  FeedbackClass class_ = FeedbackClass::none;
};

/// Five independent finger state machines.
class HandFeedback {
 public:
  explicit HandFeedback(const FeedbackParams& params = {})
      : fingers_{FingerFeedback(kin::FingerId::thumb, params), FingerFeedback(kin::FingerId::index, params),
                 FingerFeedback(kin::FingerId::middle, params), FingerFeedback(kin::FingerId::ring, params),
                 FingerFeedback(kin::FingerId::pinky, params)} {}

  std::array<FeedbackCommand, kin::kFingerCount> update(const std::array<ForceReading, kin::kFingerCount>& readings,
                                                        const std::array<std::uint16_t, kin::kFingerCount>& servo_ticks) {
    std::array<FeedbackCommand, kin::kFingerCount> out;
    for (std::size_t i = 0; i < kin::kFingerCount; ++i) out[i] = fingers_[i].update(readings[i], servo_ticks[i]);
    return out;
  }

  void set_params(const FeedbackParams& p) {
    p.validate();
    for (auto& f : fingers_) f.set_params(p);
  }
  const FeedbackParams& params() const { return fingers_[0].params(); }
  void reset() {
    for (auto& f : fingers_) f.reset();
  }

 private:
  std::array<FingerFeedback, kin::kFingerCount> fingers_;
};

inline FeedbackParams feedback_params_from_json(const nlohmann::json& j) {
  FeedbackParams p;
  try {
    p.kp_max = j.value("kp_max", p.kp_max);
    p.hysteresis_g = j.value("hysteresis_g", p.hysteresis_g);
    if (j.contains("thresholds")) p.thresholds.edges = j.at("thresholds").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("feedback section: ") + e.what());
  }
  p.validate();
  return p;
}

inline nlohmann::json to_json(const FeedbackParams& p) {
  return nlohmann::json{{"kp_max", p.kp_max}, {"hysteresis_g", p.hysteresis_g}, {"thresholds", p.thresholds.edges}};
}

}  // namespace dexlink::haptic
