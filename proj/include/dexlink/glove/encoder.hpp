#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "dexlink/error.hpp"

namespace dexlink::glove {

inline constexpr std::uint32_t kAdcMaxCode = (1u << 24) - 1;
inline constexpr std::uint32_t kServoTicks = 4096;

struct AngleReading {
  double degrees = 0.0;
  bool clamped = false;  // adc_code exceeded vcc_code
};

/// Voltage-divider encoder: angle = V_adc / V_cc * 360, with 0 V at 0 deg
/// and the supply voltage at 360 deg. Both voltages arrive as ADC codes.
inline AngleReading raw_to_angle_checked(std::uint32_t adc_code, std::uint32_t vcc_code) {
  if (vcc_code == 0) throw ZeroReference();
  if (adc_code > vcc_code) return {360.0, true};
  return {static_cast<double>(adc_code) / static_cast<double>(vcc_code) * 360.0, false};
}

inline double raw_to_angle(std::uint32_t adc_code, std::uint32_t vcc_code) {
  return raw_to_angle_checked(adc_code, vcc_code).degrees;
}

/// Inverse of raw_to_angle for emulation; rounds to the nearest code.
inline std::uint32_t angle_to_adc_code(double degrees, std::uint32_t vcc_code) {
  const double code = std::round(degrees / 360.0 * static_cast<double>(vcc_code));
  if (!(code > 0.0)) return 0;
  if (code >= static_cast<double>(vcc_code)) return vcc_code;
  return static_cast<std::uint32_t>(code);
}

/// Servo position ticks, 0..4095 over one turn.
inline double servo_ticks_to_angle(std::uint32_t ticks) {
  if (ticks >= kServoTicks) throw OutOfRange("servo ticks " + std::to_string(ticks) + " outside [0, 4095]");
  return static_cast<double>(ticks) * 360.0 / static_cast<double>(kServoTicks);
}

inline std::uint16_t angle_to_servo_ticks(double degrees) {
  const double t = std::round(degrees * static_cast<double>(kServoTicks) / 360.0);
  if (!(t > 0.0)) return 0;
  if (t >= kServoTicks - 1) return kServoTicks - 1;
  return static_cast<std::uint16_t>(t);
}

}  // namespace dexlink::glove
