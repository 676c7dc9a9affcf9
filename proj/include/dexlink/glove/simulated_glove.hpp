#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "dexlink/glove/assembly.hpp"
#include "dexlink/glove/pose_script.hpp"

namespace dexlink::glove {

/// Per-channel encoder linearity error: a sinusoid of amplitude
/// `amplitude_fraction` of full scale, pinned to zero at 0 and 360 deg so
/// no reading leaves the ADC range. Harmonic (1..3) and sign are drawn per
/// channel from `seed`.
class NonlinearityModel {
 public:
  NonlinearityModel() { harmonic_.fill(1); sign_.fill(1.0); }

  NonlinearityModel(double amplitude_fraction, std::uint64_t seed) : amplitude_fraction_(amplitude_fraction) {
    if (!(amplitude_fraction >= 0.0 && amplitude_fraction < 0.05)) {
      throw ValidationError("nonlinearity amplitude must lie in [0, 0.05)");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t ch = 0; ch < kEncoderChannels; ++ch) {
      harmonic_[ch] = 1 + static_cast<int>(rng() % 3);
      sign_[ch] = (rng() & 1u) ? 1.0 : -1.0;
    }
  }

  static NonlinearityModel none() { return {}; }

  double amplitude_fraction() const { return amplitude_fraction_; }
  double peak_error_degrees() const { return amplitude_fraction_ * 360.0; }
  int harmonic(std::size_t ch) const { return harmonic_[ch]; }
  double sign(std::size_t ch) const { return sign_[ch]; }

  /// Degrees the encoder reports when the joint is at `true_degrees`.
  double distort(std::size_t channel, double true_degrees) const {
    return true_degrees + sign_[channel] * peak_error_degrees() *
                              std::sin(std::numbers::pi * harmonic_[channel] * true_degrees / 360.0);
  }

 private:
  double amplitude_fraction_ = 0.0;
  std::array<int, kEncoderChannels> harmonic_{};
  std::array<double, kEncoderChannels> sign_{};
};

struct GloveSample {
  std::int64_t timestamp_ns = 0;
  EncoderFrame frame;
  ServoState servos;
};

/// Emulated glove hardware: evaluates a pose function at tick k (t = k /
/// rate exactly) and runs the sensing path backwards to raw ADC codes and
/// servo ticks.
class SimulatedGlove {
 public:
  SimulatedGlove(const kin::HandModel& glove_model, PoseFunction pose, NonlinearityModel noise, double rate_hz,
                 std::array<double, kGloveDof> mechanical_zero_deg = filled(180.0),
                 std::uint32_t vcc_code = kAdcMaxCode)
      : channels_(glove_model),
        pose_(std::move(pose)),
        noise_(noise),
        rate_hz_(rate_hz),
        zero_deg_(mechanical_zero_deg),
        vcc_code_(vcc_code) {
    if (!(rate_hz > 0.0 && rate_hz <= 120.0)) throw InvalidRate("glove rate must lie in (0, 120] Hz");
    if (vcc_code == 0 || vcc_code > kAdcMaxCode) throw ValidationError("vcc code must lie in [1, 2^24 - 1]");
  }

  double rate_hz() const { return rate_hz_; }
  const ChannelMap& channels() const { return channels_; }
  const NonlinearityModel& noise() const { return noise_; }
  std::uint32_t vcc_code() const { return vcc_code_; }
  const std::array<double, kGloveDof>& mechanical_zero_deg() const { return zero_deg_; }

  std::int64_t tick_time_ns(std::uint64_t k) const {
    return static_cast<std::int64_t>(std::llround(static_cast<double>(k) / rate_hz_ * 1e9));
  }

  /// Raw encoder reading (degrees, after ADC quantization) at a true angle.
  double encoder_reading(std::size_t channel, double true_degrees) const {
    return raw_to_angle(angle_to_adc_code(noise_.distort(channel, true_degrees), vcc_code_), vcc_code_);
  }

  GloveSample sample_pose(const kin::JointVector& q, std::uint64_t k) const {
    if (q.size() != kGloveDof) throw DimensionMismatch(kGloveDof, q.size());
    GloveSample s;
    s.timestamp_ns = tick_time_ns(k);
    s.frame.seq = static_cast<std::uint8_t>(k & 0xFF);
    s.frame.vcc_code = vcc_code_;
    for (std::size_t ch = 0; ch < kEncoderChannels; ++ch) {
      const std::size_t j = channels_.encoder_joint(ch);
      const double deg = q[j] * kRadToDeg + zero_deg_[j];
      s.frame.adc_codes[ch] = angle_to_adc_code(noise_.distort(ch, deg), vcc_code_);
    }
    for (std::size_t ch = 0; ch < kServoChannels; ++ch) {
      const std::size_t j = channels_.servo_joint(ch);
      s.servos.positions[ch] = angle_to_servo_ticks(q[j] * kRadToDeg + zero_deg_[j]);
    }
    return s;
  }

  GloveSample sample(std::uint64_t k) const { return sample_pose(pose_(static_cast<double>(k) / rate_hz_), k); }

  /// Next tick of the simulated-clock stream.
  GloveSample next() { return sample(tick_++); }
  std::uint64_t tick() const { return tick_; }

  static std::array<double, kGloveDof> filled(double v) {
    std::array<double, kGloveDof> a{};
    a.fill(v);
    return a;
  }

 private:
  ChannelMap channels_;
  PoseFunction pose_;
  NonlinearityModel noise_;
  double rate_hz_;
  std::array<double, kGloveDof> zero_deg_;
  std::uint32_t vcc_code_;
  std::uint64_t tick_ = 0;
};

/// Fits correction tables for every encoder channel of a simulated glove
/// against its (noise-free) true angles.
inline std::array<CalibrationTable, kEncoderChannels> calibrate_all_channels(const SimulatedGlove& glove,
                                                                              double spacing = 5.0) {
  std::array<CalibrationTable, kEncoderChannels> tables;
  for (std::size_t ch = 0; ch < kEncoderChannels; ++ch) {
    tables[ch] = calibrate_channel([&](double truth) { return glove.encoder_reading(ch, truth); }, spacing);
  }
  return tables;
}

}  // namespace dexlink::glove
