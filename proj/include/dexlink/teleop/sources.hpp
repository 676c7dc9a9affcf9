#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "dexlink/glove/assembly.hpp"
#include "dexlink/glove/simulated_glove.hpp"
#include "dexlink/glove/wire.hpp"

namespace dexlink::teleop {

/// Producer of glove joint states. `poll(now)` ingests everything the
/// source produced up to `now` and returns the freshest state.
class GloveSource {
 public:
  virtual ~GloveSource() = default;
  virtual std::optional<glove::GloveJointState> poll(std::int64_t now_ns) = 0;
  virtual bool connected() const = 0;
  /// Latest raw servo ticks (the force-feedback hold targets).
  virtual std::array<std::uint16_t, glove::kServoChannels> servo_ticks() const = 0;
};

/// Full emulated sensing path: simulated glove -> wire bytes -> streaming
/// decoder -> calibration -> joint state. Stops producing (disconnects)
/// after `stop_after_ns` when set.
class SimulatedGloveSource final : public GloveSource {
 public:
  SimulatedGloveSource(const kin::HandModel& glove_model, glove::SimulatedGlove glove, glove::GloveCalibration calibration,
                       std::optional<std::int64_t> stop_after_ns = std::nullopt)
      : model_(glove_model), glove_(std::move(glove)), calibration_(std::move(calibration)), stop_after_ns_(stop_after_ns) {}

  std::optional<glove::GloveJointState> poll(std::int64_t now_ns) override {
    while (connected_ && glove_.tick_time_ns(glove_.tick()) <= now_ns) {
      if (stop_after_ns_ && glove_.tick_time_ns(glove_.tick()) > *stop_after_ns_) {
        connected_ = false;
        break;
      }
      const glove::GloveSample s = glove_.next();
      pending_.push_back(s);
      const auto bytes = glove::encode_frame(s.frame);
      decoder_.feed(bytes);
      while (auto frame = decoder_.next()) {
        // Servo readings travel beside the encoder frame; pair by seq.
        while (!pending_.empty() && pending_.front().frame.seq != frame->seq) pending_.pop_front();
        if (pending_.empty()) continue;
        const glove::GloveSample& paired = pending_.front();
        latest_ = glove::assemble_glove_state(model_, glove_.channels(), *frame, paired.servos, calibration_,
                                              paired.timestamp_ns);
        servos_ = paired.servos.positions;
        pending_.pop_front();
      }
    }
    return latest_;
  }

  bool connected() const override { return connected_; }
  std::array<std::uint16_t, glove::kServoChannels> servo_ticks() const override { return servos_; }
  const glove::FrameDecoder::Stats& decoder_stats() const { return decoder_.stats(); }

 private:
  const kin::HandModel& model_;
  glove::SimulatedGlove glove_;
  glove::GloveCalibration calibration_;
  std::optional<std::int64_t> stop_after_ns_;
  glove::FrameDecoder decoder_;
  std::deque<glove::GloveSample> pending_;
  std::optional<glove::GloveJointState> latest_;
  std::array<std::uint16_t, glove::kServoChannels> servos_{};
  bool connected_ = true;
};

/// Glove pose set directly (operator console sliders). Clamped to limits.
class VirtualGloveSource final : public GloveSource {
 public:
  explicit VirtualGloveSource(const kin::HandModel& glove_model)
      : model_(glove_model), q_(glove_model.dof_count()) {}

  void set_q(const kin::JointVector& q) {
    std::lock_guard lock(mu_);
    q_ = kin::clamp_to_limits(model_, q);
    ++seq_;
  }

  std::optional<glove::GloveJointState> poll(std::int64_t now_ns) override {
    std::lock_guard lock(mu_);
    glove::GloveJointState s;
    s.q = q_;
    s.timestamp_ns = now_ns;
    s.seq = seq_;
    return s;
  }

  bool connected() const override { return true; }

  std::array<std::uint16_t, glove::kServoChannels> servo_ticks() const override {
    std::lock_guard lock(mu_);
    std::array<std::uint16_t, glove::kServoChannels> out{};
    const glove::ChannelMap channels(model_);
    for (std::size_t ch = 0; ch < glove::kServoChannels; ++ch) {
      out[ch] = glove::angle_to_servo_ticks(q_[channels.servo_joint(ch)] * glove::kRadToDeg + 180.0);
    }
    return out;
  }

 private:
  const kin::HandModel& model_;
  mutable std::mutex mu_;
  kin::JointVector q_;
  std::uint32_t seq_ = 0;
};

/// Runs a simulated-clock source on its own thread at its native rate and
/// keeps only the newest state (newest-wins). poll() never blocks on the
/// producer beyond a short slot lock.
class ThreadedGloveSource final : public GloveSource {
 public:
  ThreadedGloveSource(std::unique_ptr<GloveSource> inner, double rate_hz)
      : inner_(std::move(inner)), period_(std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / rate_hz))) {
    worker_ = std::thread([this] { run(); });
  }
  ~ThreadedGloveSource() override {
    stop_ = true;
    if (worker_.joinable()) worker_.join();
  }
  ThreadedGloveSource(const ThreadedGloveSource&) = delete;
  ThreadedGloveSource& operator=(const ThreadedGloveSource&) = delete;

  std::optional<glove::GloveJointState> poll(std::int64_t) override {
    std::lock_guard lock(mu_);
    return latest_;
  }
  bool connected() const override { return connected_; }
  std::array<std::uint16_t, glove::kServoChannels> servo_ticks() const override {
    std::lock_guard lock(mu_);
    return servos_;
  }

 private:
  void run() {
    const auto start = std::chrono::steady_clock::now();
    auto next = start;
    while (!stop_) {
      const auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
      auto s = inner_->poll(elapsed.count());
      {
        std::lock_guard lock(mu_);
        if (s) latest_ = std::move(s);
        servos_ = inner_->servo_ticks();
      }
      if (!inner_->connected()) {
        connected_ = false;
        return;
      }
      next += period_;
      std::this_thread::sleep_until(next);
    }
  }

  std::unique_ptr<GloveSource> inner_;
  std::chrono::nanoseconds period_;
  mutable std::mutex mu_;
  std::optional<glove::GloveJointState> latest_;
  std::array<std::uint16_t, glove::kServoChannels> servos_{};
  std::atomic<bool> connected_{true};
  std::atomic<bool> stop_{false};
  std::thread worker_;
};

/// Wrist pose provider (stands in for an external tracker).
class PoseSource {
 public:
  virtual ~PoseSource() = default;
  virtual kin::Transform at(double t_seconds) const = 0;
};

class ConstantPose final : public PoseSource {
 public:
  explicit ConstantPose(kin::Transform pose = {}) : pose_(pose) {}
  kin::Transform at(double) const override { return pose_; }

 private:
  kin::Transform pose_;
};

/// Keyframed wrist trajectory: translation interpolated linearly, rotation
/// by slerp. Held constant outside the keyframe span.
class ScriptedPose final : public PoseSource {
 public:
  struct Keyframe {
    double t = 0.0;
    kin::Transform pose;
  };

  explicit ScriptedPose(std::vector<Keyframe> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) throw ValidationError("wrist trajectory has no keyframes");
    for (std::size_t i = 1; i < frames_.size(); ++i) {
      if (!(frames_[i].t > frames_[i - 1].t)) throw ValidationError("wrist keyframe times must increase");
    }
  }

  kin::Transform at(double t) const override {
    if (t <= frames_.front().t) return frames_.front().pose;
    if (t >= frames_.back().t) return frames_.back().pose;
    std::size_t i = 1;
    while (frames_[i].t < t) ++i;
    const Keyframe& a = frames_[i - 1];
    const Keyframe& b = frames_[i];
    const double u = (t - a.t) / (b.t - a.t);
    kin::Transform out;
    out.translation = a.pose.translation + u * (b.pose.translation - a.pose.translation);
    out.rotation = Eigen::Quaterniond(a.pose.rotation).slerp(u, Eigen::Quaterniond(b.pose.rotation)).toRotationMatrix();
    return out;
  }

 private:
  std::vector<Keyframe> frames_;
};

}  // namespace dexlink::teleop
