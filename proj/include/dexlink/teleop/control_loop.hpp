#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>
#include <vector>

#include "dexlink/haptic/feedback.hpp"
#include "dexlink/retarget/retarget.hpp"
#include "dexlink/sim/simulator.hpp"
#include "dexlink/teleop/config.hpp"
#include "dexlink/teleop/demo_log.hpp"
#include "dexlink/teleop/sources.hpp"

namespace dexlink::teleop {

/// Immutable view of one control tick, handed to observers.
struct Snapshot {
  std::uint64_t tick = 0;
  std::int64_t t_ns = 0;
  std::vector<double> glove_q;
  std::vector<double> robot_q;       // commanded
  std::vector<double> robot_q_actual;
  std::array<double, kin::kFingerCount> forces{};
  std::array<haptic::FeedbackCommand, kin::kFingerCount> feedback{};
  std::array<double, kin::kFingerCount> residuals{};
  int ik_iterations = 0;
  bool glove_warning = false;
  std::string config_hash;
  std::string scenario;
};

// Commands arrive already validated; applying them cannot fail.
struct SetGloveQ {
  kin::JointVector q;
};
struct SetConfig {
  retarget::RetargetConfig retarget;
  haptic::FeedbackParams feedback;
};
struct LoadScenario {
  std::string name;
  std::vector<sim::SceneObject> objects;
};
using LoopCommand = std::variant<SetGloveQ, SetConfig, LoadScenario>;

enum class ExitStatus { completed, source_disconnected, stopped };

inline std::string_view exit_status_name(ExitStatus s) {
  switch (s) {
    case ExitStatus::completed: return "completed";
    case ExitStatus::source_disconnected: return "source_disconnected";
    case ExitStatus::stopped: return "stopped";
  }
  return "unknown";
}

struct RunResult {
  ExitStatus status = ExitStatus::completed;
  std::uint64_t ticks = 0;
  std::vector<double> tick_latency_s;  // wall clock only
};

/// Single-owner control state: retargeting, simulator and per-finger
/// feedback advance only inside tick(). Other threads talk to it through
/// the command queue and observe it through published snapshots.
class ControlLoop {
 public:
  using Observer = std::function<void(const Snapshot&)>;

  ControlLoop(std::shared_ptr<const kin::HandModel> glove_model, std::shared_ptr<const kin::HandModel> robot_model,
              DaemonConfig config, sim::SimState initial, std::unique_ptr<GloveSource> glove,
              std::unique_ptr<PoseSource> wrist = std::make_unique<ConstantPose>())
      : glove_model_(std::move(glove_model)),
        robot_model_(std::move(robot_model)),
        config_(std::move(config)),
        sim_(std::move(initial)),
        glove_(std::move(glove)),
        wrist_(std::move(wrist)),
        feedback_(config_.feedback) {
    config_.loop.validate();
    config_.retarget.validate();
    if (sim_.q_actual.size() != robot_model_->dof_count()) {
      throw DimensionMismatch(robot_model_->dof_count(), sim_.q_actual.size());
    }
    last_glove_.q = kin::clamp_to_limits(*glove_model_, kin::JointVector(glove_model_->dof_count()));
    hash_ = config_hash(to_json(config_));
  }

  const kin::HandModel& glove_model() const { return *glove_model_; }
  const kin::HandModel& robot_model() const { return *robot_model_; }
  GloveSource& glove_source() { return *glove_; }
  bool accepts_glove_q() const { return dynamic_cast<const VirtualGloveSource*>(glove_.get()) != nullptr; }

  DaemonConfig config() const {
    std::lock_guard lock(config_mu_);
    return config_;
  }
  std::string scenario() const {
    std::lock_guard lock(config_mu_);
    return sim_.scenario;
  }

  void add_observer(Observer o) { observers_.push_back(std::move(o)); }

  /// Thread-safe; takes effect at the start of the next tick.
  void enqueue(LoopCommand c) {
    std::lock_guard lock(queue_mu_);
    queue_.push_back(std::move(c));
  }

  /// Every following tick appends one record.
  void start_recording(const std::string& path) {
    DemoHeader h;
    h.glove_model = glove_model_->name();
    h.robot_model = robot_model_->name();
    h.glove_dof = glove_model_->dof_count();
    h.robot_dof = robot_model_->dof_count();
    h.config_hash = hash_;
    h.scenario = sim_.scenario;
    writer_.emplace(path, h);
  }
  void stop_recording() { writer_.reset(); }

  /// One control tick at time `now_ns`. Returns nullopt once the glove
  /// source has disconnected.
  std::optional<Snapshot> tick(std::int64_t now_ns) {
    drain_commands();
    auto state = glove_->poll(now_ns);
    if (!glove_->connected()) return std::nullopt;
    if (state) last_glove_ = std::move(*state);

    const double dt = 1.0 / config_.loop.control_rate;
    retarget::RobotCommand cmd =
        retarget::retarget_step(*glove_model_, *robot_model_, last_glove_, sim_.q_target, config_.retarget);
    cmd.timestamp_ns = now_ns;
    sim_ = sim::step(sim_, cmd, dt, config_.loop.omega_max);
    sim_.time = static_cast<double>(now_ns) * 1e-9;
    const auto forces = sim::contact_forces(sim_, *robot_model_);
    const auto feedback = feedback_.update(forces, glove_->servo_ticks());

    Snapshot s;
    s.tick = tick_count_++;
    s.t_ns = now_ns;
    s.glove_q = last_glove_.q.to_std();
    s.robot_q = cmd.q_robot.to_std();
    s.robot_q_actual = sim_.q_actual.to_std();
    for (std::size_t i = 0; i < kin::kFingerCount; ++i) s.forces[i] = forces[i].grams;
    s.feedback = feedback;
    s.residuals = cmd.residuals;
    s.ik_iterations = cmd.iterations_used;
    s.glove_warning = last_glove_.warning();
    s.config_hash = hash_;
    s.scenario = sim_.scenario;

    if (writer_) {
      DemoRecord r;
      r.t_ns = now_ns;
      r.glove_q = s.glove_q;
      r.robot_q = s.robot_q;
      r.forces = s.forces;
      for (std::size_t i = 0; i < kin::kFingerCount; ++i) r.feedback[i] = feedback[i].feedback_class;
      r.wrist_pose = wrist_->at(static_cast<double>(now_ns) * 1e-9);
      writer_->append(r);
    }
    for (const auto& o : observers_) o(s);
    return s;
  }

  /// Simulated clock: tick k happens at exactly round(k / control_rate)
  /// seconds and nothing depends on wall time. Wall clock: ticks are paced
  /// by steady_clock and each tick's processing latency is recorded.
  /// `unbounded` ignores duration_s and runs until `stop` is set.
  RunResult run(const std::atomic<bool>* stop = nullptr, bool unbounded = false) {
    RunResult result;
    const double rate = config_.loop.control_rate;
    const auto n_ticks = static_cast<std::uint64_t>(std::floor(config_.loop.duration_s * rate + 1e-9)) + 1;
    const bool wall = config_.loop.clock == ClockMode::wall;
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t k = 0; unbounded || k < n_ticks; ++k) {
      if (stop && stop->load()) {
        result.status = ExitStatus::stopped;
        break;
      }
      const auto now_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1e9 / rate));
      if (wall) std::this_thread::sleep_until(start + std::chrono::nanoseconds(now_ns));
      const auto t0 = std::chrono::steady_clock::now();
      const auto s = tick(now_ns);
      if (wall && !unbounded) result.tick_latency_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (!s) {
        result.status = ExitStatus::source_disconnected;
        break;
      }
      ++result.ticks;
    }
    writer_.reset();
    return result;
  }

 private:
  void drain_commands() {
    std::deque<LoopCommand> pending;
    {
      std::lock_guard lock(queue_mu_);
      pending.swap(queue_);
    }
    for (auto& c : pending) {
      std::visit([this](auto& cmd) { apply(cmd); }, c);
    }
  }

  void apply(SetGloveQ& c) {
    if (auto* v = dynamic_cast<VirtualGloveSource*>(glove_.get())) v->set_q(c.q);
  }
  void apply(SetConfig& c) {
    std::lock_guard lock(config_mu_);
    config_.retarget = c.retarget;
    config_.feedback = c.feedback;
    feedback_.set_params(c.feedback);
    hash_ = config_hash(to_json(config_));
  }
  void apply(LoadScenario& c) {
    std::lock_guard lock(config_mu_);
    sim_.objects = std::move(c.objects);
    sim_.scenario = c.name;
    config_.models.scenario = c.name;
    feedback_.reset();
    hash_ = config_hash(to_json(config_));
  }

  std::shared_ptr<const kin::HandModel> glove_model_;
  std::shared_ptr<const kin::HandModel> robot_model_;
  mutable std::mutex config_mu_;
  DaemonConfig config_;
  sim::SimState sim_;
  std::unique_ptr<GloveSource> glove_;
  std::unique_ptr<PoseSource> wrist_;
  haptic::HandFeedback feedback_;
  glove::GloveJointState last_glove_;
  std::string hash_;
  std::uint64_t tick_count_ = 0;
  std::optional<DemoWriter> writer_;
  std::vector<Observer> observers_;
  std::mutex queue_mu_;
  std::deque<LoopCommand> queue_;
};

/// Recomputes the per-finger feedback classes of a log from its forces
/// alone, with fresh hysteresis state.
inline std::vector<std::array<haptic::FeedbackClass, kin::kFingerCount>> recompute_feedback(
    const DemoLog& log, const haptic::FeedbackParams& params) {
  std::array<haptic::FingerFeedback, kin::kFingerCount> fingers{
      haptic::FingerFeedback(kin::FingerId::thumb, params), haptic::FingerFeedback(kin::FingerId::index, params),
      haptic::FingerFeedback(kin::FingerId::middle, params), haptic::FingerFeedback(kin::FingerId::ring, params),
      haptic::FingerFeedback(kin::FingerId::pinky, params)};
  std::vector<std::array<haptic::FeedbackClass, kin::kFingerCount>> out;
  out.reserve(log.records.size());
  for (const DemoRecord& r : log.records) {
    std::array<haptic::FeedbackClass, kin::kFingerCount> row{};
    for (std::size_t i = 0; i < kin::kFingerCount; ++i) row[i] = fingers[i].update_class(r.forces[i]);
    out.push_back(row);
  }
  return out;
}

}  // namespace dexlink::teleop
