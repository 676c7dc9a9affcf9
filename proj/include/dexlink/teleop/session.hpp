#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "dexlink/glove/calibration.hpp"
#include "dexlink/glove/pose_script.hpp"
#include "dexlink/glove/simulated_glove.hpp"
#include "dexlink/kinematics/model_loader.hpp"
#include "dexlink/teleop/control_loop.hpp"

namespace dexlink::teleop {

enum class GloveInput {
  simulated,  // scripted pose through the full emulated sensing path
  virtual_q,  // joint vector set directly by clients
};

struct Models {
  std::shared_ptr<const kin::HandModel> glove;
  std::shared_ptr<const kin::HandModel> robot;
};

inline Models load_models(const DaemonConfig& c) {
  return {std::make_shared<const kin::HandModel>(kin::load_hand_model_file(c.resolve(c.models.glove))),
          std::make_shared<const kin::HandModel>(kin::load_hand_model_file(c.resolve(c.models.robot)))};
}

inline glove::PoseFunction pose_function(const DaemonConfig& c, const kin::HandModel& glove_model) {
  if (c.loop.pose_script.empty()) return glove::PoseScript::constant(kin::JointVector(glove_model.dof_count())).as_function();
  return glove::PoseScript::load_csv(c.resolve(c.loop.pose_script)).as_function();
}

inline glove::SimulatedGlove simulated_glove(const DaemonConfig& c, const kin::HandModel& glove_model) {
  return glove::SimulatedGlove(glove_model, pose_function(c, glove_model),
                               glove::NonlinearityModel(c.loop.noise_fraction, c.loop.noise_seed), c.loop.mocap_rate);
}

/// Zero offsets (degrees) as the glove reports them at the flat hand.
inline std::array<double, glove::kGloveDof> zero_offsets(const glove::SimulatedGlove& g,
                                                         const glove::GloveCalibration& cal) {
  std::array<double, glove::kGloveDof> out{};
  const glove::GloveSample s = g.sample_pose(kin::JointVector(glove::kGloveDof), 0);
  const auto& channels = g.channels();
  for (std::size_t ch = 0; ch < glove::kEncoderChannels; ++ch) {
    out[channels.encoder_joint(ch)] =
        cal.tables[ch].apply(glove::raw_to_angle(s.frame.adc_codes[ch], s.frame.vcc_code));
  }
  for (std::size_t ch = 0; ch < glove::kServoChannels; ++ch) {
    out[channels.servo_joint(ch)] = glove::servo_ticks_to_angle(s.servos.positions[ch]);
  }
  return out;
}

/// Calibration document named by the config, or when none is named, a
/// fresh fit against the emulated glove (tables plus zero offsets read at
/// the flat hand).
inline glove::GloveCalibration calibration_for(const DaemonConfig& c, const kin::HandModel& glove_model) {
  if (!c.models.calibration.empty()) {
    const std::string path = c.resolve(c.models.calibration);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calibration '" + path + "'");
    try {
      return glove::glove_calibration_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("calibration is not valid JSON: ") + e.what());
    }
  }
  const glove::SimulatedGlove g = simulated_glove(c, glove_model);
  glove::GloveCalibration cal = glove::GloveCalibration::identity();
  cal.tables = glove::calibrate_all_channels(g);
  cal.zero_offsets_deg = zero_offsets(g, cal);
  return cal;
}

struct SessionOptions {
  GloveInput input = GloveInput::simulated;
  std::optional<std::string> scenario;          // overrides models.scenario
  std::optional<std::int64_t> glove_stop_ns;    // simulated glove goes silent after this
};

inline std::unique_ptr<ControlLoop> make_control_loop(DaemonConfig config, const SessionOptions& opt = {}) {
  if (opt.scenario) config.models.scenario = *opt.scenario;
  const Models m = load_models(config);
  sim::SimState initial = sim::scenario_load_file(config.scenario_path(config.models.scenario), *m.robot);
  initial.scenario = config.models.scenario;
  std::unique_ptr<GloveSource> source;
  if (opt.input == GloveInput::virtual_q) {
    source = std::make_unique<VirtualGloveSource>(*m.glove);
  } else {
    source = std::make_unique<SimulatedGloveSource>(*m.glove, simulated_glove(config, *m.glove),
                                                    calibration_for(config, *m.glove), opt.glove_stop_ns);
  }
  return std::make_unique<ControlLoop>(m.glove, m.robot, std::move(config), std::move(initial), std::move(source));
}

}  // namespace dexlink::teleop
