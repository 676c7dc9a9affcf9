#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"
#include "dexlink/error.hpp"
#include "dexlink/haptic/feedback.hpp"
#include "dexlink/retarget/config.hpp"
#include "dexlink/sim/simulator.hpp"

namespace dexlink::teleop {

enum class ClockMode { wall, simulated };

struct LoopConfig {
  double mocap_rate = 120.0;
  double control_rate = 30.0;
  ClockMode clock = ClockMode::simulated;
  double duration_s = 6.0;
  std::string pose_script;  // CSV path; empty = hold the zero pose
  double noise_fraction = 0.02;
  std::uint64_t noise_seed = 7;
  double omega_max = sim::kDefaultOmegaMax;

  void validate() const {
    if (!(control_rate >= 30.0)) throw ValidationError("loop.control_rate must be >= 30 Hz");
    if (!(mocap_rate >= control_rate)) throw ValidationError("loop.mocap_rate must be >= control_rate");
    if (!(mocap_rate <= 120.0)) throw ValidationError("loop.mocap_rate must be <= 120 Hz");
    if (!(duration_s > 0.0)) throw ValidationError("loop.duration_s must be > 0");
    if (!(omega_max > 0.0)) throw ValidationError("loop.omega_max must be > 0");
  }
};

struct ModelPaths {
  std::string glove = "models/glove21.hand.json";
  std::string robot = "models/leaphand16.hand.json";
  std::string scenario_dir = "scenarios";
  std::string calibration;  // empty = identity tables, 180 deg zero offsets
  std::string scenario = "grasp_bottle";
};

struct ServeConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;
};

/// The daemon's configuration document: sections models, retarget,
/// feedback, loop, serve. Relative paths resolve against the document's
/// directory.
struct DaemonConfig {
  ModelPaths models;
  retarget::RetargetConfig retarget;
  haptic::FeedbackParams feedback;
  LoopConfig loop;
  ServeConfig serve;

  std::string resolve(const std::string& path) const {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return p.string();
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
  }

  std::string scenario_path(const std::string& name) const {
    return resolve((std::filesystem::path(models.scenario_dir) / (name + ".json")).string());
  }

  std::string base_dir;
};

inline nlohmann::json to_json(const DaemonConfig& c) {
  using nlohmann::json;
  return json{{"models",
               {{"glove", c.models.glove},
                {"robot", c.models.robot},
                {"scenario_dir", c.models.scenario_dir},
                {"calibration", c.models.calibration},
                {"scenario", c.models.scenario}}},
              {"retarget", retarget::to_json(c.retarget)},
              {"feedback", haptic::to_json(c.feedback)},
              {"loop",
               {{"mocap_rate", c.loop.mocap_rate},
                {"control_rate", c.loop.control_rate},
                {"clock", c.loop.clock == ClockMode::wall ? "wall" : "simulated"},
                {"duration_s", c.loop.duration_s},
                {"pose_script", c.loop.pose_script},
                {"noise_fraction", c.loop.noise_fraction},
                {"noise_seed", c.loop.noise_seed},
                {"omega_max", c.loop.omega_max}}},
              {"serve", {{"address", c.serve.address}, {"port", c.serve.port}}}};
}

inline DaemonConfig daemon_config_from_json(const nlohmann::json& j, std::string base_dir = {}) {
  DaemonConfig c;
  c.base_dir = std::move(base_dir);
  try {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    if (j.contains("models")) {
      const auto& m = j.at("models");
      c.models.glove = m.value("glove", c.models.glove);
      c.models.robot = m.value("robot", c.models.robot);
      c.models.scenario_dir = m.value("scenario_dir", c.models.scenario_dir);
      c.models.calibration = m.value("calibration", c.models.calibration);
      c.models.scenario = m.value("scenario", c.models.scenario);
    }
    if (j.contains("retarget")) c.retarget = retarget::retarget_config_from_json(j.at("retarget"));
    if (j.contains("feedback")) c.feedback = haptic::feedback_params_from_json(j.at("feedback"));
    if (j.contains("loop")) {
      const auto& l = j.at("loop");
      c.loop.mocap_rate = l.value("mocap_rate", c.loop.mocap_rate);
      c.loop.control_rate = l.value("control_rate", c.loop.control_rate);
      const std::string clock = l.value("clock", std::string("simulated"));
      if (clock == "wall") c.loop.clock = ClockMode::wall;
      else if (clock == "simulated") c.loop.clock = ClockMode::simulated;
      else throw ParseError("loop.clock must be 'wall' or 'simulated'");
      c.loop.duration_s = l.value("duration_s", c.loop.duration_s);
      c.loop.pose_script = l.value("pose_script", c.loop.pose_script);
      c.loop.noise_fraction = l.value("noise_fraction", c.loop.noise_fraction);
      c.loop.noise_seed = l.value("noise_seed", c.loop.noise_seed);
      c.loop.omega_max = l.value("omega_max", c.loop.omega_max);
    }
    if (j.contains("serve")) {
      const auto& s = j.at("serve");
      c.serve.address = s.value("address", c.serve.address);
      c.serve.port = s.value("port", c.serve.port);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.loop.validate();
  return c;
}

inline DaemonConfig load_daemon_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  return daemon_config_from_json(j, std::filesystem::path(path).parent_path().string());
}

/// FNV-1a 64 over the canonical (key-sorted) serialization.
inline std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace dexlink::teleop
