#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "dexlink/teleop/control_loop.hpp"

// JSON messages exchanged with operator consoles. See docs/protocol.md.

namespace dexlink::teleop {

inline nlohmann::json snapshot_message(const Snapshot& s) {
  using nlohmann::json;
  json feedback = json::array();
  json detail = json::array();
  for (const auto& f : s.feedback) {
    feedback.push_back(haptic::class_name(f.feedback_class));
    detail.push_back({{"finger", kin::finger_name(f.finger)},
                      {"kp", f.servo_kp},
                      {"goal", f.servo_goal},
                      {"haptic", f.haptic_active},
                      {"waveform", f.waveform_id}});
  }
  return json{{"type", "snapshot"},
              {"tick", s.tick},
              {"t", static_cast<double>(s.t_ns) * 1e-9},
              {"t_ns", s.t_ns},
              {"glove_q", s.glove_q},
              {"robot_q", s.robot_q},
              {"robot_q_actual", s.robot_q_actual},
              {"forces", s.forces},
              {"feedback", std::move(feedback)},
              {"feedback_detail", std::move(detail)},
              {"residuals", s.residuals},
              {"ik_iterations", s.ik_iterations},
              {"glove_warning", s.glove_warning},
              {"config_hash", s.config_hash},
              {"scenario", s.scenario}};
}

inline std::string error_message(std::string_view reason) {
  return nlohmann::json{{"type", "error"}, {"reason", reason}}.dump();
}

inline std::string ack_message(std::string_view command) {
  return nlohmann::json{{"type", "ack"}, {"command", command}}.dump();
}

struct ProtocolError {
  std::string reason;
};
using ParsedMessage = std::variant<LoopCommand, ProtocolError>;

namespace detail {

inline bool valid_scenario_name(const std::string& name) {
  return !name.empty() && name.size() <= 64 && std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

inline ParsedMessage parse_set_glove_q(const nlohmann::json& j, const ControlLoop& loop) {
  if (!loop.accepts_glove_q()) return ProtocolError{"glove input is not virtual"};
  if (!j.contains("q") || !j.at("q").is_array()) return ProtocolError{"set_glove_q needs an array 'q'"};
  const auto& arr = j.at("q");
  const std::size_t dof = loop.glove_model().dof_count();
  if (arr.size() != dof) return ProtocolError{DimensionMismatch(dof, arr.size()).what()};
  kin::JointVector q(dof);
  for (std::size_t i = 0; i < dof; ++i) {
    if (!arr[i].is_number()) return ProtocolError{"q[" + std::to_string(i) + "] is not a number"};
    q[i] = arr[i].get<double>();
  }
  if (!q.all_finite()) return ProtocolError{"q must be finite"};
  return LoopCommand{SetGloveQ{std::move(q)}};
}

inline ParsedMessage parse_set_config(const nlohmann::json& j, const ControlLoop& loop) {
  const DaemonConfig current = loop.config();
  SetConfig c{current.retarget, current.feedback};
  try {
    if (j.contains("scale")) c.retarget.scale = j.at("scale").get<double>();
    if (j.contains("damping")) c.retarget.damping = j.at("damping").get<double>();
    if (j.contains("thresholds")) c.feedback.thresholds.edges = j.at("thresholds").get<std::array<double, 3>>();
    if (j.contains("kp_max")) c.feedback.kp_max = j.at("kp_max").get<double>();
    if (j.contains("hysteresis_g")) c.feedback.hysteresis_g = j.at("hysteresis_g").get<double>();
    c.retarget.validate();
    c.feedback.validate();
  } catch (const nlohmann::json::exception& e) {
    return ProtocolError{std::string("set_config: ") + e.what()};
  } catch (const Error& e) {
    return ProtocolError{e.what()};
  }
  return LoopCommand{std::move(c)};
}

inline ParsedMessage parse_scenario(const nlohmann::json& j, const ControlLoop& loop) {
  if (!j.contains("name") || !j.at("name").is_string()) return ProtocolError{"scenario needs a string 'name'"};
  const std::string name = j.at("name").get<std::string>();
  if (!valid_scenario_name(name)) return ProtocolError{"invalid scenario name"};
  const std::string path = loop.config().scenario_path(name);
  if (!std::filesystem::exists(path)) return ProtocolError{"unknown scenario '" + name + "'"};
  try {
    sim::SimState s = sim::scenario_load_file(path, loop.robot_model());
    return LoopCommand{LoadScenario{name, std::move(s.objects)}};
  } catch (const Error& e) {
    return ProtocolError{e.what()};
  }
}

}  // namespace detail

/// Parses and validates one client message against the loop's current
/// models and config. Never throws.
inline ParsedMessage parse_client_message(std::string_view text, const ControlLoop& loop) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return ProtocolError{"message is not valid JSON"};
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    return ProtocolError{"message needs a string 'type'"};
  }
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "set_glove_q") return detail::parse_set_glove_q(j, loop);
    if (type == "set_config") return detail::parse_set_config(j, loop);
    if (type == "scenario") return detail::parse_scenario(j, loop);
  } catch (const std::exception& e) {
    return ProtocolError{e.what()};
  }
  return ProtocolError{"unknown message type '" + type + "'"};
}

/// Parses, enqueues on success, and returns the reply to send back.
inline std::string handle_client_message(std::string_view text, ControlLoop& loop) {
  ParsedMessage m = parse_client_message(text, loop);
  if (auto* err = std::get_if<ProtocolError>(&m)) return error_message(err->reason);
  LoopCommand& c = std::get<LoopCommand>(m);
  const char* name = std::holds_alternative<SetGloveQ>(c) ? "set_glove_q"
                     : std::holds_alternative<SetConfig>(c) ? "set_config"
                                                            : "scenario";
  loop.enqueue(std::move(c));
  return ack_message(name);
}

}  // namespace dexlink::teleop
