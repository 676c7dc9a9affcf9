#pragma once

#include <array>
#include <string>

#include "json.hpp"
#include "dexlink/kinematics/hand_model.hpp"

// Generators for the two bundled hand descriptions. Base frame convention:
// +x points along the extended fingers, +y toward the thumb, +z out of the
// back of the hand. Flexion (positive angle about +y) curls toward -z.

namespace dexlink::kin {

/// Segment lengths in meters. Defaults approximate an adult hand.
struct HandDimensions {
  double proximal = 0.045;
  double middle = 0.025;
  double distal = 0.020;
  double thumb_metacarpal = 0.050;
  double thumb_proximal = 0.040;
  double thumb_distal = 0.030;
};

namespace layout {

using nlohmann::json;

struct FingerBase {
  const char* name;
  std::array<double, 3> mcp;
};

// MCP joint centers of the four fingers.
inline constexpr std::array<FingerBase, 4> kFingerBases = {{
    {"index", {0.085, 0.025, 0.0}},
    {"middle", {0.090, 0.005, 0.0}},
    {"ring", {0.085, -0.015, 0.0}},
    {"pinky", {0.075, -0.033, 0.0}},
}};

inline constexpr std::array<double, 3> kThumbBase = {0.020, 0.020, -0.020};
inline constexpr std::array<double, 3> kThumbBaseRpy = {0.0, 0.35, 0.6};

inline json xyz(double s, double x, double y = 0.0, double z = 0.0) { return json::array({s * x, s * y, s * z}); }

inline json joint(const std::string& name, const char* kind, json axis, json origin_xyz, json origin_rpy,
                  double lo, double hi) {
  return json{{"name", name},
              {"kind", kind},
              {"axis", std::move(axis)},
              {"origin", {{"rpy", std::move(origin_rpy)}, {"xyz", std::move(origin_xyz)}}},
              {"limits", json::array({lo, hi})}};
}

inline json link(const std::string& name, const std::string& parent, json joint_doc) {
  return json{{"name", name}, {"parent", parent}, {"joint", std::move(joint_doc)}};
}

inline const json kY = json::array({0.0, 1.0, 0.0});
inline const json kZ = json::array({0.0, 0.0, 1.0});
inline const json kX = json::array({1.0, 0.0, 0.0});
inline const json kNoRot = json::array({0.0, 0.0, 0.0});

/// Four-joint finger: MCP ball joint (B = flexion, then S = abduction), PIP, DIP.
inline void add_finger(json& links, json& tips, const FingerBase& base, const HandDimensions& d, double s) {
  const std::string f = base.name;
  const std::string parent = links[0]["name"];
  links.push_back(link(f + "_mcp_b_link", parent,
                       joint(f + "_mcp_b", "ball_component", kY,
                             json::array({s * base.mcp[0], s * base.mcp[1], s * base.mcp[2]}), kNoRot, -0.35, 1.57)));
  links.push_back(link(f + "_proximal", f + "_mcp_b_link",
                       joint(f + "_mcp_s", "ball_component", kZ, xyz(s, 0.0), kNoRot, -0.35, 0.35)));
  links.push_back(link(f + "_middle", f + "_proximal",
                       joint(f + "_pip", "hinge", kY, xyz(s, d.proximal), kNoRot, 0.0, 1.8)));
  links.push_back(link(f + "_distal", f + "_middle",
                       joint(f + "_dip", "hinge", kY, xyz(s, d.middle), kNoRot, 0.0, 1.4)));
  tips[f] = json{{"link", f + "_distal"}, {"xyz", xyz(s, d.distal)}, {"rpy", kNoRot}};
}

/// Thumb after the optional pronation joint: TM ball joint, MCP and IP hinges.
inline void add_thumb_tail(json& links, json& tips, const std::string& parent, json tm_xyz, json tm_rpy,
                           const HandDimensions& d, double s) {
  links.push_back(link("thumb_tm_b_link", parent,
                       joint("thumb_tm_b", "ball_component", kY, std::move(tm_xyz), std::move(tm_rpy), -0.4, 1.2)));
  links.push_back(link("thumb_metacarpal", "thumb_tm_b_link",
                       joint("thumb_tm_s", "ball_component", kZ, xyz(s, 0.0), kNoRot, -0.8, 0.8)));
  links.push_back(link("thumb_proximal", "thumb_metacarpal",
                       joint("thumb_mcp", "hinge", kY, xyz(s, d.thumb_metacarpal), kNoRot, -0.2, 1.0)));
  links.push_back(link("thumb_distal", "thumb_proximal",
                       joint("thumb_ip", "hinge", kY, xyz(s, d.thumb_proximal), kNoRot, -0.2, 1.3)));
  tips["thumb"] = json{{"link", "thumb_distal"}, {"xyz", xyz(s, d.thumb_distal)}, {"rpy", kNoRot}};
}

}  // namespace layout

/// 21-DoF glove: thumb pronation + TM(B+S) + MCP + IP, and MCP(B+S) + PIP +
/// DIP on each of the four fingers. Joint order: thumb first, then index to
/// pinky.
inline nlohmann::json glove21_document(const HandDimensions& d = {}) {
  using namespace layout;
  json links = json::array();
  links.push_back(json{{"name", "glove_base"}, {"parent", nullptr}});
  json tips = json::object();
  const auto& tb = kThumbBase;
  const auto& tr = kThumbBaseRpy;
  links.push_back(link("thumb_rot_link", "glove_base",
                       joint("thumb_rot", "hinge", kX, json::array({tb[0], tb[1], tb[2]}),
                             json::array({tr[0], tr[1], tr[2]}), -0.5, 0.5)));
  add_thumb_tail(links, tips, "thumb_rot_link", xyz(1.0, 0.0), kNoRot, d, 1.0);
  for (const auto& base : kFingerBases) add_finger(links, tips, base, d, 1.0);
  return json{{"name", "glove21"},
              {"comment",
               "thumb_rot (wrist pronation-supination) has no published sensor assignment; it is read "
               "from encoder channel 16 (index 15)"},
              {"links", std::move(links)},
              {"fingertips", std::move(tips)}};
}

/// 16-DoF four-finger robot hand in LEAP joint order (index, middle, ring,
/// thumb; four joints each), dimensions `scale` times the glove's. The
/// thumb has no pronation joint and the pinky fingertip frame is a fixed
/// point on the palm.
inline nlohmann::json leaphand16_document(double scale = 1.3, const HandDimensions& d = {}) {
  using namespace layout;
  json links = json::array();
  links.push_back(json{{"name", "palm"}, {"parent", nullptr}});
  json tips = json::object();
  for (std::size_t i = 0; i < 3; ++i) add_finger(links, tips, kFingerBases[i], d, scale);
  const auto& tb = kThumbBase;
  const auto& tr = kThumbBaseRpy;
  add_thumb_tail(links, tips, "palm", json::array({scale * tb[0], scale * tb[1], scale * tb[2]}),
                 json::array({tr[0], tr[1], tr[2]}), d, scale);
  const auto& pinky = kFingerBases[3].mcp;
  tips["pinky"] = json{{"link", "palm"}, {"xyz", json::array({scale * pinky[0], scale * pinky[1], scale * pinky[2]})},
                       {"rpy", kNoRot}};
  return json{{"name", "leaphand16"},
              {"comment", "generic 16-DoF four-finger hand; the pinky target is not actuated"},
              {"links", std::move(links)},
              {"fingertips", std::move(tips)}};
}

}  // namespace dexlink::kin
