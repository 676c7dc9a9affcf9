#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "dexlink/kinematics/hand_model.hpp"

namespace dexlink::kin {

namespace detail {

using nlohmann::json;

inline Vec3 read_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(std::string(what) + " must be a 3-element array");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw ParseError(std::string(what) + " must hold numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

inline Transform read_pose(const json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be an object");
  Vec3 rpy = Vec3::Zero();
  Vec3 xyz = Vec3::Zero();
  if (j.contains("rpy")) rpy = read_vec3(j.at("rpy"), "rpy");
  if (j.contains("xyz")) xyz = read_vec3(j.at("xyz"), "xyz");
  return Transform::from_rpy_xyz(rpy, xyz);
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 rotation_to_rpy(const Mat3& r) {
  // Inverse of Rz(y) Ry(p) Rx(r).
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

inline json pose_json(const Transform& t) {
  return json{{"rpy", vec3_json(rotation_to_rpy(t.rotation))}, {"xyz", vec3_json(t.translation)}};
}

}  // namespace detail

/// Parses a hand-description document (JSON). Joint index order is the
/// document order of the links that carry a joint.
inline HandModel load_hand_model(std::string_view document) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("hand description is not valid JSON: ") + e.what());
  }

  try {
    if (!doc.is_object()) throw ParseError("hand description must be a JSON object");
    const std::string name = doc.at("name").get<std::string>();
    const json& jlinks = doc.at("links");
    if (!jlinks.is_array() || jlinks.empty()) throw ParseError("'links' must be a non-empty array");

    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < jlinks.size(); ++i) {
      const std::string lname = jlinks[i].at("name").get<std::string>();
      if (!by_name.emplace(lname, i).second) throw ValidationError("link '" + lname + "' is duplicated");
    }

    std::vector<Link> links;
    std::vector<JointSpec> joints;
    for (std::size_t i = 0; i < jlinks.size(); ++i) {
      const json& jl = jlinks[i];
      Link link;
      link.name = jl.at("name").get<std::string>();
      const bool has_parent = jl.contains("parent") && !jl.at("parent").is_null();
      if (has_parent) {
        const std::string pname = jl.at("parent").get<std::string>();
        auto it = by_name.find(pname);
        if (it == by_name.end()) {
          std::string jname = jl.contains("joint") ? jl.at("joint").value("name", link.name) : link.name;
          throw ValidationError("joint '" + jname + "': parent link '" + pname + "' is missing");
        }
        link.parent = static_cast<int>(it->second);
      }
      if (jl.contains("joint") && !jl.at("joint").is_null()) {
        const json& jj = jl.at("joint");
        JointSpec spec;
        spec.name = jj.value("name", link.name);
        const std::string kind = jj.at("kind").get<std::string>();
        if (kind == "hinge") {
          spec.kind = JointKind::hinge;
        } else if (kind == "ball_component") {
          spec.kind = JointKind::ball_component;
        } else {
          throw ParseError("joint '" + spec.name + "': unknown kind '" + kind + "'");
        }
        spec.axis = detail::read_vec3(jj.at("axis"), "axis");
        spec.origin = jj.contains("origin") ? detail::read_pose(jj.at("origin"), "origin") : Transform{};
        const json& lim = jj.at("limits");
        if (!lim.is_array() || lim.size() != 2) throw ParseError("joint '" + spec.name + "': limits must be [lo, hi]");
        spec.lower = lim[0].get<double>();
        spec.upper = lim[1].get<double>();
        link.joint = joints.size();
        joints.push_back(std::move(spec));
      }
      if (i > 0 && !has_parent) throw ValidationError("link '" + link.name + "' has no parent");
      links.push_back(std::move(link));
    }

    const json& jtips = doc.at("fingertips");
    if (!jtips.is_object()) throw ParseError("'fingertips' must be an object");
    std::array<FingertipFrame, kFingerCount> tips{};
    std::array<bool, kFingerCount> seen{};
    for (auto it = jtips.begin(); it != jtips.end(); ++it) {
      auto finger = finger_from_name(it.key());
      if (!finger) throw ValidationError("unknown finger id '" + it.key() + "'");
      const json& jt = it.value();
      const std::string lname = jt.at("link").get<std::string>();
      auto lit = by_name.find(lname);
      if (lit == by_name.end()) throw ValidationError("fingertip '" + it.key() + "' references missing link '" + lname + "'");
      tips[finger_index(*finger)] = {lit->second, detail::read_pose(jt, "fingertip")};
      seen[finger_index(*finger)] = true;
    }
    for (FingerId f : kAllFingers) {
      if (!seen[finger_index(f)]) throw ValidationError("fingertip '" + std::string(finger_name(f)) + "' is missing");
    }
    return HandModel::create(name, std::move(links), std::move(joints), tips);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed hand description: ") + e.what());
  }
}

inline HandModel load_hand_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hand description '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_hand_model(ss.str());
}

/// Serializes a model back to the hand-description schema.
inline nlohmann::json hand_model_document(const HandModel& model) {
  using detail::json;
  json links = json::array();
  for (const Link& l : model.links()) {
    json jl{{"name", l.name}, {"parent", l.parent < 0 ? json(nullptr) : json(model.links()[static_cast<std::size_t>(l.parent)].name)}};
    if (l.joint) {
      const JointSpec& j = model.joints()[*l.joint];
      jl["joint"] = json{{"name", j.name},
                         {"kind", j.kind == JointKind::hinge ? "hinge" : "ball_component"},
                         {"axis", detail::vec3_json(j.axis)},
                         {"origin", detail::pose_json(j.origin)},
                         {"limits", json::array({j.lower, j.upper})}};
    }
    links.push_back(std::move(jl));
  }
  json tips = json::object();
  for (FingerId f : kAllFingers) {
    const FingertipFrame& t = model.fingertip(f);
    json jt = detail::pose_json(t.offset);
    jt["link"] = model.links()[t.link].name;
    tips[std::string(finger_name(f))] = std::move(jt);
  }
  return json{{"name", model.name()}, {"links", std::move(links)}, {"fingertips", std::move(tips)}};
}

}  // namespace dexlink::kin
