#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dexlink/error.hpp"
#include "dexlink/kinematics/transform.hpp"

namespace dexlink::kin {

enum class FingerId : std::size_t { thumb = 0, index, middle, ring, pinky };

inline constexpr std::size_t kFingerCount = 5;
inline constexpr std::array<FingerId, kFingerCount> kAllFingers = {
    FingerId::thumb, FingerId::index, FingerId::middle, FingerId::ring, FingerId::pinky};

constexpr std::size_t finger_index(FingerId f) { return static_cast<std::size_t>(f); }

constexpr std::string_view finger_name(FingerId f) {
  constexpr std::array<std::string_view, kFingerCount> names = {"thumb", "index", "middle",
                                                                "ring", "pinky"};
  return names[finger_index(f)];
}

inline std::optional<FingerId> finger_from_name(std::string_view name) {
  for (FingerId f : kAllFingers) {
    if (finger_name(f) == name) return f;
  }
  return std::nullopt;
}

enum class JointKind { hinge, ball_component };

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::hinge;
  Vec3 axis = Vec3::UnitZ();  // unit, expressed in the joint frame
  Transform origin;           // parent link frame -> joint frame at q = 0
  double lower = 0.0;
  double upper = 0.0;
};

struct Link {
  std::string name;
  int parent = -1;                 // -1 only for the base link
  std::optional<std::size_t> joint;  // index into HandModel::joints()
};

struct FingertipFrame {
  std::size_t link = 0;
  Transform offset;
};

/// Ordered vector of joint angles (radians) in a model's joint order.
class JointVector {
 public:
  JointVector() = default;
  explicit JointVector(std::size_t n) : values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}
  explicit JointVector(Eigen::VectorXd values) : values_(std::move(values)) {}
  JointVector(std::initializer_list<double> values)
      : values_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) values_[i++] = v;
  }

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  const Eigen::VectorXd& vec() const { return values_; }
  Eigen::VectorXd& vec() { return values_; }

  bool all_finite() const { return values_.allFinite(); }

  std::vector<double> to_std() const { return {values_.data(), values_.data() + values_.size()}; }
  static JointVector from_std(const std::vector<double>& v) {
    return JointVector(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }

  friend bool operator==(const JointVector& a, const JointVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
};

/// Five fingertip positions in the hand base frame, keyed by finger.
struct FingertipSet {
  std::array<Vec3, kFingerCount> positions{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                           Vec3::Zero(), Vec3::Zero()};

  const Vec3& operator[](FingerId f) const { return positions[finger_index(f)]; }
  Vec3& operator[](FingerId f) { return positions[finger_index(f)]; }

  bool all_finite() const {
    for (const auto& p : positions) {
      if (!p.allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const FingertipSet& a, const FingertipSet& b) {
    for (std::size_t i = 0; i < kFingerCount; ++i) {
      if (a.positions[i] != b.positions[i]) return false;
    }
    return true;
  }
};

/// Immutable, validated kinematic tree. Build through `HandModel::create` or
/// the document loader; every constructed instance satisfies the tree,
/// axis, limit, ball-pair and fingertip invariants.
class HandModel {
 public:
  static HandModel create(std::string name, std::vector<Link> links, std::vector<JointSpec> joints,
                          std::array<FingertipFrame, kFingerCount> fingertips);

  const std::string& name() const { return name_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const FingertipFrame& fingertip(FingerId f) const { return fingertips_[finger_index(f)]; }
  std::size_t dof_count() const { return joints_.size(); }

  /// Links in parent-before-child order.
  const std::vector<std::size_t>& topological_order() const { return topo_; }

  /// Joint indices from the base to the fingertip's link, base first.
  const std::vector<std::size_t>& finger_chain(FingerId f) const { return chains_[finger_index(f)]; }

  /// Joint index of the named joint, if present.
  std::optional<std::size_t> joint_index(std::string_view joint_name) const {
    for (std::size_t i = 0; i < joints_.size(); ++i) {
      if (joints_[i].name == joint_name) return i;
    }
    return std::nullopt;
  }

  /// Upper bound on ||fingertip|| from the base origin: sum of link offsets
  /// along the finger's chain plus the fingertip offset.
  double reach_bound(FingerId f) const { return reach_[finger_index(f)]; }

  JointVector lower_limits() const {
    JointVector v(dof_count());
    for (std::size_t i = 0; i < joints_.size(); ++i) v[i] = joints_[i].lower;
    return v;
  }
  JointVector upper_limits() const {
    JointVector v(dof_count());
    for (std::size_t i = 0; i < joints_.size(); ++i) v[i] = joints_[i].upper;
    return v;
  }

  bool within_limits(const JointVector& q, double tol = 0.0) const {
    if (q.size() != dof_count()) return false;
    for (std::size_t i = 0; i < joints_.size(); ++i) {
      if (!(q[i] >= joints_[i].lower - tol && q[i] <= joints_[i].upper + tol)) return false;
    }
    return true;
  }

 private:
  std::string name_;
  std::vector<Link> links_;
  std::vector<JointSpec> joints_;
  std::array<FingertipFrame, kFingerCount> fingertips_;
  std::vector<std::size_t> topo_;
  std::array<std::vector<std::size_t>, kFingerCount> chains_;
  std::array<double, kFingerCount> reach_{};
};

namespace detail {

inline void validate_joint(const JointSpec& j) {
  if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-9) {
    throw ValidationError("joint '" + j.name + "': axis is not a unit vector");
  }
  if (!std::isfinite(j.lower) || !std::isfinite(j.upper) || j.lower > j.upper) {
    throw ValidationError("joint '" + j.name + "': limits must satisfy min <= max");
  }
  if (!j.origin.rotation.allFinite() || !j.origin.translation.allFinite()) {
    throw ValidationError("joint '" + j.name + "': origin is not finite");
  }
}

}  // namespace detail

inline HandModel HandModel::create(std::string name, std::vector<Link> links,
                                   std::vector<JointSpec> joints,
                                   std::array<FingertipFrame, kFingerCount> fingertips) {
  HandModel m;
  m.name_ = std::move(name);
  if (links.empty()) throw ValidationError("model '" + m.name_ + "' has no links");
  if (links[0].parent != -1 || links[0].joint) {
    throw ValidationError("link 0 ('" + links[0].name + "') must be the base: no parent, no joint");
  }

  std::vector<int> joint_owner(joints.size(), -1);
  for (std::size_t i = 1; i < links.size(); ++i) {
    const Link& l = links[i];
    if (l.parent < 0 || static_cast<std::size_t>(l.parent) >= links.size()) {
      throw ValidationError("link '" + l.name + "' has a missing parent");
    }
    if (!l.joint || *l.joint >= joints.size()) {
      throw ValidationError("link '" + l.name + "' has no joint");
    }
    if (joint_owner[*l.joint] != -1) {
      throw ValidationError("joint '" + joints[*l.joint].name + "' is attached to two links");
    }
    joint_owner[*l.joint] = static_cast<int>(i);
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joint_owner[j] == -1) throw ValidationError("joint '" + joints[j].name + "' is not attached to a link");
    detail::validate_joint(joints[j]);
    for (std::size_t k = 0; k < j; ++k) {
      if (joints[k].name == joints[j].name) throw ValidationError("joint '" + joints[j].name + "' is duplicated");
    }
  }

  // Topological order; anything unreachable from the base sits on a cycle.
  std::vector<std::vector<std::size_t>> children(links.size());
  for (std::size_t i = 1; i < links.size(); ++i) children[static_cast<std::size_t>(links[i].parent)].push_back(i);
  m.topo_.reserve(links.size());
  m.topo_.push_back(0);
  for (std::size_t head = 0; head < m.topo_.size(); ++head) {
    for (std::size_t c : children[m.topo_[head]]) m.topo_.push_back(c);
  }
  if (m.topo_.size() != links.size()) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (std::find(m.topo_.begin(), m.topo_.end(), i) == m.topo_.end()) {
        throw ValidationError("link '" + links[i].name + "' (joint '" + joints[*links[i].joint].name +
                              "') is part of a cycle");
      }
    }
  }

  // Ball joints: a ball_component whose parent joint is not an open first
  // half starts a pair; the pair's second half is its single child.
  std::vector<bool> paired(links.size(), false);
  for (std::size_t li : m.topo_) {
    const Link& l = links[li];
    if (!l.joint || joints[*l.joint].kind != JointKind::ball_component || paired[li]) continue;
    const JointSpec& first = joints[*l.joint];
    std::vector<std::size_t> ball_children;
    for (std::size_t c : children[li]) {
      if (joints[*links[c].joint].kind == JointKind::ball_component) ball_children.push_back(c);
    }
    if (ball_children.size() != 1 || children[li].size() != 1) {
      throw ValidationError("joint '" + first.name +
                            "': ball joint needs exactly one chained ball_component child");
    }
    const std::size_t ci = ball_children.front();
    const JointSpec& second = joints[*links[ci].joint];
    const Vec3 second_axis_in_first = second.origin.rotation * second.axis;
    if (std::abs(first.axis.dot(second_axis_in_first)) >= 1e-9) {
      throw ValidationError("joint '" + second.name + "': ball joint axes are not orthogonal to '" +
                            first.name + "'");
    }
    paired[li] = true;
    paired[ci] = true;
  }

  for (FingerId f : kAllFingers) {
    const FingertipFrame& tip = fingertips[finger_index(f)];
    if (tip.link >= links.size()) {
      throw ValidationError("fingertip '" + std::string(finger_name(f)) + "' references a missing link");
    }
    std::vector<std::size_t> chain;
    double reach = tip.offset.translation.norm();
    for (int li = static_cast<int>(tip.link); li > 0; li = links[static_cast<std::size_t>(li)].parent) {
      const std::size_t j = *links[static_cast<std::size_t>(li)].joint;
      chain.push_back(j);
      reach += joints[j].origin.translation.norm();
    }
    std::reverse(chain.begin(), chain.end());
    m.chains_[finger_index(f)] = std::move(chain);
    m.reach_[finger_index(f)] = reach;
  }

  m.links_ = std::move(links);
  m.joints_ = std::move(joints);
  m.fingertips_ = fingertips;
  return m;
}

}  // namespace dexlink::kin
