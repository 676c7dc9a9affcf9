#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dexlink/retarget/retarget.hpp"
#include "support/oracles.hpp"
#include "support/poses.hpp"

using namespace dexlink;
using nlohmann::json;

namespace {

const kin::HandModel& glove_model() {
  static const kin::HandModel m = kin::load_hand_model_file(poses::glove_path());
  return m;
}
const kin::HandModel& robot_model() {
  static const kin::HandModel m = kin::load_hand_model_file(poses::robot_path());
  return m;
}

retarget::RetargetConfig free_config() {
  retarget::RetargetConfig c;
  c.step_limit = 10.0;
  return c;
}

double max_residual(const retarget::RobotCommand& c) { return *std::max_element(c.residuals.begin(), c.residuals.end()); }

double weighted_score(const kin::HandModel& m, const kin::JointVector& q, const kin::FingertipSet& t,
                      const retarget::RetargetConfig& c) {
  const auto r = retarget::fingertip_residuals(m, q, t);
  double s = 0.0;
  for (std::size_t f = 0; f < kin::kFingerCount; ++f) s += c.finger_weights[f] * c.finger_weights[f] * r[f] * r[f];
  return s;
}

void expect_within_limits(const kin::HandModel& m, const kin::JointVector& q) {
  ASSERT_EQ(q.size(), m.dof_count());
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_GE(q[i], m.joints()[i].lower) << m.joints()[i].name;
    EXPECT_LE(q[i], m.joints()[i].upper) << m.joints()[i].name;
  }
}

double spread(const kin::FingertipSet& tips) {
  kin::Vec3 c = kin::Vec3::Zero();
  for (const auto& p : tips.positions) c += p / 5.0;
  double s = 0.0;
  for (const auto& p : tips.positions) s += (p - c).norm();
  return s;
}

kin::HandModel hinge(double length) {
  json tips = json::object();
  for (const char* f : {"thumb", "index", "middle", "ring", "pinky"}) tips[f] = {{"link", "l1"}, {"xyz", {length, 0, 0}}};
  const json doc = {{"name", "one"},
                    {"links",
                     {{{"name", "base"}, {"parent", nullptr}},
                      {{"name", "l1"},
                       {"parent", "base"},
                       {"joint",
                        {{"name", "j1"},
                         {"kind", "hinge"},
                         {"axis", {0, 0, 1}},
                         {"origin", {{"rpy", {0, 0, 0}}, {"xyz", {0, 0, 0}}}},
                         {"limits", {-1.5, 1.5}}}}}}},
                    {"fingertips", tips}};
  return kin::load_hand_model(doc.dump());
}

}  // namespace

TEST(SolveIk, AlreadySolvedTargetReturnsSeed) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const kin::JointVector q = poses::random_q(robot_model(), rng);
    const auto cmd = retarget::solve_ik(robot_model(), q, kin::forward_kinematics(robot_model(), q), {});
    EXPECT_LE(cmd.iterations_used, 1);
    EXPECT_LE(max_residual(cmd), 1e-9);
    EXPECT_EQ(cmd.q_robot, q);
  }
}

TEST(SolveIk, UnactuatedFingerDoesNotBlockConvergence) {
  ASSERT_TRUE(robot_model().finger_chain(kin::FingerId::pinky).empty());
  std::mt19937_64 rng(13);
  const kin::JointVector q = poses::random_q(robot_model(), rng);
  kin::FingertipSet t = kin::forward_kinematics(robot_model(), q);
  t.positions[4] += kin::Vec3(0.05, 0.0, 0.0);
  const auto cmd = retarget::solve_ik(robot_model(), q, t, {});
  EXPECT_EQ(cmd.iterations_used, 0);
  EXPECT_NEAR(cmd.residuals[4], 0.05, 1e-12);
}

TEST(SolveIk, SingleHingeMatchesClosedForm) {
  const kin::HandModel m = hinge(0.05);
  retarget::RetargetConfig c;
  c.step_limit = 10.0;
  c.pos_tolerance = 1e-9;
  c.damping = 1e-3;
  for (double theta : {-1.4, -0.6, 0.0, 0.3, 1.2}) {
    kin::FingertipSet t;
    for (auto& p : t.positions) p = {0.05 * std::cos(theta), 0.05 * std::sin(theta), 0.0};
    for (double start : {-1.5, -0.5, 0.0, 0.8, 1.5}) {
      const auto cmd = retarget::solve_ik(m, kin::JointVector{start}, t, c);
      EXPECT_NEAR(cmd.q_robot[0], theta, 1e-6) << "start " << start;
    }
  }
}

TEST(SolveIk, ReachableTargetsMostlySolved) {
  std::mt19937_64 rng(2);
  const auto c = free_config();
  int solved = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const auto targets = kin::forward_kinematics(robot_model(), poses::random_q(robot_model(), rng));
    const auto cmd = retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), targets, c);
    EXPECT_LE(cmd.iterations_used, c.max_iters);
    solved += max_residual(cmd) <= 1e-3;
  }
  EXPECT_GE(solved, 95);
}

TEST(SolveIk, UnreachableTargetsStayInsideLimits) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    kin::FingertipSet t;
    for (auto& p : t.positions) p = kin::Vec3::Random() * 2.0;
    const auto cmd = retarget::solve_ik(robot_model(), poses::random_q(robot_model(), rng), t, free_config());
    EXPECT_TRUE(cmd.q_robot.all_finite());
    expect_within_limits(robot_model(), cmd.q_robot);
  }
}

TEST(SolveIk, StepLimitBoundsEveryJoint) {
  std::mt19937_64 rng(4);
  retarget::RetargetConfig c;
  for (int i = 0; i < 30; ++i) {
    const kin::JointVector from = poses::random_q(robot_model(), rng);
    const auto targets = kin::forward_kinematics(robot_model(), poses::random_q(robot_model(), rng));
    const auto cmd = retarget::solve_ik(robot_model(), from, targets, c);
    EXPECT_LE((cmd.q_robot.vec() - from.vec()).lpNorm<Eigen::Infinity>(), c.step_limit + 1e-15);
    expect_within_limits(robot_model(), cmd.q_robot);
  }
}

TEST(SolveIk, ReportedResidualsMatchOracle) {
  const auto doc = oracle::DocumentFk::from_file(poses::robot_path());
  std::mt19937_64 rng(5);
  const char* names[] = {"thumb", "index", "middle", "ring", "pinky"};
  for (int i = 0; i < 20; ++i) {
    kin::FingertipSet t;
    for (auto& p : t.positions) p = kin::Vec3::Random() * 0.15;
    const auto cmd = retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), t, free_config());
    for (std::size_t f = 0; f < 5; ++f) {
      const auto tip = doc.tip(names[f], cmd.q_robot.to_std());
      const double d = oracle::distance(tip, {t.positions[f].x(), t.positions[f].y(), t.positions[f].z()});
      EXPECT_NEAR(cmd.residuals[f], d, 1e-12);
    }
  }
}

TEST(SolveIk, ReturnsNoWorseThanSeed) {
  std::mt19937_64 rng(6);
  const auto c = free_config();
  for (int i = 0; i < 30; ++i) {
    kin::FingertipSet t;
    for (auto& p : t.positions) p = kin::Vec3::Random() * 0.2;
    const auto seed = poses::random_q(robot_model(), rng);
    const auto cmd = retarget::solve_ik(robot_model(), seed, t, c);
    EXPECT_LE(weighted_score(robot_model(), cmd.q_robot, t, c), weighted_score(robot_model(), seed, t, c));
  }
}

TEST(SolveIk, Deterministic) {
  std::mt19937_64 rng(7);
  const auto targets = kin::forward_kinematics(robot_model(), poses::random_q(robot_model(), rng));
  const auto a = retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), targets, free_config());
  const auto b = retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), targets, free_config());
  EXPECT_EQ(a.q_robot, b.q_robot);
  EXPECT_EQ(a.residuals, b.residuals);
  EXPECT_EQ(a.iterations_used, b.iterations_used);
}

TEST(SolveIk, RejectsBadInputs) {
  kin::FingertipSet t;
  t.positions[2].y() = std::nan("");
  EXPECT_THROW(retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), t, {}), NonFiniteTarget);
  t.positions[2].y() = std::numeric_limits<double>::infinity();
  EXPECT_THROW(retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), t, {}), NonFiniteTarget);
  EXPECT_THROW(retarget::solve_ik(robot_model(), kin::JointVector(15), kin::FingertipSet{}, {}), DimensionMismatch);
  kin::JointVector seed = poses::midpoint(robot_model());
  seed[3] = std::nan("");
  EXPECT_THROW(retarget::solve_ik(robot_model(), seed, kin::FingertipSet{}, {}), NonFiniteTarget);
}

TEST(ScaleTargets, IdentityAndOffset) {
  std::mt19937_64 rng(8);
  const auto tips = kin::forward_kinematics(glove_model(), poses::random_q(glove_model(), rng));
  retarget::RetargetConfig c;
  c.scale = 1.0;
  const auto same = retarget::scale_targets(tips, c, kin::Vec3::Zero());
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(same.positions[f], tips.positions[f]);
  c.scale = 1.5;
  const kin::Vec3 off(0.01, -0.02, 0.03);
  const auto moved = retarget::scale_targets(tips, c, off);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(moved.positions[f], 1.5 * tips.positions[f] + off);
}

TEST(ScaleTargets, PairwiseDistancesScale) {
  std::mt19937_64 rng(9);
  const auto tips = kin::forward_kinematics(glove_model(), poses::random_q(glove_model(), rng));
  retarget::RetargetConfig a, b;
  a.scale = 1.3;
  b.scale = 2.6;
  const auto ta = retarget::scale_targets(tips, a, kin::Vec3(0.1, 0.0, 0.0));
  const auto tb = retarget::scale_targets(tips, b, kin::Vec3(-0.3, 0.2, 0.0));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) {
      const double d0 = (tips.positions[i] - tips.positions[j]).norm();
      const double da = (ta.positions[i] - ta.positions[j]).norm();
      const double db = (tb.positions[i] - tb.positions[j]).norm();
      EXPECT_NEAR(da, 1.3 * d0, 1e-15);
      EXPECT_NEAR(db, 2.0 * da, 1e-15);
    }
  }
}

TEST(ScaleTargets, TouchingTipsStayTouching) {
  kin::FingertipSet tips;
  tips.positions[0] = tips.positions[1] = kin::Vec3(0.08, 0.01, -0.02);
  for (double s : {0.5, 1.0, 1.3, 3.0}) {
    retarget::RetargetConfig c;
    c.scale = s;
    const auto t = retarget::scale_targets(tips, c, kin::Vec3(0.02, 0.0, 0.01));
    EXPECT_EQ((t.positions[0] - t.positions[1]).norm(), 0.0);
  }
}

TEST(GloveFingertips, DelegatesToForwardKinematics) {
  std::mt19937_64 rng(10);
  glove::GloveJointState s;
  s.q = poses::random_q(glove_model(), rng);
  const auto a = retarget::glove_fingertips(glove_model(), s);
  const auto b = kin::forward_kinematics(glove_model(), s.q);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(a.positions[f], b.positions[f]);
  s.q = kin::JointVector(16);
  EXPECT_THROW(retarget::glove_fingertips(glove_model(), s), DimensionMismatch);
}

TEST(RetargetStep, StaticPoseReachesFixedPoint) {
  std::mt19937_64 rng(11);
  const retarget::RetargetConfig c;
  for (int trial = 0; trial < 10; ++trial) {
    glove::GloveJointState s;
    s.q = poses::reproducible_q(glove_model(), rng);
    s.timestamp_ns = 1234;
    kin::JointVector q = retarget::retarget_step(glove_model(), robot_model(), s, poses::midpoint(robot_model()), free_config()).q_robot;
    double delta = 1.0;
    for (int call = 0; call < 5; ++call) {
      const auto cmd = retarget::retarget_step(glove_model(), robot_model(), s, q, c);
      EXPECT_EQ(cmd.timestamp_ns, 1234);
      delta = (cmd.q_robot.vec() - q.vec()).lpNorm<Eigen::Infinity>();
      q = cmd.q_robot;
    }
    EXPECT_LE(delta, 1e-6);
  }
}

TEST(RetargetStep, OpenHandSpreadsWiderThanClosed) {
  glove::GloveJointState open, closed;
  open.q = kin::JointVector(glove_model().dof_count());
  closed.q = kin::JointVector(glove_model().dof_count());
  for (std::size_t i = 0; i < glove_model().dof_count(); ++i) {
    const std::string& n = glove_model().joints()[i].name;
    for (const char* suffix : {"_mcp_b", "_pip", "_dip", "_mcp", "_ip"}) {
      if (n.ends_with(suffix)) closed.q[i] = 0.9 * glove_model().joints()[i].upper;
    }
  }
  const auto c = free_config();
  const auto seed = poses::midpoint(robot_model());
  const auto qo = retarget::retarget_step(glove_model(), robot_model(), open, seed, c).q_robot;
  const auto qc = retarget::retarget_step(glove_model(), robot_model(), closed, seed, c).q_robot;
  EXPECT_GT(spread(kin::forward_kinematics(robot_model(), qo)), spread(kin::forward_kinematics(robot_model(), qc)));
}

TEST(RetargetStep, PinchIsPreserved) {
  std::mt19937_64 rng(12);
  poses::PinchGenerator gen(glove_model());
  const auto c = free_config();
  for (int i = 0; i < 20; ++i) {
    glove::GloveJointState s;
    s.q = gen.next(rng);
    const auto g = kin::forward_kinematics(glove_model(), s.q);
    ASSERT_LT((g.positions[0] - g.positions[1]).norm(), 0.005);
    const auto cmd = retarget::retarget_step(glove_model(), robot_model(), s, poses::midpoint(robot_model()), c);
    const auto r = kin::forward_kinematics(robot_model(), cmd.q_robot);
    EXPECT_LE((r.positions[0] - r.positions[1]).norm(), c.scale * 0.005 + 2.0 * c.pos_tolerance);
  }
}

TEST(RetargetConfig, JsonAndValidation) {
  retarget::RetargetConfig c;
  c.scale = 1.1;
  c.finger_weights = {3, 1, 1, 1, 0.5};
  c.robot_origin_offset = {0.01, 0.0, -0.02};
  const auto back = retarget::retarget_config_from_json(retarget::to_json(c));
  EXPECT_EQ(back.scale, 1.1);
  EXPECT_EQ(back.finger_weights, c.finger_weights);
  EXPECT_EQ(back.robot_origin_offset, c.robot_origin_offset);
  EXPECT_THROW(retarget::retarget_config_from_json(json{{"scale", -1}}), ValidationError);
  EXPECT_THROW(retarget::retarget_config_from_json(json{{"max_iters", 0}}), ValidationError);
  EXPECT_THROW(retarget::retarget_config_from_json(json{{"damping", "x"}}), ParseError);
  const auto defaults = retarget::retarget_config_from_json(json::object());
  EXPECT_EQ(defaults.finger_weights[0], 2.0);
  EXPECT_EQ(defaults.finger_weights[1], 1.0);
}
