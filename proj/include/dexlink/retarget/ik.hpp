#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <tuple>
#include <utility>

#include "dexlink/kinematics/forward_kinematics.hpp"
#include "dexlink/retarget/config.hpp"

namespace dexlink::retarget {

struct RobotCommand {
  kin::JointVector q_robot;
  std::array<double, kin::kFingerCount> residuals{};  // meters, unweighted
  int iterations_used = 0;
  std::int64_t timestamp_ns = 0;
};

/// Unweighted per-finger position errors ||FK(q) - target||.
inline std::array<double, kin::kFingerCount> fingertip_residuals(const kin::HandModel& model,
                                                                  const kin::JointVector& q,
                                                                  const kin::FingertipSet& targets) {
  const kin::FingertipSet tips = kin::forward_kinematics(model, q);
  std::array<double, kin::kFingerCount> r{};
  for (std::size_t i = 0; i < kin::kFingerCount; ++i) r[i] = (tips.positions[i] - targets.positions[i]).norm();
  return r;
}

/// Damped-least-squares fingertip IK:
///   dq = Jw^T (Jw Jw^T + lambda^2 I)^-1 ew
/// over the stacked, finger-weighted position error. Each iterate is
/// clamped to the joint limits and to q_current +/- step_limit, so the
/// returned command never moves a joint by more than step_limit. The
/// lowest weighted-error iterate visited is returned (earliest on ties);
/// unreachable targets are not an error. Fingers without joints cannot
/// move and are left out of the tolerance test.
inline RobotCommand solve_ik(const kin::HandModel& model, const kin::JointVector& q_current,
                             const kin::FingertipSet& targets, const RetargetConfig& config) {
  kin::require_dof(model, q_current);
  if (!targets.all_finite()) throw NonFiniteTarget("IK targets must be finite");
  if (!q_current.all_finite()) throw NonFiniteTarget("IK seed must be finite");

  const auto n = static_cast<Eigen::Index>(model.dof_count());
  constexpr Eigen::Index rows = 3 * static_cast<Eigen::Index>(kin::kFingerCount);
  Eigen::VectorXd lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& j = model.joints()[static_cast<std::size_t>(i)];
    lo[i] = std::max(j.lower, q_current.vec()[i] - config.step_limit);
    hi[i] = std::min(j.upper, q_current.vec()[i] + config.step_limit);
    if (lo[i] > hi[i]) lo[i] = hi[i] = std::clamp(q_current.vec()[i], j.lower, j.upper);
  }

  Eigen::VectorXd q = q_current.vec().cwiseMax(lo).cwiseMin(hi);
  Eigen::Matrix<double, rows, Eigen::Dynamic> jw(rows, n);
  Eigen::Matrix<double, rows, 1> ew;

  // Fills jw/ew at q; returns the weighted squared error and max residual.
  auto evaluate = [&](const Eigen::VectorXd& at) {
    const kin::JointVector qv(at);
    double score = 0.0;
    double max_res = 0.0;
    const auto k = kin::fingertip_kinematics(model, qv);
    for (std::size_t f = 0; f < kin::kFingerCount; ++f) {
      const kin::Vec3 e = targets.positions[f] - k.tips.positions[f];
      const double w = config.finger_weights[f];
      ew.segment<3>(3 * static_cast<Eigen::Index>(f)) = w * e;
      jw.middleRows<3>(3 * static_cast<Eigen::Index>(f)) = w * k.jacobians[f];
      score += w * w * e.squaredNorm();
      if (!model.finger_chain(static_cast<kin::FingerId>(f)).empty()) max_res = std::max(max_res, e.norm());
    }
    return std::pair{score, max_res};
  };

  auto [score, max_res] = evaluate(q);
  Eigen::VectorXd best = q;
  double best_score = score;
  const double lambda2 = config.damping * config.damping;
  int iters = 0;

  while (iters < config.max_iters && max_res > config.pos_tolerance) {
    Eigen::Matrix<double, rows, rows> a = jw * jw.transpose();
    a.diagonal().array() += lambda2;
    Eigen::VectorXd dq = jw.transpose() * a.ldlt().solve(ew);
    const double peak = dq.lpNorm<Eigen::Infinity>();
    if (peak > config.iteration_step_limit) dq *= config.iteration_step_limit / peak;

    const Eigen::VectorXd next = (q + dq).cwiseMax(lo).cwiseMin(hi);
    ++iters;
    if ((next - q).lpNorm<Eigen::Infinity>() <= 1e-15) break;  // pinned by limits
    q = next;
    std::tie(score, max_res) = evaluate(q);
    if (score < best_score) {
      best_score = score;
      best = q;
    }
  }

  RobotCommand cmd;
  cmd.q_robot = kin::JointVector(best);
  cmd.residuals = fingertip_residuals(model, cmd.q_robot, targets);
  cmd.iterations_used = iters;
  return cmd;
}

}  // namespace dexlink::retarget
