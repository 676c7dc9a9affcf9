// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <array>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "dexlink/glove.hpp"
#include "dexlink/haptic/feedback.hpp"
#include "dexlink/kinematics.hpp"
#include "dexlink/retarget/retarget.hpp"
#include "dexlink/teleop/session.hpp"
#include "support/oracles.hpp"
#include "support/poses.hpp"
#include "support/tempdir.hpp"

using namespace dexlink;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const kin::HandModel& glove_model() {
  static const kin::HandModel m = kin::load_hand_model_file(poses::glove_path());
  return m;
}
const kin::HandModel& robot_model() {
  static const kin::HandModel m = kin::load_hand_model_file(poses::robot_path());
  return m;
}

Outcome conversion() {
  Stopwatch sw;
  double worst = 0.0;
  auto check = [&](std::uint32_t adc, std::uint32_t vcc) {
    const long double expect = static_cast<long double>(adc) / static_cast<long double>(vcc) * 360.0L;
    worst = std::max(worst, static_cast<double>(std::fabs(static_cast<long double>(glove::raw_to_angle(adc, vcc)) - expect)));
  };
  const std::uint32_t full = glove::kAdcMaxCode;
  check(0, full);
  check(full, full);
  check(full / 2, full);
  const bool endpoints = glove::raw_to_angle(0, full) == 0.0 && glove::raw_to_angle(full, full) == 360.0 &&
                         glove::raw_to_angle(1u << 22, 1u << 23) == 180.0;
  std::mt19937_64 rng(101);
  for (int i = 0; i < 100000; ++i) {
    const auto vcc = 1 + static_cast<std::uint32_t>(rng() % full);
    const auto adc = static_cast<std::uint32_t>(rng() % (static_cast<std::uint64_t>(vcc) + 1));
    check(adc, vcc);
  }
  const double t = sw.seconds();
  return {endpoints && worst <= 1e-9 && t < 1.0,
          fmt("max |err| %.3g deg over 1e5 codes, endpoints %s, %.3f s", worst, endpoints ? "exact" : "off", t)};
}

Outcome calibration() {
  Stopwatch sw;
  double before = 0.0, after = 0.0;
  const glove::SimulatedGlove g(glove_model(), [](double) { return kin::JointVector(glove::kGloveDof); },
                                glove::NonlinearityModel(0.02, 7), 120.0);
  const auto tables = glove::calibrate_all_channels(g);
  for (std::size_t ch = 0; ch < glove::kEncoderChannels; ++ch) {
    for (int i = 0; i <= 3600; ++i) {
      const double truth = 0.1 * i;
      const double raw = g.encoder_reading(ch, truth);
      before = std::max(before, std::abs(raw - truth));
      after = std::max(after, std::abs(tables[ch].apply(raw) - truth));
    }
  }
  const double t = sw.seconds();
  return {after <= 1.0 && before > 3.0 && t < 5.0,
          fmt("16 channels, peak error %.2f deg before, %.3f deg after calibration, %.3f s", before, after, t)};
}

Outcome feedback_table() {
  Stopwatch sw;
  int mismatches = 0;
  haptic::FeedbackParams flat;
  flat.hysteresis_g = 0.0;
  haptic::FingerFeedback machine(kin::FingerId::index, flat);
  for (int g = 0; g <= 3000; ++g) {
    mismatches += static_cast<int>(haptic::classify_force(g)) != oracle::table_one(g);
    mismatches += static_cast<int>(machine.update_class(g)) != oracle::table_one(g);
  }
  int worst_changes = 0;
  for (double edge : {10.0, 50.0, 100.0}) {
    for (double side : {-1.0, 1.0}) {
      haptic::FingerFeedback f(kin::FingerId::index);
      f.update_class(edge + 5.0 * side);
      auto last = f.current();
      int changes = 0;
      for (int i = 0; i < 200; ++i) {
        const auto c = f.update_class(edge + (i % 2 ? 1.0 : -1.0));
        changes += c != last;
        last = c;
      }
      worst_changes = std::max(worst_changes, changes);
    }
  }
  const double t = sw.seconds();
  return {mismatches == 0 && worst_changes <= 1 && t < 1.0,
          fmt("%d mismatches over 0..3000 g, max %d class changes under +/-1 g oscillation, %.3f s", mismatches,
              worst_changes, t)};
}

Outcome kp_map() {
  const double kp_max = haptic::FeedbackParams{}.kp_max;
  const double lo = haptic::force_to_kp(0.0, kp_max);
  const double hi = haptic::force_to_kp(3000.0, kp_max);
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g = std::uniform_real_distribution<double>(0.0, 3000.0)(rng);
    worst = std::max(worst, std::abs(haptic::force_to_kp(g, kp_max) - (lo + (hi - lo) * g / 3000.0)));
  }
  const bool ends = lo == 0.0 && hi == kp_max && haptic::force_to_kp(4000.0, kp_max) == kp_max;
  return {ends && worst <= 1e-12, fmt("kp(0)=%g kp(3000)=%g, max deviation from line %.3g", lo, hi, worst)};
}

Outcome kinematics() {
  const auto doc = oracle::DocumentFk::from_file(poses::glove_path());
  const char* names[] = {"thumb", "index", "middle", "ring", "pinky"};
  std::mt19937_64 rng(105);
  double fk_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const kin::JointVector q = poses::random_q(glove_model(), rng);
    const auto tips = kin::forward_kinematics(glove_model(), q);
    for (std::size_t f = 0; f < 5; ++f) {
      const auto ref = doc.tip(names[f], q.to_std());
      fk_err = std::max(fk_err, oracle::distance(ref, {tips.positions[f].x(), tips.positions[f].y(), tips.positions[f].z()}));
    }
  }
  double jac_err = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const kin::JointVector q = poses::random_q(glove_model(), rng);
    for (std::size_t f = 0; f < 5; ++f) {
      const auto jac = kin::fingertip_jacobian(glove_model(), q, static_cast<kin::FingerId>(f));
      for (std::size_t j = 0; j < q.size(); ++j) {
        std::vector<double> plus = q.to_std(), minus = q.to_std();
        plus[j] += h;
        minus[j] -= h;
        const auto a = doc.tip(names[f], plus), b = doc.tip(names[f], minus);
        for (int r = 0; r < 3; ++r) {
          jac_err = std::max(jac_err, std::abs(jac(r, static_cast<Eigen::Index>(j)) - (a[r] - b[r]) / (2 * h)));
        }
      }
    }
  }
  return {fk_err <= 1e-9 && jac_err <= 1e-5,
          fmt("FK max %.3g m over 1000 poses, Jacobian max %.3g over 100 poses", fk_err, jac_err)};
}

Outcome ik_quality() {
  Stopwatch sw;
  retarget::RetargetConfig c;
  c.step_limit = 10.0;
  std::mt19937_64 rng(106);
  int solved = 0;
  for (int i = 0; i < 500; ++i) {
    const auto targets = kin::forward_kinematics(robot_model(), poses::random_q(robot_model(), rng));
    const auto cmd = retarget::solve_ik(robot_model(), poses::midpoint(robot_model()), targets, c);
    const double worst = *std::max_element(cmd.residuals.begin(), cmd.residuals.end());
    solved += cmd.iterations_used <= 100 && worst <= 1e-3;
  }
  poses::PinchGenerator pinches(glove_model());
  int pinch_ok = 0;
  double worst_gap = 0.0;
  const double bound = c.scale * 0.005 + 2.0 * c.pos_tolerance;
  for (int i = 0; i < 100; ++i) {
    glove::GloveJointState s;
    s.q = pinches.next(rng);
    const auto cmd = retarget::retarget_step(glove_model(), robot_model(), s, poses::midpoint(robot_model()), c);
    const auto tips = kin::forward_kinematics(robot_model(), cmd.q_robot);
    const double gap = (tips.positions[0] - tips.positions[1]).norm();
    worst_gap = std::max(worst_gap, gap);
    pinch_ok += gap <= bound;
  }
  const double t = sw.seconds();
  return {solved >= 475 && pinch_ok == 100 && t < 60.0,
          fmt("%d/500 reachable sets within 1 mm, %d/100 pinches within %.2f mm (worst %.2f mm), %.2f s", solved,
              pinch_ok, bound * 1e3, worst_gap * 1e3, t)};
}

Outcome rate_budget() {
  const std::string cmd = std::string(DEXLINK_CLI) + " bench --ticks 1000";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return {false, "cannot start dexlink bench"};
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = ::pclose(p);
  double p99 = -1.0, fps = -1.0;
  std::istringstream lines(out);
  for (std::string line; std::getline(lines, line);) {
    std::sscanf(line.c_str(), "p50 %*f ms p99 %lf ms", &p99);
    std::sscanf(line.c_str(), "decode throughput %lf frames/s", &fps);
  }
  return {status == 0 && p99 >= 0.0 && p99 <= 1000.0 / 30.0 && fps >= 120.0,
          fmt("dexlink bench: p99 tick %.3f ms (budget 33.333), decode %.0f frames/s (need 120)", p99, fps)};
}

Outcome determinism() {
  support::TempDir dir;
  const teleop::DaemonConfig cfg = teleop::load_daemon_config(poses::kData + "/config/default.json");
  std::vector<std::vector<std::uint8_t>> logs;
  std::vector<teleop::Snapshot> snaps;
  for (int run = 0; run < 3; ++run) {
    auto loop = teleop::make_control_loop(cfg, {teleop::GloveInput::simulated, std::string("grasp_bottle"), std::nullopt});
    if (run == 0) loop->add_observer([&](const teleop::Snapshot& s) { snaps.push_back(s); });
    const std::string path = dir.file("run" + std::to_string(run) + ".dxl");
    loop->start_recording(path);
    loop->run();
    logs.push_back(teleop::read_file_bytes(path));
  }
  const bool identical = logs[0] == logs[1] && logs[1] == logs[2];

  const teleop::DemoLog log = teleop::read_demo(dir.file("run0.dxl"));
  bool lossless = log.records.size() == snaps.size() && !snaps.empty();
  std::size_t delivered = 0;
  teleop::replay(log, 1.0, false, [&](const teleop::ScheduledRecord& r) {
    const teleop::Snapshot& s = snaps.at(delivered++);
    lossless = lossless && r.record->t_ns == s.t_ns && r.record->glove_q == s.glove_q && r.record->robot_q == s.robot_q &&
               r.record->forces == s.forces;
    for (std::size_t f = 0; f < 5; ++f) lossless = lossless && r.record->feedback[f] == s.feedback[f].feedback_class;
  });
  lossless = lossless && delivered == snaps.size();
  {
    teleop::DemoWriter w(dir.file("copy.dxl"), log.header);
    for (const auto& r : log.records) w.append(r);
  }
  lossless = lossless && teleop::read_file_bytes(dir.file("copy.dxl")) == logs[0];

  std::array<oracle::Deadband, 5> ref{};
  std::size_t mismatches = 0, active = 0;
  for (const auto& r : log.records) {
    for (std::size_t f = 0; f < 5; ++f) {
      mismatches += static_cast<int>(r.feedback[f]) != ref[f].step(r.forces[f]);
      active += r.feedback[f] != haptic::FeedbackClass::none;
    }
  }
  return {identical && lossless && mismatches == 0 && active > 0,
          fmt("3 runs %s (%zu bytes, %zu records), replay %s, feedback recompute %zu mismatches (%zu active finger-ticks)",
              identical ? "byte-identical" : "DIFFER", logs[0].size(), log.records.size(), lossless ? "lossless" : "LOSSY",
              mismatches, active)};
}

Outcome codec_fuzz() {
  Stopwatch sw;
  std::mt19937_64 rng(109);
  auto random_frame = [&](std::uint8_t seq) {
    glove::EncoderFrame f;
    f.seq = seq;
    for (auto& c : f.adc_codes) c = static_cast<std::uint32_t>(rng() & glove::kAdcMaxCode);
    f.vcc_code = 1 + static_cast<std::uint32_t>(rng() % glove::kAdcMaxCode);
    return f;
  };
  std::uint64_t accepted_corrupt = 0, missed_resync = 0, lost_prefix = 0;
  constexpr int kTrials = 1000000;
  std::array<glove::EncoderFrame, 3> originals;
  std::vector<std::uint8_t> stream(3 * glove::kFrameBytes);
  for (int trial = 0; trial < kTrials; ++trial) {
    if (trial % 64 == 0) {
      for (int i = 0; i < 3; ++i) {
        originals[i] = random_frame(static_cast<std::uint8_t>(trial + i));
        const auto bytes = glove::encode_frame(originals[i]);
        std::copy(bytes.begin(), bytes.end(), stream.begin() + i * static_cast<std::ptrdiff_t>(glove::kFrameBytes));
      }
    }
    std::vector<std::uint8_t> mutated = stream;
    const std::size_t len = 1 + rng() % 2;
    const std::size_t pos = glove::kFrameBytes + rng() % (glove::kFrameBytes - len + 1);
    bool changed = false;
    while (!changed) {
      for (std::size_t k = 0; k < len; ++k) {
        mutated[pos + k] = static_cast<std::uint8_t>(rng());
        changed = changed || mutated[pos + k] != stream[pos + k];
      }
    }
    glove::FrameDecoder dec;
    bool first = false, last = false;
    for (std::size_t fed = 0; fed < mutated.size();) {
      const std::size_t n = std::min<std::size_t>(1 + rng() % 64, mutated.size() - fed);
      dec.feed(std::span<const std::uint8_t>(mutated.data() + fed, n));
      fed += n;
      while (auto f = dec.next()) {
        if (*f == originals[0]) first = true;
        else if (*f == originals[2]) last = true;
        else ++accepted_corrupt;
      }
    }
    lost_prefix += !first;
    missed_resync += !last;
  }
  // Random garbage ahead of an intact frame: the decoder must still find it.
  std::uint64_t garbage_recovered = 0;
  constexpr int kStreams = 2000;
  for (int s = 0; s < kStreams; ++s) {
    std::vector<std::uint8_t> bytes(rng() % 300);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const auto f = random_frame(static_cast<std::uint8_t>(s));
    const auto enc = glove::encode_frame(f);
    bytes.insert(bytes.end(), enc.begin(), enc.end());
    glove::FrameDecoder dec;
    dec.feed(bytes);
    bool found = false;
    while (auto got = dec.next()) found = found || *got == f;
    garbage_recovered += found;
  }
  const double t = sw.seconds();
  return {accepted_corrupt == 0 && missed_resync == 0 && lost_prefix == 0 && garbage_recovered == kStreams,
          fmt("1e6 mutations: %llu corrupt frames accepted, %llu lost leading, %llu missed resyncs; %llu/%d garbage streams recovered, %.1f s",
              static_cast<unsigned long long>(accepted_corrupt), static_cast<unsigned long long>(lost_prefix),
              static_cast<unsigned long long>(missed_resync),
              static_cast<unsigned long long>(garbage_recovered), kStreams, t)};
}

}  // namespace

int main() {
  const std::array<std::pair<const char*, std::function<Outcome()>>, 9> criteria = {{
      {"angle conversion", conversion},
      {"calibration bound", calibration},
      {"feedback table", feedback_table},
      {"kp map", kp_map},
      {"kinematics numerics", kinematics},
      {"ik quality", ik_quality},
      {"rate budget", rate_budget},
      {"determinism and replay", determinism},
      {"codec robustness", codec_fuzz},
  }};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << "  " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << (criteria.size() - static_cast<std::size_t>(failed)) << "/"
            << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
