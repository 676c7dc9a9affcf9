#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "dexlink/kinematics/hand_layouts.hpp"
#include "dexlink/teleop/bench.hpp"
#include "dexlink/teleop/protocol.hpp"
#include "dexlink/teleop/server.hpp"
#include "dexlink/teleop/session.hpp"

#ifndef DEXLINK_DATA_DIR
#define DEXLINK_DATA_DIR "."
#endif

namespace {

using namespace dexlink;
using nlohmann::json;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string default_config() { return std::string(DEXLINK_DATA_DIR) + "/config/default.json"; }

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

int cmd_run(const std::string& config_path, const std::string& scenario, const std::string& record,
            const std::string& clock, double duration) {
  teleop::DaemonConfig cfg = teleop::load_daemon_config(config_path);
  if (clock == "wall") cfg.loop.clock = teleop::ClockMode::wall;
  else if (clock == "simulated") cfg.loop.clock = teleop::ClockMode::simulated;
  if (duration > 0.0) cfg.loop.duration_s = duration;
  teleop::SessionOptions opt;
  if (!scenario.empty()) opt.scenario = scenario;
  auto loop = teleop::make_control_loop(cfg, opt);

  std::array<std::size_t, 4> class_ticks{};
  std::array<double, kin::kFingerCount> peak{};
  loop->add_observer([&](const teleop::Snapshot& s) {
    for (std::size_t i = 0; i < kin::kFingerCount; ++i) {
      ++class_ticks[static_cast<std::size_t>(s.feedback[i].feedback_class)];
      peak[i] = std::max(peak[i], s.forces[i]);
    }
  });
  if (!record.empty()) loop->start_recording(record);
  std::signal(SIGINT, on_signal);
  const teleop::RunResult r = loop->run(&g_stop);

  std::cout << "scenario " << loop->scenario() << "  ticks " << r.ticks << "  exit "
            << teleop::exit_status_name(r.status) << '\n';
  std::cout << "peak force (g):";
  for (kin::FingerId f : kin::kAllFingers) std::cout << ' ' << kin::finger_name(f) << '=' << peak[kin::finger_index(f)];
  std::cout << "\nfinger-ticks per class:";
  for (std::size_t c = 0; c < 4; ++c) {
    std::cout << ' ' << haptic::class_name(static_cast<haptic::FeedbackClass>(c)) << '=' << class_ticks[c];
  }
  std::cout << '\n';
  if (!r.tick_latency_s.empty()) {
    const auto st = teleop::latency_stats(r.tick_latency_s);
    std::cout << "tick latency p50 " << st.p50_s * 1e3 << " ms  p99 " << st.p99_s * 1e3 << " ms\n";
  }
  if (!record.empty()) std::cout << "recorded " << record << '\n';
  return r.status == teleop::ExitStatus::source_disconnected ? 3 : 0;
}

int cmd_replay(const std::string& path, double speed, bool wall, bool summary) {
  const teleop::DemoLog log = teleop::read_demo(path);
  if (summary) {
    std::cout << log.header.to_json().dump() << '\n' << "records " << log.records.size() << '\n';
    if (!log.records.empty()) {
      const auto sched = teleop::replay_schedule(log, speed);
      std::cout << "span " << static_cast<double>(sched.back().deliver_at_ns) * 1e-9 << " s at speed " << speed << '\n';
    }
    return 0;
  }
  std::cout << log.header.to_json().dump() << '\n';
  teleop::replay(log, speed, wall, [](const teleop::ScheduledRecord& s) {
    const teleop::DemoRecord& r = *s.record;
    json fb = json::array();
    for (auto c : r.feedback) fb.push_back(haptic::class_name(c));
    std::cout << json{{"deliver_at_ns", s.deliver_at_ns},
                      {"t_ns", r.t_ns},
                      {"glove_q", r.glove_q},
                      {"robot_q", r.robot_q},
                      {"forces", r.forces},
                      {"feedback", fb}}
                     .dump()
              << '\n';
  });
  return 0;
}

int cmd_calibrate(const std::string& config_path, bool zero, int channel, const std::string& out_path) {
  const teleop::DaemonConfig cfg = teleop::load_daemon_config(config_path);
  const auto models = teleop::load_models(cfg);
  const glove::SimulatedGlove g = teleop::simulated_glove(cfg, *models.glove);

  glove::GloveCalibration cal = glove::GloveCalibration::identity();
  if (!out_path.empty() && std::filesystem::exists(out_path)) {
    std::ifstream in(out_path);
    cal = glove::glove_calibration_from_json(json::parse(in));
  }
  if (channel >= 0) {
    if (channel >= static_cast<int>(glove::kEncoderChannels)) throw OutOfRange("channel must lie in [0, 15]");
    const auto ch = static_cast<std::size_t>(channel);
    cal.tables[ch] = glove::calibrate_channel([&](double truth) { return g.encoder_reading(ch, truth); });
    double worst = 0.0;
    for (int i = 0; i <= 3600; ++i) {
      const double truth = i * 0.1;
      worst = std::max(worst, std::abs(cal.tables[ch].apply(g.encoder_reading(ch, truth)) - truth));
    }
    std::cerr << "channel " << channel << " (" << glove::kEncoderJointNames[ch] << "): " << cal.tables[ch].knots().size()
              << " knots, raw error " << std::fixed << std::setprecision(2) << g.noise().peak_error_degrees()
              << " deg peak, residual " << worst << " deg\n";
  }
  if (zero) {
    cal.zero_offsets_deg = teleop::zero_offsets(g, cal);
    std::cerr << "zero offsets captured at the flat hand\n";
  }
  if (out_path.empty()) std::cout << glove::to_json(cal).dump(2) << '\n';
  else write_json_file(out_path, glove::to_json(cal));
  return 0;
}

int cmd_bench(const std::string& config_path, std::size_t ticks, const std::string& scenario) {
  teleop::DaemonConfig cfg = teleop::load_daemon_config(config_path);
  cfg.loop.clock = teleop::ClockMode::simulated;
  teleop::SessionOptions opt;
  if (!scenario.empty()) opt.scenario = scenario;
  auto loop = teleop::make_control_loop(cfg, opt);
  const teleop::BenchReport r = teleop::run_bench(*loop, ticks);

  const double budget = 1.0 / cfg.loop.control_rate;
  std::cout << "control tick latency (" << r.ticks.count << " ticks, scenario " << loop->scenario() << ")\n";
  teleop::print_histogram(std::cout, r.tick_latency_s);
  std::cout << std::fixed << std::setprecision(3) << "p50 " << r.ticks.p50_s * 1e3 << " ms  p99 " << r.ticks.p99_s * 1e3
            << " ms  max " << r.ticks.max_s * 1e3 << " ms  budget " << budget * 1e3 << " ms\n";
  std::cout << std::setprecision(0) << "decode throughput " << r.decode.frames_per_second() << " frames/s ("
            << r.decode.frames << " frames), required " << cfg.loop.mocap_rate << '\n';
  const bool ok = r.ticks.p99_s <= budget && r.decode.frames_per_second() >= cfg.loop.mocap_rate;
  std::cout << (ok ? "within budget" : "OVER BUDGET") << '\n';
  return ok ? 0 : 1;
}

int cmd_serve(const std::string& config_path, int port, const std::string& address, const std::string& scenario) {
  teleop::DaemonConfig cfg = teleop::load_daemon_config(config_path);
  cfg.loop.clock = teleop::ClockMode::wall;
  if (port >= 0) cfg.serve.port = static_cast<unsigned short>(port);
  if (!address.empty()) cfg.serve.address = address;
  teleop::SessionOptions opt;
  opt.input = teleop::GloveInput::virtual_q;
  if (!scenario.empty()) opt.scenario = scenario;
  auto loop = teleop::make_control_loop(cfg, opt);
  teleop::TelemetryServer server(cfg.serve.address, cfg.serve.port,
                                 [&](std::string_view text) { return teleop::handle_client_message(text, *loop); });
  loop->add_observer([&](const teleop::Snapshot& s) { server.publish(teleop::snapshot_message(s).dump()); });
  std::cerr << "serving ws://" << cfg.serve.address << ':' << server.port() << " (scenario " << loop->scenario()
            << ", " << cfg.loop.control_rate << " Hz)\n";
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const teleop::RunResult r = loop->run(&g_stop, true);
  std::cerr << "stopped after " << r.ticks << " ticks\n";
  return 0;
}

int cmd_models(const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_json_file(out_dir + "/glove21.hand.json", kin::glove21_document());
  write_json_file(out_dir + "/leaphand16.hand.json", kin::leaphand16_document());
  // Round-trip through the loader so a bad generator fails here.
  for (const char* name : {"glove21.hand.json", "leaphand16.hand.json"}) {
    const auto m = kin::load_hand_model_file(out_dir + "/" + name);
    std::cout << out_dir << '/' << name << ": " << m.name() << ", " << m.dof_count() << " DoF\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dexlink: glove teleoperation daemon and tools"};
  app.require_subcommand(1);
  std::string config = default_config();

  auto* run = app.add_subcommand("run", "run the control loop");
  std::string scenario, record, clock;
  double duration = 0.0;
  run->add_option("--scenario", scenario, "scenario name");
  run->add_option("--record", record, "write a demonstration log");
  run->add_option("--clock", clock, "wall or simulated")->check(CLI::IsMember({"wall", "simulated"}));
  run->add_option("--duration", duration, "seconds (overrides loop.duration_s)");
  run->add_option("--config", config, "daemon configuration document")->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("replay", "replay a demonstration log");
  std::string replay_path;
  double speed = 1.0;
  bool wall = false, summary = false;
  rep->add_option("path", replay_path)->required()->check(CLI::ExistingFile);
  rep->add_option("--speed", speed, "replay speed factor")->check(CLI::PositiveNumber);
  rep->add_flag("--wall", wall, "pace deliveries in wall-clock time");
  rep->add_flag("--summary", summary, "print header and counts only");

  auto* cal = app.add_subcommand("calibrate", "fit encoder correction tables and zero offsets");
  bool zero = false;
  int channel = -1;
  std::string cal_out;
  auto* zopt = cal->add_flag("--zero", zero, "capture zero offsets at the flat hand");
  auto* topt = cal->add_option("--table", channel, "fit the correction table of one encoder channel");
  cal->add_option("--out", cal_out, "calibration document to update (default: print)");
  cal->add_option("--config", config, "daemon configuration document")->check(CLI::ExistingFile);
  zopt->excludes(topt);
  cal->callback([&] {
    if (!zero && channel < 0) throw CLI::RequiredError("--zero or --table");
  });

  auto* bench = app.add_subcommand("bench", "time control ticks and frame decoding");
  std::size_t ticks = 1000;
  bench->add_option("--ticks", ticks, "control ticks to time");
  bench->add_option("--scenario", scenario, "scenario name");
  bench->add_option("--config", config, "daemon configuration document")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "serve the WebSocket telemetry and command endpoint");
  int port = -1;
  std::string address;
  serve->add_option("--port", port, "TCP port (0 = any free port)")->check(CLI::Range(0, 65535));
  serve->add_option("--address", address, "listen address");
  serve->add_option("--scenario", scenario, "scenario name");
  serve->add_option("--config", config, "daemon configuration document")->check(CLI::ExistingFile);

  auto* models = app.add_subcommand("models", "write the bundled hand-description documents");
  std::string out_dir = std::string(DEXLINK_DATA_DIR) + "/models";
  models->add_option("--out-dir", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, scenario, record, clock, duration);
    if (*rep) return cmd_replay(replay_path, speed, wall, summary);
    if (*cal) return cmd_calibrate(config, zero, channel, cal_out);
    if (*bench) return cmd_bench(config, ticks, scenario);
    if (*serve) return cmd_serve(config, port, address, scenario);
    if (*models) return cmd_models(out_dir);
  } catch (const CorruptRecord& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
