#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dexlink/glove/wire.hpp"
#include "dexlink/teleop/control_loop.hpp"

namespace dexlink::teleop {

/// Nearest-rank percentile (p in [0, 100]) of a sample.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

struct LatencyStats {
  std::size_t count = 0;
  double min_s = 0.0;
  double p50_s = 0.0;
  double p99_s = 0.0;
  double max_s = 0.0;
  double mean_s = 0.0;
};

inline LatencyStats latency_stats(const std::vector<double>& v) {
  LatencyStats s;
  s.count = v.size();
  if (v.empty()) return s;
  s.min_s = *std::min_element(v.begin(), v.end());
  s.max_s = *std::max_element(v.begin(), v.end());
  s.p50_s = percentile(v, 50.0);
  s.p99_s = percentile(v, 99.0);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean_s = sum / static_cast<double>(v.size());
  return s;
}

/// Text histogram with logarithmic buckets from 10 us to 100 ms.
inline void print_histogram(std::ostream& os, const std::vector<double>& v) {
  static constexpr double kEdges[] = {1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 3.33e-2, 5e-2, 1e-1};
  constexpr std::size_t kBuckets = std::size(kEdges) + 1;
  std::array<std::size_t, kBuckets> counts{};
  for (double x : v) {
    std::size_t b = 0;
    while (b < std::size(kEdges) && x >= kEdges[b]) ++b;
    ++counts[b];
  }
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
  auto label = [](double s) {
    char buf[32];
    if (s < 1e-3) std::snprintf(buf, sizeof buf, "%6.0fus", s * 1e6);
    else std::snprintf(buf, sizeof buf, "%6.1fms", s * 1e3);
    return std::string(buf);
  };
  for (std::size_t b = 0; b < kBuckets; ++b) {
    const std::string lo = b == 0 ? std::string("       0") : label(kEdges[b - 1]);
    const std::string hi = b == std::size(kEdges) ? std::string("     inf") : label(kEdges[b]);
    os << lo << " .. " << hi << " | " << std::string(counts[b] * 40 / peak, '#') << ' ' << counts[b] << '\n';
  }
}

struct DecodeThroughput {
  std::size_t frames = 0;
  double seconds = 0.0;
  double frames_per_second() const { return seconds > 0.0 ? static_cast<double>(frames) / seconds : 0.0; }
};

/// Times FrameDecoder over a prebuilt stream of `frames` random frames fed
/// in `chunk`-byte pieces.
inline DecodeThroughput measure_decode_throughput(std::size_t frames, std::size_t chunk = 64, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> stream;
  stream.reserve(frames * glove::kFrameBytes);
  for (std::size_t i = 0; i < frames; ++i) {
    glove::EncoderFrame f;
    f.seq = static_cast<std::uint8_t>(i);
    for (auto& c : f.adc_codes) c = static_cast<std::uint32_t>(rng() % (glove::kAdcMaxCode + 1ull));
    f.vcc_code = glove::kAdcMaxCode;
    const auto bytes = glove::encode_frame(f);
    stream.insert(stream.end(), bytes.begin(), bytes.end());
  }
  glove::FrameDecoder decoder;
  DecodeThroughput out;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t pos = 0; pos < stream.size(); pos += chunk) {
    const std::size_t n = std::min(chunk, stream.size() - pos);
    decoder.feed(std::span<const std::uint8_t>(stream.data() + pos, n));
    while (decoder.next()) ++out.frames;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct BenchReport {
  LatencyStats ticks;
  std::vector<double> tick_latency_s;
  DecodeThroughput decode;
  std::uint64_t ik_iterations_max = 0;
};

/// Runs the control loop as fast as it will go with the simulated clock
/// and times every tick (the work a wall-clock tick must finish within one
/// period).
inline BenchReport run_bench(ControlLoop& loop, std::size_t ticks, std::size_t decode_frames = 20000) {
  BenchReport r;
  r.tick_latency_s.reserve(ticks);
  const double rate = loop.config().loop.control_rate;
  for (std::size_t k = 0; k < ticks; ++k) {
    const auto now_ns = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1e9 / rate));
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = loop.tick(now_ns);
    r.tick_latency_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!s) break;
    r.ik_iterations_max = std::max<std::uint64_t>(r.ik_iterations_max, static_cast<std::uint64_t>(s->ik_iterations));
  }
  r.ticks = latency_stats(r.tick_latency_s);
  r.decode = measure_decode_throughput(decode_frames);
  return r;
}

}  // namespace dexlink::teleop
