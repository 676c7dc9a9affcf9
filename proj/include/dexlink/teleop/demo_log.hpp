#pragma once

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <boost/crc.hpp>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "dexlink/error.hpp"
#include "dexlink/haptic/feedback.hpp"
#include "dexlink/kinematics/transform.hpp"

// Demonstration log layout (all integers little-endian):
//   "DXLKDEMO" | u32 header_len | header JSON
//   then per record: u32 payload_len | payload | u32 crc32(payload)
// payload: i64 t_ns | u16 n | n x f64 glove_q | u16 m | m x f64 robot_q |
//          5 x f64 forces | 5 x u8 feedback class | 12 x f64 wrist pose
//          (rotation row-major, then translation)

namespace dexlink::teleop {

inline constexpr char kDemoMagic[8] = {'D', 'X', 'L', 'K', 'D', 'E', 'M', 'O'};
inline constexpr int kDemoSchemaVersion = 1;

struct DemoRecord {
  std::int64_t t_ns = 0;
  std::vector<double> glove_q;
  std::vector<double> robot_q;
  std::array<double, 5> forces{};
  std::array<haptic::FeedbackClass, 5> feedback{};
  kin::Transform wrist_pose;

  bool operator==(const DemoRecord&) const = default;
};

struct DemoHeader {
  int schema_version = kDemoSchemaVersion;
  std::string glove_model;
  std::string robot_model;
  std::size_t glove_dof = 0;
  std::size_t robot_dof = 0;
  std::string config_hash;
  std::string scenario;

  nlohmann::json to_json() const {
    return {{"schema_version", schema_version}, {"glove_model", glove_model}, {"robot_model", robot_model},
            {"glove_dof", glove_dof},           {"robot_dof", robot_dof},     {"config_hash", config_hash},
            {"scenario", scenario}};
  }

  static DemoHeader from_json(const nlohmann::json& j) {
    DemoHeader h;
    h.schema_version = j.at("schema_version").get<int>();
    h.glove_model = j.at("glove_model").get<std::string>();
    h.robot_model = j.at("robot_model").get<std::string>();
    h.glove_dof = j.at("glove_dof").get<std::size_t>();
    h.robot_dof = j.at("robot_dof").get<std::size_t>();
    h.config_hash = j.at("config_hash").get<std::string>();
    h.scenario = j.value("scenario", std::string{});
    return h;
  }

  bool operator==(const DemoHeader&) const = default;
};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(data, n);
  return crc.checksum();
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  std::vector<std::uint8_t> bytes;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}
  bool u8(std::uint8_t& v) { return take(v, 1); }
  bool u16(std::uint16_t& v) { return take(v, 2); }
  bool i64(std::int64_t& v) {
    std::uint64_t u = 0;
    if (!take(u, 8)) return false;
    v = static_cast<std::int64_t>(u);
    return true;
  }
  bool f64(double& v) {
    std::uint64_t u = 0;
    if (!take(u, 8)) return false;
    v = std::bit_cast<double>(u);
    return true;
  }
  bool done() const { return pos_ == n_; }

 private:
  template <typename T>
  bool take(T& v, int n) {
    if (pos_ + static_cast<std::size_t>(n) > n_) return false;
    std::uint64_t acc = 0;
    for (int i = 0; i < n; ++i) acc |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    v = static_cast<T>(acc);
    return true;
  }
  const std::uint8_t* data_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> encode_record(const DemoRecord& r) {
  ByteWriter w;
  w.i64(r.t_ns);
  w.u16(static_cast<std::uint16_t>(r.glove_q.size()));
  for (double v : r.glove_q) w.f64(v);
  w.u16(static_cast<std::uint16_t>(r.robot_q.size()));
  for (double v : r.robot_q) w.f64(v);
  for (double v : r.forces) w.f64(v);
  for (auto c : r.feedback) w.u8(static_cast<std::uint8_t>(c));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) w.f64(r.wrist_pose.rotation(i, k));
  }
  for (int i = 0; i < 3; ++i) w.f64(r.wrist_pose.translation[i]);
  return std::move(w.bytes);
}

inline bool decode_record(const std::uint8_t* data, std::size_t n, DemoRecord& r) {
  ByteReader rd(data, n);
  std::uint16_t count = 0;
  if (!rd.i64(r.t_ns) || !rd.u16(count)) return false;
  r.glove_q.resize(count);
  for (double& v : r.glove_q) {
    if (!rd.f64(v)) return false;
  }
  if (!rd.u16(count)) return false;
  r.robot_q.resize(count);
  for (double& v : r.robot_q) {
    if (!rd.f64(v)) return false;
  }
  for (double& v : r.forces) {
    if (!rd.f64(v)) return false;
  }
  for (auto& c : r.feedback) {
    std::uint8_t b = 0;
    if (!rd.u8(b) || b > 3) return false;
    c = static_cast<haptic::FeedbackClass>(b);
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (!rd.f64(r.wrist_pose.rotation(i, k))) return false;
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (!rd.f64(r.wrist_pose.translation[i])) return false;
  }
  return rd.done();
}

}  // namespace detail

/// Appends records to a demonstration file. Every record is flushed so a
/// process that stops mid-run leaves a readable prefix.
class DemoWriter {
 public:
  DemoWriter(const std::string& path, const DemoHeader& header) : header_(header), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open demonstration file '" + path + "' for writing");
    const std::string h = header.to_json().dump();
    detail::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(h.size()));
    out_.write(kDemoMagic, sizeof kDemoMagic);
    write_bytes(w.bytes);
    out_.write(h.data(), static_cast<std::streamsize>(h.size()));
    check();
  }

  void append(const DemoRecord& r) {
    if (r.glove_q.size() != header_.glove_dof) throw DimensionMismatch(header_.glove_dof, r.glove_q.size());
    if (r.robot_q.size() != header_.robot_dof) throw DimensionMismatch(header_.robot_dof, r.robot_q.size());
    if (count_ > 0 && r.t_ns < last_t_) throw ValidationError("demonstration timestamps must be monotone");
    const auto payload = detail::encode_record(r);
    detail::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size()));
    write_bytes(w.bytes);
    write_bytes(payload);
    detail::ByteWriter c;
    c.u32(detail::crc32(payload.data(), payload.size()));
    write_bytes(c.bytes);
    out_.flush();
    check();
    last_t_ = r.t_ns;
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  void write_bytes(const std::vector<std::uint8_t>& b) {
    out_.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  void check() {
    if (!out_) throw IoError("write to demonstration file failed");
  }

  DemoHeader header_;
  std::ofstream out_;
  std::size_t count_ = 0;
  std::int64_t last_t_ = 0;
};

struct DemoLog {
  DemoHeader header;
  std::vector<DemoRecord> records;
};

/// Parses a whole demonstration. Throws CorruptRecord naming the last
/// record that decoded cleanly when the file is truncated or damaged.
inline DemoLog parse_demo(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < sizeof kDemoMagic + 4 || std::memcmp(bytes.data(), kDemoMagic, sizeof kDemoMagic) != 0) {
    throw CorruptRecord(-1, 0, "missing demonstration magic");
  }
  pos = sizeof kDemoMagic;
  auto read_u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(bytes[at]) | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 16) | (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
  };
  const std::uint32_t header_len = read_u32(pos);
  pos += 4;
  if (bytes.size() - pos < header_len) throw CorruptRecord(-1, pos, "truncated header");
  DemoLog log;
  try {
    log.header = DemoHeader::from_json(
        nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                              bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len)));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecord(-1, pos, std::string("bad header: ") + e.what());
  }
  if (log.header.schema_version != kDemoSchemaVersion) throw CorruptRecord(-1, pos, "unsupported schema version");
  pos += header_len;

  long long index = -1;
  while (pos < bytes.size()) {
    const std::size_t record_start = pos;
    if (bytes.size() - pos < 4) throw CorruptRecord(index, record_start, "truncated length prefix");
    const std::uint32_t len = read_u32(pos);
    pos += 4;
    if (bytes.size() - pos < static_cast<std::size_t>(len) + 4) throw CorruptRecord(index, record_start, "truncated record");
    const std::uint32_t crc = read_u32(pos + len);
    if (detail::crc32(bytes.data() + pos, len) != crc) throw CorruptRecord(index, record_start, "checksum mismatch");
    DemoRecord r;
    if (!detail::decode_record(bytes.data() + pos, len, r) || r.glove_q.size() != log.header.glove_dof ||
        r.robot_q.size() != log.header.robot_dof) {
      throw CorruptRecord(index, record_start, "malformed record payload");
    }
    if (!log.records.empty() && r.t_ns < log.records.back().t_ns) {
      throw CorruptRecord(index, record_start, "non-monotone timestamp");
    }
    log.records.push_back(std::move(r));
    pos += static_cast<std::size_t>(len) + 4;
    ++index;
  }
  return log;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline DemoLog read_demo(const std::string& path) { return parse_demo(read_file_bytes(path)); }

/// A record paired with the time it should be delivered, relative to the
/// first record and divided by the replay speed.
struct ScheduledRecord {
  std::int64_t deliver_at_ns = 0;
  const DemoRecord* record = nullptr;
};

inline std::vector<ScheduledRecord> replay_schedule(const DemoLog& log, double speed) {
  if (!(speed > 0.0)) throw ValidationError("replay speed must be > 0");
  std::vector<ScheduledRecord> out;
  if (log.records.empty()) return out;
  const std::int64_t t0 = log.records.front().t_ns;
  for (const DemoRecord& r : log.records) {
    out.push_back({static_cast<std::int64_t>(std::llround(static_cast<double>(r.t_ns - t0) / speed)), &r});
  }
  return out;
}

/// Delivers records to `sink` in order; in wall-clock mode each delivery
/// waits until its scheduled time.
inline void replay(const DemoLog& log, double speed, bool wall_clock, const std::function<void(const ScheduledRecord&)>& sink) {
  const auto schedule = replay_schedule(log, speed);
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : schedule) {
    if (wall_clock) std::this_thread::sleep_until(start + std::chrono::nanoseconds(s.deliver_at_ns));
    sink(s);
  }
}

}  // namespace dexlink::teleop
