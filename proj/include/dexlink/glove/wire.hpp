#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "dexlink/glove/encoder.hpp"
#include "dexlink/glove/glove_state.hpp"

// Encoder frame layout (56 bytes, multi-byte fields big-endian):
//   0..1   sync 0xAA 0x55
//   2      seq (rolling u8)
//   3..50  16 x u24 ADC codes
//   51..53 u24 reference (V_CC) code
//   54..55 CRC-16/CCITT-FALSE over bytes 2..53

namespace dexlink::glove {

inline constexpr std::uint8_t kSync0 = 0xAA;
inline constexpr std::uint8_t kSync1 = 0x55;
inline constexpr std::size_t kPayloadBytes = 1 + 3 * kEncoderChannels + 3;
inline constexpr std::size_t kFrameBytes = 2 + kPayloadBytes + 2;

struct EncoderFrame {
  std::uint8_t seq = 0;
  std::array<std::uint32_t, kEncoderChannels> adc_codes{};
  std::uint32_t vcc_code = kAdcMaxCode;

  bool operator==(const EncoderFrame&) const = default;
};

struct ServoState {
  std::array<std::uint16_t, kServoChannels> positions{};  // ticks, [0, 4095]
  std::array<std::int16_t, kServoChannels> currents_ma{};

  bool operator==(const ServoState&) const = default;
};

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
inline std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc ^= static_cast<std::uint16_t>(b) << 8;
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

inline std::array<std::uint8_t, kFrameBytes> encode_frame(const EncoderFrame& f) {
  std::array<std::uint8_t, kFrameBytes> out{};
  std::size_t i = 0;
  auto put24 = [&](std::uint32_t v) {
    out[i++] = static_cast<std::uint8_t>((v >> 16) & 0xFF);
    out[i++] = static_cast<std::uint8_t>((v >> 8) & 0xFF);
    out[i++] = static_cast<std::uint8_t>(v & 0xFF);
  };
  out[i++] = kSync0;
  out[i++] = kSync1;
  out[i++] = f.seq;
  for (std::uint32_t code : f.adc_codes) put24(code & kAdcMaxCode);
  put24(f.vcc_code & kAdcMaxCode);
  const std::uint16_t crc = crc16_ccitt_false(std::span(out).subspan(2, kPayloadBytes));
  out[i++] = static_cast<std::uint8_t>(crc >> 8);
  out[i++] = static_cast<std::uint8_t>(crc & 0xFF);
  return out;
}

enum class DecodeStatus {
  frame,         // `frame` holds a valid frame
  incomplete,    // need more bytes; `consumed` leading bytes are garbage
  crc_mismatch,  // candidate at a sync was rejected; `consumed` skips past its sync
  bad_reference  // CRC passed but vcc_code is zero
};

struct DecodeResult {
  DecodeStatus status = DecodeStatus::incomplete;
  std::optional<EncoderFrame> frame;
  std::size_t consumed = 0;
};

/// Scans `bytes` for the first sync and tries a frame there. Never reads
/// outside the span; always makes progress unless more input is needed.
inline DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  std::size_t start = 0;
  while (start + 1 < bytes.size() && !(bytes[start] == kSync0 && bytes[start + 1] == kSync1)) ++start;
  if (start + 1 >= bytes.size()) {
    // Keep a trailing 0xAA: it may be the first half of a sync.
    const bool keep_last = !bytes.empty() && bytes.back() == kSync0;
    return {DecodeStatus::incomplete, std::nullopt, keep_last ? bytes.size() - 1 : bytes.size()};
  }
  if (bytes.size() - start < kFrameBytes) return {DecodeStatus::incomplete, std::nullopt, start};

  const auto frame = bytes.subspan(start, kFrameBytes);
  const std::uint16_t expected = crc16_ccitt_false(frame.subspan(2, kPayloadBytes));
  const auto got = static_cast<std::uint16_t>((frame[kFrameBytes - 2] << 8) | frame[kFrameBytes - 1]);
  if (expected != got) return {DecodeStatus::crc_mismatch, std::nullopt, start + 1};

  EncoderFrame f;
  std::size_t i = 2;
  auto get24 = [&]() {
    const std::uint32_t v = (static_cast<std::uint32_t>(frame[i]) << 16) |
                            (static_cast<std::uint32_t>(frame[i + 1]) << 8) | frame[i + 2];
    i += 3;
    return v;
  };
  f.seq = frame[i++];
  for (auto& code : f.adc_codes) code = get24();
  f.vcc_code = get24();
  if (f.vcc_code == 0) return {DecodeStatus::bad_reference, std::nullopt, start + 1};
  return {DecodeStatus::frame, f, start + kFrameBytes};
}

/// Streaming decoder owning its resync buffer. Single owner, not shared.
class FrameDecoder {
 public:
  struct Stats {
    std::uint64_t frames = 0;
    std::uint64_t crc_errors = 0;
    std::uint64_t bad_reference = 0;
    std::uint64_t dropped_frames = 0;  // inferred from seq gaps
    std::uint64_t garbage_bytes = 0;
  };

  void feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

  /// Next valid frame, or nullopt once the buffered bytes are exhausted.
  std::optional<EncoderFrame> next() {
    while (true) {
      const DecodeResult r = decode_frame(std::span<const std::uint8_t>(buffer_.data() + head_, buffer_.size() - head_));
      switch (r.status) {
        case DecodeStatus::frame:
          stats_.garbage_bytes += r.consumed - kFrameBytes;
          advance(r.consumed);
          note_seq(r.frame->seq);
          ++stats_.frames;
          return r.frame;
        case DecodeStatus::crc_mismatch:
          ++stats_.crc_errors;
          stats_.garbage_bytes += r.consumed;
          advance(r.consumed);
          break;
        case DecodeStatus::bad_reference:
          ++stats_.bad_reference;
          stats_.garbage_bytes += r.consumed;
          advance(r.consumed);
          break;
        case DecodeStatus::incomplete:
          stats_.garbage_bytes += r.consumed;
          advance(r.consumed);
          return std::nullopt;
      }
    }
  }

  const Stats& stats() const { return stats_; }
  std::size_t buffered() const { return buffer_.size() - head_; }

 private:
  void advance(std::size_t n) {
    head_ += n;
    if (head_ > 4096 && head_ * 2 > buffer_.size()) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
      head_ = 0;
    }
  }

  void note_seq(std::uint8_t seq) {
    if (last_seq_) stats_.dropped_frames += static_cast<std::uint8_t>(seq - *last_seq_ - 1);
    last_seq_ = seq;
  }

  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;
  std::optional<std::uint8_t> last_seq_;
  Stats stats_;
};

}  // namespace dexlink::glove
