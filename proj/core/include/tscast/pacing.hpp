#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tscast/ts_packet.hpp"

namespace tscast {

/// Storage-derived bitrate with every division truncated toward zero.
struct BitrateReport {
  uint64_t bytes_per_sec = 0;
  uint64_t kilobytes_per_sec = 0; // bytes_per_sec / 1024
  uint64_t bits_per_sec = 0;      // bytes_per_sec * 8
  uint64_t megabits_per_sec = 0;  // bits_per_sec / 1024 / 1024

  auto operator<=>(const BitrateReport&) const = default;
};

/// stored_bytes / duration_seconds, truncating, plus the derived unit
/// conversions. Throws zero_duration.
BitrateReport bitrate_from_storage(uint64_t stored_bytes,
                                   uint64_t duration_seconds);

/// Native mux rate measured between the first and last PCR of one PID.
struct PcrRate {
  uint64_t numerator = 0;   // exact rate = numerator / denominator bits/sec
  uint64_t denominator = 1; // reduced
  uint64_t bits_per_sec = 0; // rounded to nearest
  uint16_t pcr_pid = kPidNull;
  uint64_t span_bytes = 0; // byte distance between the two anchor packets
  uint64_t span_ticks = 0; // 27 MHz ticks between their PCRs
};

/// rate = span_bytes * 8 * 27e6 / span_ticks, using the first PID that
/// carries at least two PCRs. Wrap is unwrapped; throws insufficient_pcrs,
/// non_monotone_pcr.
PcrRate bitrate_from_pcr(std::span<const uint8_t> ts);

/// Unwrap a 33+9-bit PCR tick counter: `raw` is extended past `prev`
/// whenever a backward jump exceeds half the counter range.
uint64_t unwrap_pcr_ticks(uint64_t prev_unwrapped, uint64_t raw_ticks);

enum class PacingMode { constant_rate, pcr_locked };

struct PacingSchedule {
  PacingMode mode = PacingMode::constant_rate;
  std::vector<uint64_t> offsets_us; // per packet, non-decreasing, starts at 0

  uint64_t duration_us() const {
    return offsets_us.empty() ? 0 : offsets_us.back();
  }
};

/// Constant-rate schedule: offset(i) = i * 188 * 8 * 1e6 / rate microseconds.
/// Throws zero_rate.
PacingSchedule make_schedule(std::size_t packet_count, uint64_t bits_per_sec);

/// PCR-locked schedule: offsets interpolate linearly between PCR anchors;
/// the edges extend the nearest segment's slope. Throws insufficient_pcrs,
/// non_monotone_pcr.
PacingSchedule make_schedule_from_pcr(std::span<const uint8_t> ts);

} // namespace tscast
