#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <span>
#include <string>

#include "tscast/ts_packet.hpp"

namespace tscast {

struct PidStats {
  uint64_t packets = 0;
  uint64_t cc_errors = 0;
};

struct StatsSnapshot {
  uint64_t total_packets = 0;
  uint64_t total_bytes = 0;
  uint64_t cc_errors = 0;
  uint64_t scrambled_packets = 0;
  uint64_t transport_errors = 0;
  uint64_t malformed_packets = 0;
  uint64_t bitrate_bps = 0;   // over the sliding window
  uint64_t pcr_jitter_us = 0; // max |arrival - PCR expectation| so far
  uint64_t duration_us = 0;   // first update to latest update
  std::map<uint16_t, PidStats> per_pid;
};

/// Reception-quality accumulator. One writer calls update(); any thread may
/// take a snapshot.
///
/// Continuity rule: checked only on payload-carrying packets; a repeat of the
/// previous counter is tolerated once; discontinuity_indicator suppresses the
/// error; the null PID is never checked. transport_error packets are counted
/// but not continuity-checked.
///
/// PCR jitter locks onto the first PCR-bearing PID and compares each later
/// PCR's arrival offset with the offset the PCR timeline predicts.
class StreamStats {
 public:
  explicit StreamStats(uint64_t window_us = 1'000'000);

  void update(const TsPacket& packet, uint64_t arrival_us);
  /// Parses and updates; malformed bytes are tallied, never thrown.
  void update_raw(std::span<const uint8_t> packet, uint64_t arrival_us);

  StatsSnapshot snapshot() const;
  void reset();

 private:
  struct PidTrack {
    PidStats stats;
    int last_cc = -1;
    bool duplicate_spent = false;
  };
  struct Bucket {
    uint64_t start_us = 0;
    uint64_t bytes = 0;
  };

  void note_bytes(uint64_t arrival_us, uint64_t bytes);

  mutable std::mutex mutex_;
  uint64_t window_us_;
  std::map<uint16_t, PidTrack> pids_;
  std::deque<Bucket> window_;
  uint64_t window_bytes_ = 0;

  uint64_t total_packets_ = 0;
  uint64_t total_bytes_ = 0;
  uint64_t cc_errors_ = 0;
  uint64_t scrambled_ = 0;
  uint64_t transport_errors_ = 0;
  uint64_t malformed_ = 0;

  bool started_ = false;
  uint64_t first_arrival_us_ = 0;
  uint64_t last_arrival_us_ = 0;

  uint16_t jitter_pid_ = kPidNull;
  bool jitter_started_ = false;
  uint64_t jitter_base_ticks_ = 0;
  uint64_t jitter_base_arrival_us_ = 0;
  uint64_t jitter_last_ticks_ = 0;
  uint64_t pcr_jitter_us_ = 0;
};

/// One line-delimited JSON record, no trailing newline.
std::string stats_report_line(const StatsSnapshot& snap, uint64_t timestamp_ms);

} // namespace tscast
