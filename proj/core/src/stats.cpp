#include "tscast/stats.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "tscast/pacing.hpp"

namespace tscast {

namespace {
constexpr uint64_t kBucketUs = 10'000;
}

StreamStats::StreamStats(uint64_t window_us)
    : window_us_(window_us ? window_us : 1) {}

void StreamStats::note_bytes(uint64_t arrival_us, uint64_t bytes) {
  if (window_.empty() || arrival_us - window_.back().start_us >= kBucketUs)
    window_.push_back({arrival_us, 0});
  window_.back().bytes += bytes;
  window_bytes_ += bytes;
  while (!window_.empty() &&
         arrival_us - window_.front().start_us > window_us_) {
    window_bytes_ -= window_.front().bytes;
    window_.pop_front();
  }
}

void StreamStats::update(const TsPacket& packet, uint64_t arrival_us) {
  std::lock_guard lock(mutex_);
  if (!started_) {
    started_ = true;
    first_arrival_us_ = arrival_us;
  }
  last_arrival_us_ = arrival_us;

  ++total_packets_;
  total_bytes_ += kPacketSize;
  note_bytes(arrival_us, kPacketSize);

  auto& track = pids_[packet.pid];
  ++track.stats.packets;

  if (packet.scrambling_control != 0)
    ++scrambled_;
  if (packet.transport_error) {
    ++transport_errors_;
    return; // content unreliable, skip continuity and PCR
  }

  if (packet.pid != kPidNull && packet.has_payload()) {
    const int cc = packet.continuity_counter;
    if (track.last_cc < 0) {
      track.last_cc = cc;
    } else if (cc == track.last_cc && !track.duplicate_spent) {
      track.duplicate_spent = true;
    } else {
      const bool discontinuity = packet.adaptation_field &&
                                 packet.adaptation_field->discontinuity();
      if (cc != ((track.last_cc + 1) & 0x0F) && !discontinuity) {
        ++track.stats.cc_errors;
        ++cc_errors_;
      }
      track.last_cc = cc;
      track.duplicate_spent = false;
    }
  }

  const auto pcr = packet.pcr();
  if (pcr) {
    if (jitter_pid_ == kPidNull)
      jitter_pid_ = packet.pid;
    if (packet.pid == jitter_pid_) {
      uint64_t ticks = pcr_ticks(*pcr);
      if (!jitter_started_) {
        jitter_started_ = true;
        jitter_base_ticks_ = ticks;
        jitter_base_arrival_us_ = arrival_us;
        jitter_last_ticks_ = ticks;
      } else {
        ticks = unwrap_pcr_ticks(jitter_last_ticks_, ticks);
        jitter_last_ticks_ = ticks;
        if (ticks > jitter_base_ticks_ && arrival_us >= jitter_base_arrival_us_) {
          const int64_t expected_us =
              static_cast<int64_t>((ticks - jitter_base_ticks_) / 27);
          const int64_t actual_us =
              static_cast<int64_t>(arrival_us - jitter_base_arrival_us_);
          const uint64_t dev =
              static_cast<uint64_t>(std::llabs(actual_us - expected_us));
          if (dev > pcr_jitter_us_)
            pcr_jitter_us_ = dev;
        }
      }
    }
  }
}

void StreamStats::update_raw(std::span<const uint8_t> packet,
                             uint64_t arrival_us) {
  TsPacket parsed;
  try {
    parsed = parse_packet(packet);
  } catch (const Error&) {
    std::lock_guard lock(mutex_);
    ++malformed_;
    total_bytes_ += packet.size();
    note_bytes(arrival_us, packet.size());
    return;
  }
  update(parsed, arrival_us);
}

StatsSnapshot StreamStats::snapshot() const {
  std::lock_guard lock(mutex_);
  StatsSnapshot s;
  s.total_packets = total_packets_;
  s.total_bytes = total_bytes_;
  s.cc_errors = cc_errors_;
  s.scrambled_packets = scrambled_;
  s.transport_errors = transport_errors_;
  s.malformed_packets = malformed_;
  s.pcr_jitter_us = pcr_jitter_us_;
  s.duration_us = started_ ? last_arrival_us_ - first_arrival_us_ : 0;
  if (window_.size() >= 2) {
    const uint64_t span = last_arrival_us_ - window_.front().start_us;
    if (span > 0)
      s.bitrate_bps = window_bytes_ * 8 * 1'000'000 / span;
  }
  for (const auto& [pid, track] : pids_)
    s.per_pid.emplace(pid, track.stats);
  return s;
}

void StreamStats::reset() {
  std::lock_guard lock(mutex_);
  pids_.clear();
  window_.clear();
  window_bytes_ = 0;
  total_packets_ = total_bytes_ = cc_errors_ = 0;
  scrambled_ = transport_errors_ = malformed_ = 0;
  started_ = false;
  first_arrival_us_ = last_arrival_us_ = 0;
  jitter_pid_ = kPidNull;
  jitter_started_ = false;
  jitter_base_ticks_ = jitter_base_arrival_us_ = jitter_last_ticks_ = 0;
  pcr_jitter_us_ = 0;
}

std::string stats_report_line(const StatsSnapshot& snap,
                              uint64_t timestamp_ms) {
  nlohmann::json per_pid = nlohmann::json::array();
  for (const auto& [pid, ps] : snap.per_pid)
    per_pid.push_back({{"pid", pid},
                       {"packets", ps.packets},
                       {"cc_errors", ps.cc_errors}});
  nlohmann::json j = {{"timestamp_ms", timestamp_ms},
                      {"total_packets", snap.total_packets},
                      {"total_bytes", snap.total_bytes},
                      {"bitrate_bps", snap.bitrate_bps},
                      {"cc_errors", snap.cc_errors},
                      {"pcr_jitter_us", snap.pcr_jitter_us},
                      {"per_pid", std::move(per_pid)}};
  return j.dump();
}

} // namespace tscast
