#include "tscast/pacing.hpp"

#include <map>
#include <numeric>
#include <string>

namespace tscast {

BitrateReport bitrate_from_storage(uint64_t stored_bytes,
                                   uint64_t duration_seconds) {
  if (duration_seconds == 0)
    raise(Errc::zero_duration, "cannot derive a rate over zero seconds");
  BitrateReport r;
  r.bytes_per_sec = stored_bytes / duration_seconds;
  r.kilobytes_per_sec = r.bytes_per_sec / 1024;
  r.bits_per_sec = r.bytes_per_sec * 8;
  r.megabits_per_sec = r.bits_per_sec / 1024 / 1024;
  return r;
}

uint64_t unwrap_pcr_ticks(uint64_t prev_unwrapped, uint64_t raw_ticks) {
  const uint64_t prev_mod = prev_unwrapped % kPcrTicksModulus;
  uint64_t candidate = prev_unwrapped - prev_mod + raw_ticks;
  if (raw_ticks < prev_mod && prev_mod - raw_ticks > kPcrTicksModulus / 2)
    candidate += kPcrTicksModulus;
  return candidate; // may still be <= prev: that is a genuine backward step
}

namespace {

struct PcrAnchors {
  uint16_t pid = kPidNull;
  // (packet index, unwrapped 27 MHz ticks)
  std::vector<std::pair<uint64_t, uint64_t>> points;
};

/// Anchors of the first PID (in order of appearance) that carries at least
/// two PCRs. Throws insufficient_pcrs / non_monotone_pcr.
PcrAnchors collect_pcr_anchors(std::span<const uint8_t> ts) {
  std::map<uint16_t, PcrAnchors> per_pid;
  std::vector<uint16_t> order;
  uint64_t index = 0;
  for (std::size_t pos = 0; pos + kPacketSize <= ts.size();
       pos += kPacketSize, ++index) {
    TsPacket pkt;
    try {
      pkt = parse_packet(ts.subspan(pos, kPacketSize));
    } catch (const Error&) {
      continue;
    }
    const auto pcr = pkt.pcr();
    if (!pcr)
      continue;
    auto [it, fresh] = per_pid.try_emplace(pkt.pid);
    if (fresh) {
      it->second.pid = pkt.pid;
      order.push_back(pkt.pid);
    }
    uint64_t ticks = pcr_ticks(*pcr);
    auto& points = it->second.points;
    if (!points.empty()) {
      ticks = unwrap_pcr_ticks(points.back().second, ticks);
      if (ticks <= points.back().second)
        raise(Errc::non_monotone_pcr,
              "PCR on pid " + std::to_string(pkt.pid) +
                  " steps backward at packet " + std::to_string(index));
    }
    points.emplace_back(index, ticks);
  }
  for (uint16_t pid : order)
    if (per_pid[pid].points.size() >= 2)
      return per_pid[pid];
  raise(Errc::insufficient_pcrs, "need at least two PCRs on one PID");
}

} // namespace

PcrRate bitrate_from_pcr(std::span<const uint8_t> ts) {
  const PcrAnchors anchors = collect_pcr_anchors(ts);
  const auto& first = anchors.points.front();
  const auto& last = anchors.points.back();

  PcrRate rate;
  rate.pcr_pid = anchors.pid;
  rate.span_bytes = (last.first - first.first) * kPacketSize;
  rate.span_ticks = last.second - first.second;

  unsigned __int128 n =
      static_cast<unsigned __int128>(rate.span_bytes) * 8 * 27'000'000;
  uint64_t d = rate.span_ticks;
  rate.bits_per_sec = static_cast<uint64_t>((n + d / 2) / d);
  for (uint64_t g = std::gcd(static_cast<uint64_t>(n % d), d); g > 1;
       g = std::gcd(static_cast<uint64_t>(n % d), d)) {
    n /= g;
    d /= g;
  }
  rate.numerator = static_cast<uint64_t>(n);
  rate.denominator = d;
  return rate;
}

PacingSchedule make_schedule(std::size_t packet_count, uint64_t bits_per_sec) {
  if (bits_per_sec == 0)
    raise(Errc::zero_rate, "pacing rate must be positive");
  PacingSchedule s;
  s.mode = PacingMode::constant_rate;
  s.offsets_us.reserve(packet_count);
  constexpr unsigned __int128 kUsPerPacketNumerator =
      static_cast<unsigned __int128>(kPacketSize) * 8 * 1'000'000;
  for (std::size_t i = 0; i < packet_count; ++i)
    s.offsets_us.push_back(static_cast<uint64_t>(
        (kUsPerPacketNumerator * i) / bits_per_sec));
  return s;
}

PacingSchedule make_schedule_from_pcr(std::span<const uint8_t> ts) {
  const PcrAnchors anchors = collect_pcr_anchors(ts);
  const auto& pts = anchors.points;
  const std::size_t packet_count = ts.size() / kPacketSize;

  using i128 = __int128;
  // Interpolated tick value at packet i; edge packets extend the nearest
  // segment's slope.
  auto ticks_at = [&](std::size_t i) -> i128 {
    if (i <= pts.front().first) {
      const auto& [i0, t0] = pts.front();
      const auto& [i1, t1] = pts[1];
      const i128 dt = i128(t1) - i128(t0);
      const i128 di = i128(i1) - i128(i0);
      return i128(t0) - (i128(i0 - i) * dt) / di;
    }
    if (i >= pts.back().first) {
      const auto& [i0, t0] = pts[pts.size() - 2];
      const auto& [i1, t1] = pts.back();
      const i128 dt = i128(t1) - i128(t0);
      const i128 di = i128(i1) - i128(i0);
      return i128(t1) + (i128(i - i1) * dt) / di;
    }
    // Binary search for the segment containing i.
    std::size_t lo = 0, hi = pts.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (pts[mid].first <= i ? lo : hi) = mid;
    }
    const auto& [i0, t0] = pts[lo];
    const auto& [i1, t1] = pts[hi];
    const i128 dt = i128(t1) - i128(t0);
    const i128 di = i128(i1) - i128(i0);
    return i128(t0) + (i128(i - i0) * dt) / di;
  };

  PacingSchedule s;
  s.mode = PacingMode::pcr_locked;
  s.offsets_us.reserve(packet_count);
  const i128 base = ticks_at(0);
  for (std::size_t i = 0; i < packet_count; ++i)
    s.offsets_us.push_back(static_cast<uint64_t>((ticks_at(i) - base) / 27));
  return s;
}

} // namespace tscast
