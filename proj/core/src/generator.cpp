#include "tscast/generator.hpp"

#include <deque>
#include <map>
#include <random>

#include "tscast/psi.hpp"
#include "tscast/ts_packet.hpp"

namespace tscast {

namespace {

constexpr uint64_t kTicksPerMs = 27'000;

struct EsState {
  uint16_t pid = 0;
  uint8_t stream_id = 0; // PES-like start marker id
  unsigned until_unit_start = 0;
};

TsPacket make_pcr_packet(uint16_t pid, uint8_t last_cc, uint64_t ticks) {
  TsPacket pkt;
  pkt.pid = pid;
  pkt.adaptation_field_control = 2;
  pkt.continuity_counter = last_cc;
  AdaptationField af;
  af.has_flags = true;
  af.flags = 0x10;
  af.pcr = Pcr{(ticks / Pcr::kExtensionModulus) % Pcr::kBaseModulus,
               static_cast<uint32_t>(ticks % Pcr::kExtensionModulus)};
  af.stuffing = 176; // length byte + flags + PCR + stuffing = 184
  pkt.adaptation_field = af;
  return pkt;
}

} // namespace

std::vector<uint8_t> generate_fixture(const FixtureSpec& spec) {
  if (spec.programs > 31)
    raise(Errc::invalid_argument,
          "PID layout supports at most 31 programs, got " +
              std::to_string(spec.programs));
  if (spec.duration_ms > 0 && spec.bits_per_sec == 0)
    raise(Errc::invalid_argument, "rate must be positive for a timed fixture");

  PatSection pat;
  pat.transport_stream_id = 1;
  std::vector<PmtSection> pmts;
  std::vector<EsState> streams;
  std::vector<uint16_t> pcr_pids;
  for (unsigned p = 1; p <= spec.programs; ++p) {
    const uint16_t pmt_pid = static_cast<uint16_t>(p << 8);
    const uint16_t video = pmt_pid + 1;
    const uint16_t audio = pmt_pid + 2;
    pat.entries.push_back({static_cast<uint16_t>(p), pmt_pid});
    PmtSection pmt;
    pmt.program_number = static_cast<uint16_t>(p);
    pmt.pcr_pid = video;
    pmt.streams = {{0x02, video, {}}, {0x04, audio, {}}};
    pmts.push_back(std::move(pmt));
    streams.push_back({video, 0xE0, 0});
    streams.push_back({audio, 0xC0, 0});
    pcr_pids.push_back(video);
  }

  std::map<uint16_t, uint8_t> cc;
  std::vector<uint8_t> out;
  auto append = [&](const TsPacket& pkt) {
    const auto raw = serialize_packet(pkt);
    out.insert(out.end(), raw.begin(), raw.end());
  };

  std::deque<TsPacket> control;
  auto queue_psi = [&] {
    for (const auto& pkt :
         packetize_section(build_pat(pat), kPidPat, cc[kPidPat]))
      control.push_back(pkt);
    for (const auto& pmt : pmts)
      for (const auto& pkt : packetize_section(
               build_pmt(pmt), pat.entries[pmt.program_number - 1].pmt_pid,
               cc[pat.entries[pmt.program_number - 1].pmt_pid]))
        control.push_back(pkt);
  };

  const uint64_t packet_total =
      spec.duration_ms == 0
          ? 0
          : static_cast<uint64_t>(
                static_cast<unsigned __int128>(spec.bits_per_sec) *
                spec.duration_ms / (1000 * 8 * kPacketSize));
  if (packet_total == 0) {
    queue_psi();
    for (const auto& pkt : control)
      append(pkt);
    return out;
  }

  // 27 MHz tick position of packet i at the nominal rate; PCR values are
  // taken from this, so the PCR-measured rate reproduces bits_per_sec.
  auto ticks_at = [&](uint64_t i) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(i) *
                                 kPacketSize * 8 * 27'000'000 /
                                 spec.bits_per_sec);
  };
  const uint64_t psi_interval = spec.psi_interval_ms * kTicksPerMs;
  const uint64_t pcr_interval = spec.pcr_interval_ms * kTicksPerMs;

  uint64_t next_psi = 0;
  std::vector<uint64_t> next_pcr(pcr_pids.size());
  for (std::size_t p = 0; p < next_pcr.size(); ++p)
    next_pcr[p] = p * kTicksPerMs; // staggered 1 ms apart

  std::mt19937_64 rng(spec.seed);
  auto fill_random = [&](std::vector<uint8_t>& payload, std::size_t from) {
    for (std::size_t i = from; i < payload.size();) {
      uint64_t word = rng();
      for (int b = 0; b < 8 && i < payload.size(); ++b, ++i) {
        payload[i] = static_cast<uint8_t>(word);
        word >>= 8;
      }
    }
  };

  std::size_t round_robin = 0;
  for (uint64_t i = 0; i < packet_total; ++i) {
    const uint64_t t = ticks_at(i);
    if (control.empty() && psi_interval > 0 && t >= next_psi) {
      queue_psi();
      next_psi += psi_interval;
    }
    if (!control.empty()) {
      append(control.front());
      control.pop_front();
      continue;
    }

    if (pcr_interval > 0) {
      std::size_t due = next_pcr.size();
      for (std::size_t p = 0; p < next_pcr.size(); ++p)
        if (t >= next_pcr[p] && (due == next_pcr.size() ||
                                 next_pcr[p] < next_pcr[due]))
          due = p;
      if (due < next_pcr.size()) {
        const uint16_t pid = pcr_pids[due];
        append(make_pcr_packet(pid, (cc[pid] + 15) & 0x0F, t));
        next_pcr[due] += pcr_interval;
        continue;
      }
    }

    EsState& es = streams[round_robin % streams.size()];
    ++round_robin;
    TsPacket pkt;
    pkt.pid = es.pid;
    pkt.adaptation_field_control = 1;
    pkt.continuity_counter = cc[es.pid];
    cc[es.pid] = (cc[es.pid] + 1) & 0x0F;
    pkt.payload.resize(kPacketBodySize);
    if (es.until_unit_start == 0) {
      pkt.payload_unit_start = true;
      pkt.payload[0] = 0x00;
      pkt.payload[1] = 0x00;
      pkt.payload[2] = 0x01;
      pkt.payload[3] = es.stream_id;
      pkt.payload[4] = 0x00; // unbounded PES-like length
      pkt.payload[5] = 0x00;
      fill_random(pkt.payload, 6);
      es.until_unit_start = 20 + static_cast<unsigned>(rng() % 10);
    } else {
      --es.until_unit_start;
      fill_random(pkt.payload, 0);
    }
    append(pkt);
  }
  return out;
}

} // namespace tscast
