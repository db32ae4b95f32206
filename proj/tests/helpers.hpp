#pragma once

// Shared fixture builders for the test suites.

#include <random>
#include <vector>

#include "tscast/psi.hpp"
#include "tscast/ts_packet.hpp"

namespace test_helpers {

using namespace tscast;

/// Payload-carrying packet with deterministic filler bytes.
inline TsPacket make_payload_packet(uint16_t pid, uint8_t cc,
                                    uint8_t fill = 0x00) {
  TsPacket pkt;
  pkt.pid = pid;
  pkt.adaptation_field_control = 1;
  pkt.continuity_counter = cc & 0x0F;
  pkt.payload.assign(kPacketBodySize, fill);
  return pkt;
}

/// Adaptation-only packet carrying a PCR at the given 27 MHz tick value.
inline TsPacket make_pcr_packet(uint16_t pid, uint64_t ticks, uint8_t cc = 0) {
  TsPacket pkt;
  pkt.pid = pid;
  pkt.adaptation_field_control = 2;
  pkt.continuity_counter = cc & 0x0F;
  AdaptationField af;
  af.has_flags = true;
  af.flags = 0x10;
  af.pcr = Pcr{(ticks / Pcr::kExtensionModulus) % Pcr::kBaseModulus,
               static_cast<uint32_t>(ticks % Pcr::kExtensionModulus)};
  af.stuffing = 176;
  pkt.adaptation_field = af;
  return pkt;
}

inline void append_packet(std::vector<uint8_t>& out, const TsPacket& pkt) {
  const auto raw = serialize_packet(pkt);
  out.insert(out.end(), raw.begin(), raw.end());
}

/// Structurally random but always-valid packet.
inline TsPacket random_packet(std::mt19937_64& rng) {
  auto pick = [&](uint64_t n) { return static_cast<uint32_t>(rng() % n); };
  TsPacket pkt;
  pkt.transport_error = pick(20) == 0;
  pkt.payload_unit_start = pick(4) == 0;
  pkt.transport_priority = pick(8) == 0;
  pkt.pid = static_cast<uint16_t>(pick(kMaxPid + 1));
  pkt.scrambling_control = static_cast<uint8_t>(pick(4));
  pkt.continuity_counter = static_cast<uint8_t>(pick(16));
  pkt.adaptation_field_control = static_cast<uint8_t>(1 + pick(3));

  if (pkt.has_adaptation()) {
    AdaptationField af;
    // Adaptation sizes: afc==2 fills the body, afc==3 leaves payload room.
    const std::size_t af_total =
        pkt.adaptation_field_control == 2
            ? kPacketBodySize
            : 2 + pick(kPacketBodySize - 2); // >= 2: length byte + >= 1 payload
    if (af_total >= 2) {
      af.has_flags = true;
      af.flags = pick(2) ? 0x10 : 0x00;
      std::size_t used = 2; // length byte + flags
      if (af.flags & 0x10) {
        if (af_total >= used + 6) {
          af.pcr = Pcr{rng() % Pcr::kBaseModulus,
                       static_cast<uint32_t>(rng() % Pcr::kExtensionModulus)};
          af.pcr_reserved = static_cast<uint8_t>(pick(64));
          used += 6;
        } else {
          af.flags = 0;
        }
      }
      std::size_t extra = af_total - used;
      const std::size_t opaque_len = extra ? pick(extra + 1) : 0;
      for (std::size_t i = 0; i < opaque_len; ++i)
        af.opaque.push_back(static_cast<uint8_t>(rng()));
      if (!af.opaque.empty() && af.opaque.back() == 0xFF)
        af.opaque.back() = 0xFE; // trailing 0xFF is stuffing by definition
      af.stuffing = extra - opaque_len;
    } else {
      af.has_flags = false;
    }
    pkt.adaptation_field = af;
    if (pkt.has_payload()) {
      const std::size_t payload_len = kPacketBodySize - af_total;
      for (std::size_t i = 0; i < payload_len; ++i)
        pkt.payload.push_back(static_cast<uint8_t>(rng()));
    }
  } else {
    pkt.payload.resize(kPacketBodySize);
    for (auto& b : pkt.payload)
      b = static_cast<uint8_t>(rng());
  }
  return pkt;
}

/// Byte-level random valid packet (for parse-then-serialize identity).
inline std::vector<uint8_t> random_packet_bytes(std::mt19937_64& rng) {
  const auto raw = serialize_packet(random_packet(rng));
  return {raw.begin(), raw.end()};
}

/// Split a raw section across packets whose payloads are exactly
/// `chunk_size` bytes (an adaptation field pads the rest), covering every
/// legal split from 1 to 184.
inline std::vector<TsPacket> chunk_section(std::span<const uint8_t> section,
                                           uint16_t pid,
                                           std::size_t chunk_size,
                                           uint8_t& cc) {
  std::vector<uint8_t> stream;
  stream.push_back(0); // pointer_field
  stream.insert(stream.end(), section.begin(), section.end());

  std::vector<TsPacket> packets;
  for (std::size_t pos = 0; pos < stream.size(); pos += chunk_size) {
    TsPacket pkt;
    pkt.pid = pid;
    pkt.payload_unit_start = pos == 0;
    pkt.continuity_counter = cc;
    cc = (cc + 1) & 0x0F;
    const std::size_t take = std::min(chunk_size, stream.size() - pos);
    pkt.payload.assign(stream.begin() + pos, stream.begin() + pos + take);
    pkt.payload.resize(chunk_size, 0xFF); // section stuffing
    if (chunk_size == kPacketBodySize) {
      pkt.adaptation_field_control = 1;
    } else {
      pkt.adaptation_field_control = 3;
      AdaptationField af;
      const std::size_t af_total = kPacketBodySize - chunk_size;
      if (af_total == 1) {
        af.has_flags = false;
      } else {
        af.has_flags = true;
        af.stuffing = af_total - 2;
      }
      pkt.adaptation_field = af;
    }
    packets.push_back(std::move(pkt));
  }
  return packets;
}

} // namespace test_helpers
