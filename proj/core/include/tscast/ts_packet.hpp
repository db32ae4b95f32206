#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tscast/errors.hpp"

namespace tscast {

inline constexpr std::size_t kPacketSize = 188;
inline constexpr std::size_t kPacketBodySize = 184; // after the 4-byte header
inline constexpr uint8_t kSyncByte = 0x47;
inline constexpr uint16_t kPidPat = 0x0000;
inline constexpr uint16_t kPidNull = 0x1FFF;
inline constexpr uint16_t kMaxPid = 0x1FFF;

/// Program clock reference: 33-bit base counting 90 kHz ticks plus a 9-bit
/// extension counting the 27 MHz remainder.
struct Pcr {
  uint64_t base = 0;      // < 2^33
  uint32_t extension = 0; // < 300

  static constexpr uint64_t kBaseModulus = 1ull << 33;
  static constexpr uint32_t kExtensionModulus = 300;

  auto operator<=>(const Pcr&) const = default;
};

/// Full PCR counter range in 27 MHz ticks (wrap modulus).
inline constexpr uint64_t kPcrTicksModulus =
    Pcr::kBaseModulus * Pcr::kExtensionModulus;

/// base * 300 + extension. Throws invalid_argument if either field is out of
/// range.
uint64_t pcr_ticks(const Pcr& pcr);

struct AdaptationField {
  // Raw flags byte: 0x80 discontinuity, 0x40 random access, 0x20 ES priority,
  // 0x10 PCR, 0x08 OPCR, 0x04 splicing point, 0x02 private data, 0x01 extension.
  uint8_t flags = 0;
  // False only for the degenerate zero-length field (a lone length byte).
  bool has_flags = false;
  std::optional<Pcr> pcr;
  // The 6 reserved bits between PCR base and extension, kept verbatim so that
  // serialization is byte-exact for any input.
  uint8_t pcr_reserved = 0x3F;
  // Bytes after the (optional) PCR that we do not interpret: OPCR, splice
  // countdown, private data, extensions. Carried opaquely.
  std::vector<uint8_t> opaque;
  // Count of trailing 0xFF stuffing bytes.
  std::size_t stuffing = 0;

  bool discontinuity() const { return has_flags && (flags & 0x80); }
  bool random_access() const { return has_flags && (flags & 0x40); }
  bool pcr_flag() const { return has_flags && (flags & 0x10); }

  /// Size on the wire including the length byte.
  std::size_t serialized_size() const;

  bool operator==(const AdaptationField&) const = default;
};

/// One 188-byte transport packet, decomposed. Immutable value in practice:
/// parse once, read anywhere.
struct TsPacket {
  bool transport_error = false;
  bool payload_unit_start = false;
  bool transport_priority = false;
  uint16_t pid = kPidNull;              // 13 bits
  uint8_t scrambling_control = 0;       // 2 bits
  uint8_t adaptation_field_control = 1; // 2 bits; 0 is reserved and rejected
  uint8_t continuity_counter = 0;       // 4 bits
  std::optional<AdaptationField> adaptation_field;
  std::vector<uint8_t> payload;

  bool has_payload() const { return adaptation_field_control & 0x1; }
  bool has_adaptation() const { return adaptation_field_control & 0x2; }

  std::optional<Pcr> pcr() const {
    return adaptation_field ? adaptation_field->pcr : std::nullopt;
  }

  bool operator==(const TsPacket&) const = default;
};

/// Decompose one 188-byte block. serialize_packet(parse_packet(raw)) == raw
/// for every accepted input.
/// Throws: wrong_length, sync_byte_mismatch, reserved_adaptation_control,
/// malformed_adaptation.
TsPacket parse_packet(std::span<const uint8_t> raw);

/// Inverse of parse_packet. Throws payload_overflow when adaptation field and
/// payload do not fill exactly 184 bytes, invalid_argument for out-of-range
/// field values.
std::array<uint8_t, kPacketSize> serialize_packet(const TsPacket& pkt);

struct ResyncResult {
  // Concatenated 188-byte packets, each starting with 0x47.
  std::vector<uint8_t> bytes;
  // Bytes discarded while hunting for packet alignment (leading garbage plus
  // any mid-stream garbage skipped on re-lock).
  std::size_t skipped = 0;
  // Leftover tail shorter than one packet.
  std::size_t trailing = 0;

  std::size_t packet_count() const { return bytes.size() / kPacketSize; }
};

/// Align a raw byte stream on the 188-byte packet lattice. Lock requires 5
/// sync bytes at 188-byte strides, one miss tolerated (fewer when the
/// stream is too short to contain 5 packets). Re-locks after mid-stream
/// corruption.
/// Throws no_sync_found when the input holds at least one packet worth of
/// bytes but no alignment exists.
ResyncResult resync(std::span<const uint8_t> stream);

} // namespace tscast
