#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tscast/ts_packet.hpp"

namespace tscast {

/// CRC-32 with generator 0x04C11DB7, initial register all-ones, no
/// reflection, no final xor (the PSI section checksum).
uint32_t crc32_mpeg(std::span<const uint8_t> data);

/// Validator form: true when the last 4 bytes are the CRC of the preceding
/// bytes (equivalently, the CRC over the whole buffer comes out zero).
bool crc32_mpeg_check(std::span<const uint8_t> section_with_crc);

inline constexpr std::size_t kMaxSectionLength = 1021; // section_length cap
inline constexpr std::size_t kMaxSectionBytes = kMaxSectionLength + 3;

struct PatEntry {
  uint16_t program_number = 0;
  uint16_t pmt_pid = 0;

  auto operator<=>(const PatEntry&) const = default;
};

/// One program-association section. Program 0 entries point at the network
/// PID and are kept out of the program list.
struct PatSection {
  uint16_t transport_stream_id = 1;
  uint8_t version = 0; // 5 bits
  bool current_next = true;
  uint8_t section_number = 0;
  uint8_t last_section_number = 0;
  std::vector<PatEntry> entries;
  std::optional<uint16_t> network_pid;
  uint32_t crc = 0; // derived from the body; ignored by equality

  bool operator==(const PatSection& o) const {
    return transport_stream_id == o.transport_stream_id &&
           version == o.version && current_next == o.current_next &&
           section_number == o.section_number &&
           last_section_number == o.last_section_number &&
           entries == o.entries && network_pid == o.network_pid;
  }
};

struct PmtStream {
  uint8_t stream_type = 0;
  uint16_t elementary_pid = 0;
  std::vector<uint8_t> descriptors; // opaque, never interpreted

  auto operator<=>(const PmtStream&) const = default;
};

struct PmtSection {
  uint16_t program_number = 1;
  uint8_t version = 0; // 5 bits
  bool current_next = true;
  uint16_t pcr_pid = kPidNull; // 0x1FFF means no PCR
  std::vector<uint8_t> program_descriptors;
  std::vector<PmtStream> streams;
  uint32_t crc = 0; // derived from the body; ignored by equality

  bool operator==(const PmtSection& o) const {
    return program_number == o.program_number && version == o.version &&
           current_next == o.current_next && pcr_pid == o.pcr_pid &&
           program_descriptors == o.program_descriptors &&
           streams == o.streams;
  }
};

/// Parse a raw PAT section (table_id 0). Throws malformed_section on bad
/// table_id or length inconsistencies, crc_mismatch on a bad checksum.
PatSection parse_pat(std::span<const uint8_t> section);

/// Parse a raw PMT section (table_id 2). Errors as parse_pat.
PmtSection parse_pmt(std::span<const uint8_t> section);

/// Build a raw PAT section; parse_pat(build_pat(v)) == v. Throws
/// section_overflow past the 1021-byte section-length limit.
std::vector<uint8_t> build_pat(const PatSection& pat);
std::vector<uint8_t> build_pat(const std::vector<PatEntry>& entries,
                               uint16_t transport_stream_id, uint8_t version);

/// Build a raw PMT section; parse_pmt(build_pmt(v)) == v.
std::vector<uint8_t> build_pmt(const PmtSection& pmt);

/// Reassembles PSI sections from the payloads of one PID. Single-owner
/// stateful object. Sections are emitted only when complete and CRC-valid;
/// bad sections are dropped and counted.
class SectionAssembler {
public:
  /// Feed the next packet of this PID; returns any sections completed by it.
  std::vector<std::vector<uint8_t>> push(const TsPacket& pkt);

  void reset();

  uint64_t crc_errors() const { return crc_errors_; }
  uint64_t continuity_gaps() const { return continuity_gaps_; }
  uint64_t discarded() const { return discarded_; }

private:
  void scan_buffer(std::vector<std::vector<uint8_t>>& out);

  std::vector<uint8_t> buffer_;
  bool assembling_ = false;
  int last_cc_ = -1;
  uint64_t crc_errors_ = 0;
  uint64_t continuity_gaps_ = 0;
  uint64_t discarded_ = 0;
};

/// One-shot convenience: run a SectionAssembler over packets already
/// filtered to one PID.
std::vector<std::vector<uint8_t>>
assemble_sections(std::span<const TsPacket> packets, uint16_t pid,
                  SectionAssembler* assembler = nullptr);

/// Split a raw section into transport packets on the given PID: unit-start
/// with pointer_field 0, then continuation packets, last one padded with
/// 0xFF. continuity_counter is advanced per emitted packet.
std::vector<TsPacket> packetize_section(std::span<const uint8_t> section,
                                        uint16_t pid,
                                        uint8_t& continuity_counter);

} // namespace tscast
