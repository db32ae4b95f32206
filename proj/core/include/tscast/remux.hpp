#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "tscast/psi.hpp"
#include "tscast/ts_packet.hpp"

namespace tscast {

struct ProgramStream {
  uint8_t stream_type = 0;
  uint16_t elementary_pid = 0;

  auto operator<=>(const ProgramStream&) const = default;
};

/// One program of the multiplex, assembled from CRC-valid PAT + PMT.
struct ProgramInfo {
  uint16_t program_number = 0;
  uint16_t pmt_pid = 0;
  uint16_t pcr_pid = kPidNull;
  std::vector<ProgramStream> streams;

  auto operator<=>(const ProgramInfo&) const = default;
};

struct ProgramScan {
  std::vector<ProgramInfo> programs; // ascending program_number
  std::vector<PatEntry> missing_pmts; // PAT entries whose PMT never showed up
  std::optional<uint16_t> network_pid;
  uint16_t pat_version = 0;
  uint16_t transport_stream_id = 0;
  uint64_t packets_scanned = 0;
  uint64_t malformed_packets = 0;
};

/// The set of PIDs retained when extracting one program.
struct PidSet {
  std::set<uint16_t> pids;

  static PidSet for_program(const ProgramInfo& info);
  bool contains(uint16_t pid) const { return pids.count(pid) != 0; }
};

/// Scan a packet-aligned stream for its program lineup. Programs whose PMT
/// is missing are reported, not failed. Throws no_pat_found when the whole
/// source holds no CRC-valid PAT.
ProgramScan list_programs(std::span<const uint8_t> ts);

/// Filter a multiplex down to one program: regenerated single-entry PAT
/// (version bumped, fresh continuity counters, emitted at each original PAT
/// position), the program's PMT/elementary/PCR PIDs byte-identical, null
/// packets and everything else dropped. Throws unknown_program, no_pat_found.
std::vector<uint8_t> extract_program(std::span<const uint8_t> ts,
                                     uint16_t program_number);

/// Full-multiplex mode: the identity on packet-aligned input.
std::vector<uint8_t> passthrough(std::span<const uint8_t> ts);

} // namespace tscast
