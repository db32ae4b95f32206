#include "tscast/remux.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace tscast {

namespace {

struct ParsedStream {
  std::vector<TsPacket> packets;      // parseable packets, in order
  std::vector<std::size_t> offsets;   // byte offset of each
  uint64_t malformed = 0;
};

ParsedStream parse_stream(std::span<const uint8_t> ts) {
  ParsedStream out;
  for (std::size_t pos = 0; pos + kPacketSize <= ts.size();
       pos += kPacketSize) {
    try {
      out.packets.push_back(parse_packet(ts.subspan(pos, kPacketSize)));
      out.offsets.push_back(pos);
    } catch (const Error&) {
      ++out.malformed;
    }
  }
  return out;
}

} // namespace

PidSet PidSet::for_program(const ProgramInfo& info) {
  PidSet set;
  set.pids.insert(kPidPat);
  set.pids.insert(info.pmt_pid);
  if (info.pcr_pid != kPidNull)
    set.pids.insert(info.pcr_pid);
  for (const ProgramStream& s : info.streams)
    set.pids.insert(s.elementary_pid);
  return set;
}

ProgramScan list_programs(std::span<const uint8_t> ts) {
  const ParsedStream parsed = parse_stream(ts);

  ProgramScan scan;
  scan.packets_scanned = parsed.packets.size();
  scan.malformed_packets = parsed.malformed;

  // First complete, CRC-valid PAT wins; later versions are not tracked.
  std::optional<PatSection> pat;
  SectionAssembler pat_assembler;
  for (const TsPacket& pkt : parsed.packets) {
    if (pkt.pid != kPidPat)
      continue;
    for (auto& section : pat_assembler.push(pkt)) {
      try {
        pat = parse_pat(section);
        break;
      } catch (const Error&) {
        // not a PAT (or malformed); keep scanning
      }
    }
    if (pat)
      break;
  }
  if (!pat)
    raise(Errc::no_pat_found, "no CRC-valid PAT in " +
                                  std::to_string(parsed.packets.size()) +
                                  " packets");

  scan.network_pid = pat->network_pid;
  scan.pat_version = pat->version;
  scan.transport_stream_id = pat->transport_stream_id;

  std::map<uint16_t, SectionAssembler> pmt_assemblers;
  std::map<uint16_t, PmtSection> pmts; // keyed by program_number
  for (const PatEntry& e : pat->entries)
    pmt_assemblers.emplace(e.pmt_pid, SectionAssembler{});

  for (const TsPacket& pkt : parsed.packets) {
    auto it = pmt_assemblers.find(pkt.pid);
    if (it == pmt_assemblers.end())
      continue;
    for (auto& section : it->second.push(pkt)) {
      try {
        PmtSection pmt = parse_pmt(section);
        pmts.emplace(pmt.program_number, std::move(pmt));
      } catch (const Error&) {
      }
    }
  }

  for (const PatEntry& e : pat->entries) {
    auto it = pmts.find(e.program_number);
    if (it == pmts.end()) {
      scan.missing_pmts.push_back(e);
      continue;
    }
    ProgramInfo info;
    info.program_number = e.program_number;
    info.pmt_pid = e.pmt_pid;
    info.pcr_pid = it->second.pcr_pid;
    for (const PmtStream& s : it->second.streams)
      info.streams.push_back({s.stream_type, s.elementary_pid});
    scan.programs.push_back(std::move(info));
  }
  std::sort(scan.programs.begin(), scan.programs.end(),
            [](const ProgramInfo& a, const ProgramInfo& b) {
              return a.program_number < b.program_number;
            });
  return scan;
}

std::vector<uint8_t> extract_program(std::span<const uint8_t> ts,
                                     uint16_t program_number) {
  const ProgramScan scan = list_programs(ts); // throws no_pat_found

  const ProgramInfo* info = nullptr;
  for (const ProgramInfo& p : scan.programs)
    if (p.program_number == program_number)
      info = &p;
  if (!info) {
    for (const PatEntry& e : scan.missing_pmts)
      if (e.program_number == program_number)
        raise(Errc::unknown_program,
              "program " + std::to_string(program_number) +
                  " is in the PAT but its PMT never appeared");
    raise(Errc::unknown_program,
          "program " + std::to_string(program_number) + " not in the PAT");
  }

  const PidSet keep = PidSet::for_program(*info);

  // Single-entry replacement PAT, version bumped past the original.
  PatSection new_pat;
  new_pat.transport_stream_id = scan.transport_stream_id;
  new_pat.version = (scan.pat_version + 1) & 0x1F;
  new_pat.entries.push_back({info->program_number, info->pmt_pid});
  const std::vector<uint8_t> pat_section = build_pat(new_pat);

  std::vector<uint8_t> out;
  out.reserve(ts.size());
  uint8_t pat_cc = 0;
  for (std::size_t pos = 0; pos + kPacketSize <= ts.size();
       pos += kPacketSize) {
    const auto raw = ts.subspan(pos, kPacketSize);
    TsPacket pkt;
    try {
      pkt = parse_packet(raw);
    } catch (const Error&) {
      continue;
    }
    if (pkt.pid == kPidPat) {
      // Replacement table at each original PAT start, preserving cadence.
      if (!pkt.payload_unit_start)
        continue;
      for (const TsPacket& p : packetize_section(pat_section, kPidPat, pat_cc)) {
        const auto bytes = serialize_packet(p);
        out.insert(out.end(), bytes.begin(), bytes.end());
      }
      continue;
    }
    if (pkt.pid == kPidNull)
      continue; // rate is re-established by the pacing layer
    if (keep.contains(pkt.pid))
      out.insert(out.end(), raw.begin(), raw.end());
  }
  return out;
}

std::vector<uint8_t> passthrough(std::span<const uint8_t> ts) {
  return std::vector<uint8_t>(ts.begin(), ts.end());
}

} // namespace tscast
