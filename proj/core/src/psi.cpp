#include "tscast/psi.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace tscast {

namespace {

std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t crc = i << 24;
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x80000000u) ? (crc << 1) ^ 0x04C11DB7u : crc << 1;
    table[i] = crc;
  }
  return table;
}

const std::array<uint32_t, 256> kCrcTable = make_crc_table();

void put16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v & 0xFF));
}

uint16_t get16(const uint8_t* p) { return uint16_t(p[0]) << 8 | p[1]; }

struct SectionHeader {
  uint8_t table_id;
  bool syntax;
  std::size_t length; // section_length
};

SectionHeader read_section_header(std::span<const uint8_t> section) {
  if (section.size() < 3)
    raise(Errc::malformed_section, "section shorter than its header");
  SectionHeader h;
  h.table_id = section[0];
  h.syntax = section[1] & 0x80;
  h.length = (std::size_t(section[1] & 0x0F) << 8) | section[2];
  if (h.length + 3 != section.size())
    raise(Errc::malformed_section,
          "section_length " + std::to_string(h.length) + " disagrees with " +
              std::to_string(section.size()) + " bytes given");
  return h;
}

// Appends body CRC and returns the finished section.
std::vector<uint8_t> finish_section(std::vector<uint8_t> body) {
  const uint32_t crc = crc32_mpeg(body);
  body.push_back(static_cast<uint8_t>(crc >> 24));
  body.push_back(static_cast<uint8_t>(crc >> 16));
  body.push_back(static_cast<uint8_t>(crc >> 8));
  body.push_back(static_cast<uint8_t>(crc));
  return body;
}

void check_pid_range(uint16_t pid, const char* what) {
  if (pid > kMaxPid)
    raise(Errc::invalid_argument, std::string(what) + " exceeds 13 bits");
}

} // namespace

uint32_t crc32_mpeg(std::span<const uint8_t> data) {
  uint32_t crc = 0xFFFFFFFFu;
  for (uint8_t b : data)
    crc = (crc << 8) ^ kCrcTable[((crc >> 24) ^ b) & 0xFF];
  return crc;
}

bool crc32_mpeg_check(std::span<const uint8_t> section_with_crc) {
  if (section_with_crc.size() < 4)
    return false;
  return crc32_mpeg(section_with_crc) == 0;
}

PatSection parse_pat(std::span<const uint8_t> section) {
  const SectionHeader h = read_section_header(section);
  if (h.table_id != 0x00)
    raise(Errc::malformed_section,
          "table_id " + std::to_string(h.table_id) + " is not a PAT");
  if (section.size() < 12)
    raise(Errc::malformed_section, "PAT too short");
  if (!crc32_mpeg_check(section))
    raise(Errc::crc_mismatch, "PAT checksum failed");
  if ((section.size() - 12) % 4 != 0)
    raise(Errc::malformed_section, "PAT entry loop not a multiple of 4");

  PatSection pat;
  pat.transport_stream_id = get16(&section[3]);
  pat.version = (section[5] >> 1) & 0x1F;
  pat.current_next = section[5] & 0x01;
  pat.section_number = section[6];
  pat.last_section_number = section[7];
  for (std::size_t pos = 8; pos + 4 <= section.size() - 4; pos += 4) {
    const uint16_t program = get16(&section[pos]);
    const uint16_t pid = get16(&section[pos + 2]) & 0x1FFF;
    if (program == 0)
      pat.network_pid = pid;
    else
      pat.entries.push_back({program, pid});
  }
  pat.crc = (uint32_t(section[section.size() - 4]) << 24) |
            (uint32_t(section[section.size() - 3]) << 16) |
            (uint32_t(section[section.size() - 2]) << 8) |
            section[section.size() - 1];
  return pat;
}

PmtSection parse_pmt(std::span<const uint8_t> section) {
  const SectionHeader h = read_section_header(section);
  if (h.table_id != 0x02)
    raise(Errc::malformed_section,
          "table_id " + std::to_string(h.table_id) + " is not a PMT");
  if (section.size() < 16)
    raise(Errc::malformed_section, "PMT too short");
  if (!crc32_mpeg_check(section))
    raise(Errc::crc_mismatch, "PMT checksum failed");

  PmtSection pmt;
  pmt.program_number = get16(&section[3]);
  pmt.version = (section[5] >> 1) & 0x1F;
  pmt.current_next = section[5] & 0x01;
  pmt.pcr_pid = get16(&section[8]) & 0x1FFF;
  const std::size_t info_len =
      (std::size_t(section[10] & 0x0F) << 8) | section[11];
  std::size_t pos = 12;
  const std::size_t end = section.size() - 4; // CRC excluded
  if (pos + info_len > end)
    raise(Errc::malformed_section, "PMT program descriptors overrun");
  pmt.program_descriptors.assign(section.begin() + pos,
                                 section.begin() + pos + info_len);
  pos += info_len;
  while (pos < end) {
    if (pos + 5 > end)
      raise(Errc::malformed_section, "truncated PMT stream entry");
    PmtStream s;
    s.stream_type = section[pos];
    s.elementary_pid = get16(&section[pos + 1]) & 0x1FFF;
    const std::size_t es_len =
        (std::size_t(section[pos + 3] & 0x0F) << 8) | section[pos + 4];
    pos += 5;
    if (pos + es_len > end)
      raise(Errc::malformed_section, "PMT stream descriptors overrun");
    s.descriptors.assign(section.begin() + pos, section.begin() + pos + es_len);
    pos += es_len;
    pmt.streams.push_back(std::move(s));
  }
  pmt.crc = (uint32_t(section[end]) << 24) | (uint32_t(section[end + 1]) << 16) |
            (uint32_t(section[end + 2]) << 8) | section[end + 3];
  return pmt;
}

std::vector<uint8_t> build_pat(const PatSection& pat) {
  if (pat.version > 31)
    raise(Errc::invalid_argument, "PAT version exceeds 5 bits");
  for (const PatEntry& e : pat.entries) {
    check_pid_range(e.pmt_pid, "pmt_pid");
    if (e.program_number == 0)
      raise(Errc::invalid_argument,
            "program 0 is the network entry; use network_pid");
  }
  if (pat.network_pid)
    check_pid_range(*pat.network_pid, "network_pid");

  const std::size_t n = pat.entries.size() + (pat.network_pid ? 1 : 0);
  const std::size_t section_length = 5 + 4 * n + 4;
  if (section_length > kMaxSectionLength)
    raise(Errc::section_overflow,
          "PAT with " + std::to_string(n) + " entries exceeds 1021 bytes");

  std::vector<uint8_t> out;
  out.reserve(section_length + 3);
  out.push_back(0x00); // table_id
  out.push_back(static_cast<uint8_t>(0xB0 | (section_length >> 8)));
  out.push_back(static_cast<uint8_t>(section_length & 0xFF));
  put16(out, pat.transport_stream_id);
  out.push_back(static_cast<uint8_t>(0xC0 | (pat.version << 1) |
                                     (pat.current_next ? 1 : 0)));
  out.push_back(pat.section_number);
  out.push_back(pat.last_section_number);
  for (const PatEntry& e : pat.entries) {
    put16(out, e.program_number);
    put16(out, 0xE000 | e.pmt_pid);
  }
  if (pat.network_pid) {
    put16(out, 0x0000);
    put16(out, 0xE000 | *pat.network_pid);
  }
  return finish_section(std::move(out));
}

std::vector<uint8_t> build_pat(const std::vector<PatEntry>& entries,
                               uint16_t transport_stream_id, uint8_t version) {
  PatSection pat;
  pat.transport_stream_id = transport_stream_id;
  pat.version = version;
  pat.entries = entries;
  return build_pat(pat);
}

std::vector<uint8_t> build_pmt(const PmtSection& pmt) {
  if (pmt.version > 31)
    raise(Errc::invalid_argument, "PMT version exceeds 5 bits");
  check_pid_range(pmt.pcr_pid, "pcr_pid");
  for (const PmtStream& s : pmt.streams)
    check_pid_range(s.elementary_pid, "elementary_pid");

  std::size_t body = 9 + pmt.program_descriptors.size();
  for (const PmtStream& s : pmt.streams)
    body += 5 + s.descriptors.size();
  const std::size_t section_length = body + 4;
  if (section_length > kMaxSectionLength)
    raise(Errc::section_overflow,
          "PMT of " + std::to_string(section_length) + " bytes exceeds 1021");

  std::vector<uint8_t> out;
  out.reserve(section_length + 3);
  out.push_back(0x02); // table_id
  out.push_back(static_cast<uint8_t>(0xB0 | (section_length >> 8)));
  out.push_back(static_cast<uint8_t>(section_length & 0xFF));
  put16(out, pmt.program_number);
  out.push_back(static_cast<uint8_t>(0xC0 | (pmt.version << 1) |
                                     (pmt.current_next ? 1 : 0)));
  out.push_back(0x00); // section_number
  out.push_back(0x00); // last_section_number
  put16(out, 0xE000 | pmt.pcr_pid);
  put16(out, static_cast<uint16_t>(0xF000 | pmt.program_descriptors.size()));
  out.insert(out.end(), pmt.program_descriptors.begin(),
             pmt.program_descriptors.end());
  for (const PmtStream& s : pmt.streams) {
    out.push_back(s.stream_type);
    put16(out, 0xE000 | s.elementary_pid);
    put16(out, static_cast<uint16_t>(0xF000 | s.descriptors.size()));
    out.insert(out.end(), s.descriptors.begin(), s.descriptors.end());
  }
  return finish_section(std::move(out));
}

std::vector<std::vector<uint8_t>> SectionAssembler::push(const TsPacket& pkt) {
  std::vector<std::vector<uint8_t>> out;
  if (!pkt.has_payload())
    return out;

  if (last_cc_ >= 0) {
    if (pkt.continuity_counter == last_cc_)
      return out; // duplicate packet, skip
    if (pkt.continuity_counter != ((last_cc_ + 1) & 0x0F)) {
      ++continuity_gaps_;
      if (assembling_) {
        ++discarded_;
        buffer_.clear();
        assembling_ = false;
      }
    }
  }
  last_cc_ = pkt.continuity_counter;

  std::span<const uint8_t> payload(pkt.payload);
  if (pkt.payload_unit_start) {
    if (payload.empty())
      return out;
    const std::size_t pointer = payload[0];
    if (1 + pointer > payload.size()) {
      ++discarded_;
      buffer_.clear();
      assembling_ = false;
      return out;
    }
    if (assembling_) {
      // The bytes before the pointer target finish the pending section.
      buffer_.insert(buffer_.end(), payload.begin() + 1,
                     payload.begin() + 1 + pointer);
      scan_buffer(out);
      if (assembling_) {
        ++discarded_; // cut short by the new section start
      }
    }
    buffer_.assign(payload.begin() + 1 + pointer, payload.end());
    // A start packet may carry nothing past the pointer; the section then
    // begins with the next continuation payload.
    assembling_ = true;
    if (!buffer_.empty())
      scan_buffer(out);
  } else if (assembling_) {
    buffer_.insert(buffer_.end(), payload.begin(), payload.end());
    scan_buffer(out);
  }
  return out;
}

void SectionAssembler::scan_buffer(std::vector<std::vector<uint8_t>>& out) {
  for (;;) {
    if (buffer_.empty()) {
      assembling_ = false;
      return;
    }
    if (buffer_[0] == 0xFF) { // stuffing fills the rest of the payload
      buffer_.clear();
      assembling_ = false;
      return;
    }
    if (buffer_.size() < 3) {
      assembling_ = true;
      return;
    }
    const std::size_t length =
        (std::size_t(buffer_[1] & 0x0F) << 8) | buffer_[2];
    const std::size_t total = length + 3;
    if (total > kMaxSectionBytes) {
      // Larger than any PSI table we handle; drop and resync on next start.
      ++discarded_;
      buffer_.clear();
      assembling_ = false;
      return;
    }
    if (buffer_.size() < total) {
      assembling_ = true;
      return;
    }
    std::vector<uint8_t> section(buffer_.begin(), buffer_.begin() + total);
    if (crc32_mpeg_check(section))
      out.push_back(std::move(section));
    else
      ++crc_errors_;
    buffer_.erase(buffer_.begin(), buffer_.begin() + total);
  }
}

void SectionAssembler::reset() {
  buffer_.clear();
  assembling_ = false;
  last_cc_ = -1;
}

std::vector<std::vector<uint8_t>>
assemble_sections(std::span<const TsPacket> packets, uint16_t pid,
                  SectionAssembler* assembler) {
  SectionAssembler local;
  SectionAssembler& a = assembler ? *assembler : local;
  std::vector<std::vector<uint8_t>> out;
  for (const TsPacket& pkt : packets) {
    if (pkt.pid != pid)
      continue;
    auto done = a.push(pkt);
    out.insert(out.end(), std::make_move_iterator(done.begin()),
               std::make_move_iterator(done.end()));
  }
  return out;
}

std::vector<TsPacket> packetize_section(std::span<const uint8_t> section,
                                        uint16_t pid,
                                        uint8_t& continuity_counter) {
  if (section.empty())
    raise(Errc::invalid_argument, "cannot packetize an empty section");
  check_pid_range(pid, "pid");

  std::vector<TsPacket> out;
  std::size_t pos = 0;
  bool first = true;
  while (first || pos < section.size()) {
    TsPacket pkt;
    pkt.pid = pid;
    pkt.adaptation_field_control = 1;
    pkt.continuity_counter = continuity_counter;
    continuity_counter = (continuity_counter + 1) & 0x0F;
    pkt.payload_unit_start = first;
    if (first)
      pkt.payload.push_back(0x00); // pointer_field
    const std::size_t room = kPacketBodySize - pkt.payload.size();
    const std::size_t take = std::min(room, section.size() - pos);
    pkt.payload.insert(pkt.payload.end(), section.begin() + pos,
                       section.begin() + pos + take);
    pos += take;
    pkt.payload.resize(kPacketBodySize, 0xFF);
    out.push_back(std::move(pkt));
    first = false;
  }
  return out;
}

} // namespace tscast
