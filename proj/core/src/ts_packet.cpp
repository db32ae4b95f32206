#include "tscast/ts_packet.hpp"

#include <algorithm>
#include <string>

namespace tscast {

uint64_t pcr_ticks(const Pcr& pcr) {
  if (pcr.base >= Pcr::kBaseModulus)
    raise(Errc::invalid_argument, "PCR base exceeds 33 bits");
  if (pcr.extension >= Pcr::kExtensionModulus)
    raise(Errc::invalid_argument, "PCR extension must be < 300");
  return pcr.base * 300 + pcr.extension;
}

std::size_t AdaptationField::serialized_size() const {
  if (!has_flags)
    return 1;
  return 1 + 1 + (pcr ? 6u : 0u) + opaque.size() + stuffing;
}

namespace {

AdaptationField parse_adaptation(std::span<const uint8_t> body) {
  AdaptationField af;
  if (body.empty())
    return af; // zero-length field: a lone length byte
  af.has_flags = true;
  af.flags = body[0];
  std::size_t pos = 1;
  if ((af.flags & 0x10) && body.size() - pos >= 6) {
    const uint8_t* p = body.data() + pos;
    Pcr pcr;
    pcr.base = (uint64_t(p[0]) << 25) | (uint64_t(p[1]) << 17) |
               (uint64_t(p[2]) << 9) | (uint64_t(p[3]) << 1) | (p[4] >> 7);
    af.pcr_reserved = (p[4] >> 1) & 0x3F;
    pcr.extension = (uint32_t(p[4] & 0x01) << 8) | p[5];
    af.pcr = pcr;
    pos += 6;
  }
  // Everything after the PCR is carried opaquely; trailing 0xFF bytes are
  // stuffing by definition, so opaque never ends in 0xFF.
  std::size_t end = body.size();
  while (end > pos && body[end - 1] == 0xFF)
    --end;
  af.opaque.assign(body.begin() + pos, body.begin() + end);
  af.stuffing = body.size() - end;
  return af;
}

void write_adaptation(const AdaptationField& af, uint8_t* out) {
  std::size_t size = af.serialized_size();
  out[0] = static_cast<uint8_t>(size - 1);
  if (!af.has_flags)
    return;
  out[1] = af.flags;
  std::size_t pos = 2;
  if (af.pcr) {
    const Pcr& pcr = *af.pcr;
    out[pos + 0] = static_cast<uint8_t>(pcr.base >> 25);
    out[pos + 1] = static_cast<uint8_t>(pcr.base >> 17);
    out[pos + 2] = static_cast<uint8_t>(pcr.base >> 9);
    out[pos + 3] = static_cast<uint8_t>(pcr.base >> 1);
    out[pos + 4] = static_cast<uint8_t>(((pcr.base & 0x1) << 7) |
                                        (uint32_t(af.pcr_reserved) << 1) |
                                        (pcr.extension >> 8));
    out[pos + 5] = static_cast<uint8_t>(pcr.extension & 0xFF);
    pos += 6;
  }
  std::copy(af.opaque.begin(), af.opaque.end(), out + pos);
  pos += af.opaque.size();
  std::fill_n(out + pos, af.stuffing, 0xFF);
}

void check_adaptation(const AdaptationField& af) {
  if (!af.has_flags &&
      (af.pcr || !af.opaque.empty() || af.stuffing != 0))
    raise(Errc::invalid_argument,
          "zero-length adaptation field cannot carry content");
  if (af.pcr) {
    if (!(af.flags & 0x10))
      raise(Errc::invalid_argument, "PCR present but PCR flag clear");
    if (af.pcr->base >= Pcr::kBaseModulus ||
        af.pcr->extension >= Pcr::kExtensionModulus || af.pcr_reserved >= 64)
      raise(Errc::invalid_argument, "PCR field out of range");
  }
}

} // namespace

TsPacket parse_packet(std::span<const uint8_t> raw) {
  if (raw.size() != kPacketSize)
    raise(Errc::wrong_length, "expected 188 bytes, got " +
                                  std::to_string(raw.size()));
  if (raw[0] != kSyncByte)
    raise(Errc::sync_byte_mismatch, "first byte is not 0x47");

  TsPacket pkt;
  pkt.transport_error = raw[1] & 0x80;
  pkt.payload_unit_start = raw[1] & 0x40;
  pkt.transport_priority = raw[1] & 0x20;
  pkt.pid = (uint16_t(raw[1] & 0x1F) << 8) | raw[2];
  pkt.scrambling_control = raw[3] >> 6;
  pkt.adaptation_field_control = (raw[3] >> 4) & 0x3;
  pkt.continuity_counter = raw[3] & 0x0F;

  if (pkt.adaptation_field_control == 0)
    raise(Errc::reserved_adaptation_control,
          "adaptation_field_control 0 is reserved");

  std::size_t pos = 4;
  if (pkt.has_adaptation()) {
    const uint8_t length = raw[4];
    // afc 2: the field fills the whole body; afc 3: at least 1 payload byte.
    if (pkt.adaptation_field_control == 2 && length != kPacketBodySize - 1)
      raise(Errc::malformed_adaptation,
            "adaptation-only packet must have field length 183");
    if (pkt.adaptation_field_control == 3 && length > kPacketBodySize - 2)
      raise(Errc::malformed_adaptation,
            "adaptation field leaves no room for payload");
    pkt.adaptation_field = parse_adaptation(raw.subspan(5, length));
    pos = 5 + length;
  }
  if (pkt.has_payload())
    pkt.payload.assign(raw.begin() + pos, raw.end());
  return pkt;
}

std::array<uint8_t, kPacketSize> serialize_packet(const TsPacket& pkt) {
  if (pkt.pid > kMaxPid)
    raise(Errc::invalid_argument, "pid exceeds 13 bits");
  if (pkt.scrambling_control > 3 || pkt.continuity_counter > 15)
    raise(Errc::invalid_argument, "header field out of range");
  if (pkt.adaptation_field_control == 0)
    raise(Errc::reserved_adaptation_control,
          "adaptation_field_control 0 is reserved");
  if (pkt.adaptation_field_control > 3)
    raise(Errc::invalid_argument, "adaptation_field_control exceeds 2 bits");
  if (pkt.has_adaptation() != pkt.adaptation_field.has_value())
    raise(Errc::invalid_argument,
          "adaptation_field_control disagrees with adaptation_field presence");
  if (!pkt.has_payload() && !pkt.payload.empty())
    raise(Errc::payload_overflow,
          "payload present but adaptation_field_control forbids it");
  if (pkt.has_payload() && pkt.payload.empty())
    raise(Errc::payload_overflow,
          "adaptation_field_control promises payload but none given");

  std::size_t af_size = 0;
  if (pkt.adaptation_field) {
    check_adaptation(*pkt.adaptation_field);
    af_size = pkt.adaptation_field->serialized_size();
  }
  if (af_size + pkt.payload.size() != kPacketBodySize)
    raise(Errc::payload_overflow,
          "adaptation field (" + std::to_string(af_size) + ") + payload (" +
              std::to_string(pkt.payload.size()) + ") != 184 bytes");

  std::array<uint8_t, kPacketSize> out{};
  out[0] = kSyncByte;
  out[1] = static_cast<uint8_t>((pkt.transport_error ? 0x80 : 0) |
                                (pkt.payload_unit_start ? 0x40 : 0) |
                                (pkt.transport_priority ? 0x20 : 0) |
                                (pkt.pid >> 8));
  out[2] = static_cast<uint8_t>(pkt.pid & 0xFF);
  out[3] = static_cast<uint8_t>((pkt.scrambling_control << 6) |
                                (pkt.adaptation_field_control << 4) |
                                pkt.continuity_counter);
  std::size_t pos = 4;
  if (pkt.adaptation_field) {
    write_adaptation(*pkt.adaptation_field, out.data() + 4);
    pos += af_size;
  }
  std::copy(pkt.payload.begin(), pkt.payload.end(), out.begin() + pos);
  return out;
}

ResyncResult resync(std::span<const uint8_t> stream) {
  ResyncResult out;
  const std::size_t n = stream.size();
  std::size_t pos = 0;
  bool locked = false;
  bool ever_locked = false;

  // A candidate offset locks when 5 lattice positions carry the sync byte
  // (fewer when the stream is shorter than 5 packets). 0x47 occurs in
  // payloads by chance; 5 hits make a false lock vanishingly unlikely. A
  // full window tolerates one miss so a single damaged packet does not take
  // its intact neighbors down with it.
  auto lattice_ok = [&](std::size_t k) {
    const std::size_t avail = (n - k) / kPacketSize;
    if (avail == 0 || stream[k] != kSyncByte)
      return false;
    const std::size_t need = std::min<std::size_t>(5, avail);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < need; ++i)
      hits += stream[k + i * kPacketSize] == kSyncByte ? 1 : 0;
    return hits + (need == 5 ? 1 : 0) >= need;
  };

  while (true) {
    if (pos + kPacketSize > n) {
      out.trailing = n - pos;
      break;
    }
    if (locked && stream[pos] == kSyncByte) {
      out.bytes.insert(out.bytes.end(), stream.begin() + pos,
                       stream.begin() + pos + kPacketSize);
      pos += kPacketSize;
      continue;
    }
    locked = false;
    std::size_t k = pos;
    while (k + kPacketSize <= n && !lattice_ok(k))
      ++k;
    if (k + kPacketSize > n) {
      out.skipped += n - pos;
      break;
    }
    out.skipped += k - pos;
    pos = k;
    locked = ever_locked = true;
  }

  if (!ever_locked && n >= kPacketSize)
    raise(Errc::no_sync_found,
          "no 188-byte sync lattice in " + std::to_string(n) + " bytes");
  return out;
}

} // namespace tscast
