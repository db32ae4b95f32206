#include "tscast/energy_dispersal.hpp"

#include <array>

namespace tscast {

namespace {

/// One PRBS period, generated bit by bit: out = b14 ^ b15, feedback into b1,
/// bits packed most significant first.
std::array<uint8_t, kScramblerKeystreamBytes> make_keystream() {
  std::array<uint8_t, kScramblerKeystreamBytes> table{};
  uint16_t reg = kScramblerInit; // bit 14 = b1 ... bit 0 = b15
  for (auto& byte : table) {
    uint8_t value = 0;
    for (int bit = 0; bit < 8; ++bit) {
      const unsigned out = ((reg >> 1) ^ reg) & 1; // b14 ^ b15
      value = static_cast<uint8_t>((value << 1) | out);
      reg = static_cast<uint16_t>((reg >> 1) | (out << 14));
    }
    byte = value;
  }
  return table;
}

const std::array<uint8_t, kScramblerKeystreamBytes>& keystream() {
  static const auto table = make_keystream();
  return table;
}

} // namespace

std::span<const uint8_t, kScramblerKeystreamBytes> scrambler_keystream() {
  return keystream();
}

void EnergyDispersal::process_packet(std::span<uint8_t> packet) {
  if (packet.size() != kPacketSize)
    raise(Errc::wrong_length, "packet must be 188 bytes");
  const auto& ks = keystream();

  if (mode_ == Mode::randomize) {
    if (packet[0] != kSyncByte)
      raise(Errc::bad_sync, "randomizer input lacks 0x47 sync");
    locked_ = true;
  } else {
    if (packet[0] == kInvertedSync) {
      locked_ = true;
      phase_ = 0;
    } else if (packet[0] != kSyncByte) {
      raise(Errc::bad_sync, "expected 0x47 or 0xB8 at packet boundary");
    } else if (phase_ == 0) {
      // Group head should carry 0xB8; a plain sync here means lock is lost.
      locked_ = false;
    }
    if (!locked_) {
      phase_ = 0;
      return;
    }
  }

  const std::size_t slot_base = phase_ * kPacketSize;
  if (phase_ == 0)
    packet[0] ^= 0xFF;
  // Byte slot k of the group maps to keystream byte k-1; sync slots of
  // packets 1..7 burn their keystream byte without applying it.
  for (std::size_t b = 1; b < kPacketSize; ++b)
    packet[b] ^= ks[slot_base + b - 1];
  phase_ = (phase_ + 1) % kScramblerGroupPackets;
}

std::vector<uint8_t> EnergyDispersal::process(
    std::span<const uint8_t> packets) {
  if (packets.size() % kPacketSize != 0)
    raise(Errc::wrong_length, "stream is not a whole number of packets");
  std::vector<uint8_t> out(packets.begin(), packets.end());
  for (std::size_t pos = 0; pos < out.size(); pos += kPacketSize)
    process_packet(std::span<uint8_t>(out.data() + pos, kPacketSize));
  return out;
}

void EnergyDispersal::reset() {
  phase_ = 0;
  locked_ = false;
}

std::vector<uint8_t> randomize(std::span<const uint8_t> packets) {
  EnergyDispersal d(EnergyDispersal::Mode::randomize);
  return d.process(packets);
}

std::vector<uint8_t> derandomize(std::span<const uint8_t> packets) {
  EnergyDispersal d(EnergyDispersal::Mode::derandomize);
  return d.process(packets);
}

} // namespace tscast
