#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tscast/errors.hpp"
#include "tscast/ts_packet.hpp"

namespace tscast {

inline constexpr std::size_t kScramblerGroupPackets = 8;
/// 15-bit PRBS register loaded as 100101010000000 (b1..b15), feedback
/// 1 + x^14 + x^15.
inline constexpr uint16_t kScramblerInit = 0b100101010000000;
inline constexpr uint8_t kInvertedSync = 0xB8; // 0x47 with all bits flipped
/// PRBS bytes consumed per 8-packet group (every byte slot except the
/// inverted sync itself).
inline constexpr std::size_t kScramblerKeystreamBytes =
    kScramblerGroupPackets * kPacketSize - 1;

/// Streaming energy-dispersal (de)randomizer. The PRBS restarts every 8
/// packets; the group's first sync byte is complemented to 0xB8; the other 7
/// sync bytes are left untouched while the PRBS keeps clocking underneath
/// them.
///
/// The derandomizer starts unlocked: packets pass through unmodified until
/// the first 0xB8 appears, and a 0xB8 anywhere restarts the group.
class EnergyDispersal {
 public:
  enum class Mode { randomize, derandomize };

  explicit EnergyDispersal(Mode mode) : mode_(mode) {}

  /// In-place over one 188-byte packet. Throws bad_sync: in randomize mode
  /// when the packet does not start with 0x47, in derandomize mode when it
  /// starts with neither 0x47 nor 0xB8.
  void process_packet(std::span<uint8_t> packet);

  /// Whole-stream convenience; length must be a multiple of 188
  /// (wrong_length otherwise).
  std::vector<uint8_t> process(std::span<const uint8_t> packets);

  void reset();

  /// Packet index the next packet will occupy within its 8-packet group.
  unsigned group_phase() const { return phase_; }
  bool locked() const { return locked_; }

 private:
  Mode mode_;
  unsigned phase_ = 0;
  bool locked_ = false;
};

std::vector<uint8_t> randomize(std::span<const uint8_t> packets);
std::vector<uint8_t> derandomize(std::span<const uint8_t> packets);

/// The group keystream: byte k is XORed onto group byte slot k + 1 (slot 0
/// is the inverted sync). Exposed so tests can compare against a bit-level
/// register simulation.
std::span<const uint8_t, kScramblerKeystreamBytes> scrambler_keystream();

} // namespace tscast
