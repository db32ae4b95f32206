#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tscast/channel.hpp"

namespace tscast {

struct ChainReport {
  std::size_t packets_in = 0;
  std::size_t packets_recovered = 0; // byte-identical after the full chain
  std::size_t packets_failed = 0;    // decode failure or residual mismatch
  std::size_t corrected_bytes = 0;   // total RS corrections claimed
  std::size_t decode_failures = 0;   // codewords the decoder gave up on
  std::size_t channel_errors = 0;    // bytes the channel corrupted

  bool clean() const { return packets_failed == 0; }
};

/// Full transmitter/receiver loop at byte level:
/// randomize -> RS encode -> interleave -> channel -> deinterleave ->
/// RS decode -> derandomize, then compare against the input packet by
/// packet. Throws wrong_length / bad_sync on malformed input; channel
/// damage is reported, never thrown.
ChainReport chain_roundtrip(std::span<const uint8_t> packets,
                            const ErrorModel& model);

} // namespace tscast
