#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tscast/errors.hpp"

namespace tscast {

inline constexpr std::size_t kInterleaverBranches = 12;  // I
inline constexpr std::size_t kInterleaverDepthUnit = 17; // M
/// Combined encoder + decoder latency: 12 * 11 * 17 bytes.
inline constexpr std::size_t kInterleaverFillBytes =
    kInterleaverBranches * (kInterleaverBranches - 1) * kInterleaverDepthUnit;

/// Forney convolutional (de)interleaver. Bytes cycle through 12 branches;
/// interleave delays branch j by j*17 bytes, deinterleave by (11-j)*17, so
/// the composition is a pure 2244-byte delay. Branch 0 of the interleaver
/// has zero delay and always carries the sync bytes when fed 204-byte
/// frames.
class ConvolutionalInterleaver {
 public:
  enum class Direction { interleave, deinterleave };

  explicit ConvolutionalInterleaver(Direction direction);

  /// One byte in, one byte out (a fill zero while the branch is still
  /// priming). Advances the branch cursor.
  uint8_t push(uint8_t byte);

  std::vector<uint8_t> process(std::span<const uint8_t> in);
  /// Push enough zeros to drain everything previously fed in; returns the
  /// drained bytes.
  std::vector<uint8_t> flush();
  void reset();

  std::size_t branch() const { return cursor_; }

 private:
  struct Fifo {
    std::vector<uint8_t> ring; // depth bytes, zero-primed
    std::size_t head = 0;

    uint8_t shift(uint8_t in) {
      if (ring.empty())
        return in;
      const uint8_t out = ring[head];
      ring[head] = in;
      head = (head + 1) % ring.size();
      return out;
    }
  };

  Direction direction_;
  std::size_t cursor_ = 0;
  std::vector<Fifo> branches_;
};

} // namespace tscast
