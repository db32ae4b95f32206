#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace tscast {

/// Independent per-byte corruption with probability `rate`.
struct ByteErrorRate {
  double rate = 0.0;
  uint64_t seed = 0;
};

/// A run of `length` corrupted bytes starting at `offset`, repeating every
/// `period` bytes (period 0 means a single burst).
struct BurstErrors {
  std::size_t length = 0;
  std::size_t period = 0;
  std::size_t offset = 0;
  uint64_t seed = 0;
};

/// Exactly these byte positions are corrupted.
struct ExplicitErrors {
  std::vector<std::size_t> positions;
};

using ErrorModel = std::variant<ByteErrorRate, BurstErrors, ExplicitErrors>;

struct ErrorLog {
  std::vector<std::size_t> positions; // ascending, every corrupted byte
};

/// Corrupt a byte stream. Every listed position is XORed with a nonzero
/// value, so a logged position always differs from the input. Deterministic
/// for a fixed model (seeds included).
std::vector<uint8_t> apply_channel(std::span<const uint8_t> in,
                                   const ErrorModel& model, ErrorLog& log);

} // namespace tscast
