#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "tscast/errors.hpp"

namespace tscast {

inline constexpr std::size_t kRsDataSize = 188;
inline constexpr std::size_t kRsParitySize = 16;
inline constexpr std::size_t kRsCodewordSize = kRsDataSize + kRsParitySize;
inline constexpr std::size_t kRsMaxCorrectable = 8;
// Shortened from (255,239): 51 implicit zero bytes precede every codeword.
inline constexpr std::size_t kRsVirtualPrefix = 51;

using RsCodeword = std::array<uint8_t, kRsCodewordSize>;

/// Systematic encode: data followed by 16 parity bytes. Generator roots are
/// alpha^0 .. alpha^15. Throws wrong_length unless data is 188 bytes.
RsCodeword rs_encode(std::span<const uint8_t> data);

struct RsDecodeResult {
  bool ok = false;
  std::array<uint8_t, kRsDataSize> data{};
  unsigned corrected = 0;
};

/// Corrects up to 8 byte errors. ok=false means the word was recognized as
/// uncorrectable (including error locations landing in the shortened
/// prefix); more than 8 errors may instead decode to a different valid
/// codeword, which is indistinguishable by design. Throws wrong_length
/// unless the input is 204 bytes.
RsDecodeResult rs_decode(std::span<const uint8_t> codeword);

/// S_i = C(alpha^i), i = 0..15. All zero iff the word is a codeword.
std::array<uint8_t, kRsParitySize> rs_syndromes(
    std::span<const uint8_t> codeword);

} // namespace tscast
