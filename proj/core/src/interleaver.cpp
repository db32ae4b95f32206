#include "tscast/interleaver.hpp"

namespace tscast {

ConvolutionalInterleaver::ConvolutionalInterleaver(Direction direction)
    : direction_(direction), branches_(kInterleaverBranches) {
  for (std::size_t j = 0; j < kInterleaverBranches; ++j) {
    const std::size_t depth = direction == Direction::interleave
                                  ? j * kInterleaverDepthUnit
                                  : (kInterleaverBranches - 1 - j) *
                                        kInterleaverDepthUnit;
    branches_[j].ring.assign(depth, 0);
  }
}

uint8_t ConvolutionalInterleaver::push(uint8_t byte) {
  const uint8_t out = branches_[cursor_].shift(byte);
  cursor_ = (cursor_ + 1) % kInterleaverBranches;
  return out;
}

std::vector<uint8_t> ConvolutionalInterleaver::process(
    std::span<const uint8_t> in) {
  std::vector<uint8_t> out;
  out.reserve(in.size());
  for (const uint8_t b : in)
    out.push_back(push(b));
  return out;
}

std::vector<uint8_t> ConvolutionalInterleaver::flush() {
  std::vector<uint8_t> out;
  // The deepest branch holds 11*17 bytes and sees one push per 12-byte
  // rotation, so 11*17*12 = 2244 pushes drain everything.
  out.reserve(kInterleaverFillBytes);
  for (std::size_t i = 0; i < kInterleaverFillBytes; ++i)
    out.push_back(push(0));
  return out;
}

void ConvolutionalInterleaver::reset() {
  cursor_ = 0;
  for (auto& b : branches_) {
    b.head = 0;
    std::fill(b.ring.begin(), b.ring.end(), 0);
  }
}

} // namespace tscast
