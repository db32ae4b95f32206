#include "tscast/channel.hpp"

#include <algorithm>
#include <random>

namespace tscast {

namespace {

uint8_t nonzero_xor(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(1, 255);
  return static_cast<uint8_t>(dist(rng));
}

} // namespace

std::vector<uint8_t> apply_channel(std::span<const uint8_t> in,
                                   const ErrorModel& model, ErrorLog& log) {
  std::vector<uint8_t> out(in.begin(), in.end());
  log.positions.clear();

  if (const auto* rate = std::get_if<ByteErrorRate>(&model)) {
    if (rate->rate <= 0.0)
      return out;
    std::mt19937_64 rng(rate->seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (coin(rng) < rate->rate) {
        out[i] ^= nonzero_xor(rng);
        log.positions.push_back(i);
      }
  } else if (const auto* burst = std::get_if<BurstErrors>(&model)) {
    if (burst->length == 0)
      return out;
    std::mt19937_64 rng(burst->seed);
    for (std::size_t start = burst->offset; start < out.size();
         start += burst->period) {
      const std::size_t end = std::min(start + burst->length, out.size());
      for (std::size_t i = start; i < end; ++i) {
        out[i] ^= nonzero_xor(rng);
        log.positions.push_back(i);
      }
      if (burst->period == 0)
        break;
    }
  } else {
    const auto& explicit_errors = std::get<ExplicitErrors>(model);
    std::mt19937_64 rng(0);
    std::vector<std::size_t> sorted = explicit_errors.positions;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const std::size_t i : sorted)
      if (i < out.size()) {
        out[i] ^= nonzero_xor(rng);
        log.positions.push_back(i);
      }
  }
  return out;
}

} // namespace tscast
