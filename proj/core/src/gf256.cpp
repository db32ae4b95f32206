#include "tscast/gf256.hpp"

#include <array>

namespace tscast::gf {

namespace {

struct Tables {
  std::array<uint8_t, 512> exp{};
  std::array<unsigned, 256> log{};

  Tables() {
    unsigned x = 1;
    for (unsigned i = 0; i < 255; ++i) {
      exp[i] = static_cast<uint8_t>(x);
      exp[i + 255] = static_cast<uint8_t>(x); // doubled to skip a mod 255
      log[x] = i;
      x <<= 1;
      if (x & 0x100)
        x ^= kFieldPoly;
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

} // namespace

uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0)
    return 0;
  const auto& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

uint8_t div(uint8_t a, uint8_t b) {
  if (b == 0)
    raise(Errc::invalid_argument, "GF(256) division by zero");
  if (a == 0)
    return 0;
  const auto& t = tables();
  return t.exp[t.log[a] + 255 - t.log[b]];
}

uint8_t inverse(uint8_t a) {
  if (a == 0)
    raise(Errc::invalid_argument, "zero has no inverse in GF(256)");
  const auto& t = tables();
  return t.exp[255 - t.log[a]];
}

uint8_t pow_alpha(unsigned e) { return tables().exp[e % 255]; }

unsigned log_alpha(uint8_t a) {
  if (a == 0)
    raise(Errc::invalid_argument, "log of zero in GF(256)");
  return tables().log[a];
}

} // namespace tscast::gf
